"""
Configuration Management for GaugeForge

Handles loading working precision, the default sampling schedule, quadrature
settings and logging from the environment (optionally a .env file).
"""

import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

from errors import ConfigError
from netlang import SamplingSchedule


TOOL_NAME = "gaugeforge"
TOOL_VERSION = "1.0.0"


def parse_schedule(text: str, precision: int) -> SamplingSchedule:
    """
    Parse an "eps0,ratio,count" triple into a SamplingSchedule

    Args:
        text: Comma separated start, ratio and count (decimals or p/q)
        precision: Working precision in decimal digits

    Returns:
        SamplingSchedule

    Raises:
        ConfigError: If the triple is malformed or violates the schedule invariants
    """

    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ConfigError(f"schedule must be 'eps0,ratio,count', got '{text}'")

    try:
        start = Fraction(parts[0])
        ratio = Fraction(parts[1])
        count = int(parts[2])
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"invalid schedule '{text}': {e}")

    try:
        return SamplingSchedule(start=start, ratio=ratio, count=count, precision=precision)
    except ValueError as e:
        raise ConfigError(str(e))


class Config:
    """Configuration manager for the toolkit"""

    def __init__(self, env_file: Optional[str] = None):
        """
        Initialize configuration

        Args:
            env_file: Path to .env file. If None, searches in standard locations.
        """

        if env_file and os.path.exists(env_file):
            self.env_file = env_file
        else:
            self.env_file = self._find_env_file()

        if self.env_file:
            load_dotenv(self.env_file)

        self._load_config()

    def _find_env_file(self) -> Optional[str]:
        """Find .env file in standard locations"""

        possible_paths = [
            Path(".env"),
            Path(__file__).parent.parent / ".env",
            Path.home() / ".config" / TOOL_NAME / ".env",
        ]

        for path in possible_paths:
            if path.exists():
                return str(path.resolve())

        return None

    def _load_config(self):
        """Load configuration from environment variables"""

        try:
            self.PRECISION = int(os.getenv("GAUGEFORGE_PRECISION", "50"))
        except ValueError:
            raise ConfigError("GAUGEFORGE_PRECISION must be an integer")
        if self.PRECISION < 15:
            raise ConfigError("GAUGEFORGE_PRECISION must be at least 15 digits")

        self.SCHEDULE = os.getenv("GAUGEFORGE_SCHEDULE", "0.1,0.1,12")

        # Logging
        self.LOG_LEVEL = os.getenv("GAUGEFORGE_LOG_LEVEL", "INFO")
        self.LOG_FILE = os.getenv("GAUGEFORGE_LOG_FILE", "")

        # Oracle defaults
        try:
            self.MAX_ORDER = int(os.getenv("GAUGEFORGE_MAX_ORDER", "3"))
            self.GAUGE_PARAM_RANGE = int(os.getenv("GAUGEFORGE_PARAM_RANGE", "6"))
            self.QUAD_TOL = float(os.getenv("GAUGEFORGE_QUAD_TOL", "1e-10"))
            self.QUAD_RADIUS = float(os.getenv("GAUGEFORGE_QUAD_RADIUS", "12"))
        except ValueError as e:
            raise ConfigError(f"invalid oracle setting: {e}")
        self.MOLLIFIER = os.getenv("GAUGEFORGE_MOLLIFIER", "hermite(3)")

    def default_schedule(self, precision: Optional[int] = None) -> SamplingSchedule:
        """Build the default SamplingSchedule (eps_k = 10^-k, k = 1..12 unless overridden)"""
        return parse_schedule(self.SCHEDULE, precision or self.PRECISION)

    def validate(self) -> bool:
        """
        Validate that the configured schedule is usable

        Returns:
            True if configuration is valid
        """

        try:
            self.default_schedule()
        except ConfigError:
            return False
        return True

    def __repr__(self) -> str:
        return (
            f"Config(env_file={self.env_file}, precision={self.PRECISION}, "
            f"schedule={self.SCHEDULE}, log_level={self.LOG_LEVEL})"
        )


# Global config instance
_config = None

def get_config() -> Config:
    """Get global configuration instance"""
    global _config
    if _config is None:
        _config = Config()
    return _config


def reset_config():
    """Drop the cached instance (used after changing the environment)"""
    global _config
    _config = None


def load_toml(path) -> dict:
    """
    Read a TOML file (tomllib on 3.11+, tomli before)

    Raises:
        ConfigError: If the file is missing or not valid TOML
    """

    if sys.version_info >= (3, 11):
        import tomllib
    else:
        import tomli as tomllib

    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except FileNotFoundError:
        raise ConfigError(f"file not found: {path}")
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"invalid TOML in {path}: {e}")
