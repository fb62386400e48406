"""
Logging utilities for GaugeForge

Provides consistent logging across the library and the command scripts.
Log lines go to stderr so that reports written to stdout stay clean.
"""

import os
import sys
from datetime import datetime
from pathlib import Path
from typing import Optional


LEVELS = {
    "DEBUG": 10,
    "INFO": 20,
    "WARNING": 30,
    "ERROR": 40,
    "CRITICAL": 50,
}


class Logger:
    """Simple leveled logger for library modules and commands"""

    def __init__(self, name: str, log_file: Optional[str] = None, level: str = "INFO"):
        """
        Initialize logger

        Args:
            name: Name of the component (for prefixing messages)
            log_file: Optional log file path. If None, logs to stderr only.
            level: Minimum level that is emitted
        """

        self.name = name
        self.log_file = log_file
        self.threshold = LEVELS.get(level.upper(), LEVELS["INFO"])

        # Create log directory if specified
        if self.log_file:
            log_path = Path(self.log_file)
            log_path.parent.mkdir(parents=True, exist_ok=True)

    def _format_message(self, level: str, message: str) -> str:
        """Format log message with timestamp and component name"""

        timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
        return f"[{timestamp}] [{level}] [{self.name}] {message}"

    def _write(self, level: str, message: str):
        """Write message to stderr and optionally to file"""

        if LEVELS[level] < self.threshold:
            return

        formatted_message = self._format_message(level, message)
        print(formatted_message, file=sys.stderr)

        if self.log_file:
            try:
                with open(self.log_file, "a", encoding="utf-8") as f:
                    f.write(formatted_message + "\n")
            except OSError as e:
                print(f"Warning: Failed to write to log file: {e}", file=sys.stderr)

    def debug(self, message: str):
        """Log debug message"""
        self._write("DEBUG", message)

    def info(self, message: str):
        """Log info message"""
        self._write("INFO", message)

    def warning(self, message: str):
        """Log warning message"""
        self._write("WARNING", message)

    def error(self, message: str):
        """Log error message"""
        self._write("ERROR", message)

    def critical(self, message: str):
        """Log critical error message"""
        self._write("CRITICAL", message)


def get_logger(name: str) -> Logger:
    """
    Get a logger instance for a component

    The file target and level are read from the environment so that library
    modules do not depend on the configuration object at import time.

    Args:
        name: Name of the component

    Returns:
        Logger instance
    """
    log_file = os.getenv("GAUGEFORGE_LOG_FILE") or None
    level = os.getenv("GAUGEFORGE_LOG_LEVEL", "INFO")
    return Logger(name, log_file, level)
