"""
Run configuration and reports

RunConfig merges an optional TOML file with command-line flags and validates
both against a fixed schema. Report collects named verdict records and
serializes them deterministically (sorted keys, 17 significant digits,
timings only on request).
"""

from __future__ import annotations

import json
import sys
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional

from config import TOOL_NAME, TOOL_VERSION, get_config, load_toml, parse_schedule
from errors import ConfigError
from index import Verdict, _serialize, format_number
from netlang import SamplingSchedule


EXIT_OK = 0
EXIT_FAILS = 1
EXIT_CONFIG = 2
EXIT_INCONCLUSIVE = 3

FORMATS = ("json", "text")

# section -> key -> accepted types
SCHEMA: Dict[str, Dict[str, tuple]] = {
    "run": {"precision": (int,), "out": (str,), "format": (str,), "timing": (bool,)},
    "schedule": {"start": (str, int, float), "ratio": (str, int, float), "count": (int,)},
    "gauge": {
        "name": (str,), "param_range": (int,), "first": (str,), "second": (str,),
        "b1": (str,), "b2": (str,), "depth": (int,), "steps": (int,),
    },
    "morphism": {
        "map": (str,), "name": (str,), "from": (str,), "to": (str,),
        "gauge_from": (str,), "gauge_to": (str,), "kind": (str,),
    },
    "embed": {
        "mollifier": (str,), "generator": (str,), "distributions": (list,),
        "order": (int,), "compact": (str,),
    },
    "ode": {
        "problem": (str,), "morphism": (str,), "method": (str,), "gauge": (str,),
        "compact": (str,), "step": (float, int), "out": (str,), "solution": (str,),
    },
}


def _check_type(section: str, key: str, value: Any):
    accepted = SCHEMA[section][key]
    if isinstance(value, bool) and bool not in accepted:
        raise ConfigError(f"[{section}] {key}: expected {'/'.join(t.__name__ for t in accepted)}, got bool")
    if not isinstance(value, accepted):
        raise ConfigError(f"[{section}] {key}: expected {'/'.join(t.__name__ for t in accepted)}, got {type(value).__name__}")
    if section == "embed" and key == "distributions" and not all(isinstance(v, str) for v in value):
        raise ConfigError("[embed] distributions: expected a list of strings")


def validate_sections(data: Dict[str, Any]) -> Dict[str, Dict[str, Any]]:
    """
    Check a parsed config file against the schema

    Raises:
        ConfigError: Unknown section or key, or a wrongly-typed value
    """
    sections: Dict[str, Dict[str, Any]] = {}
    for section, body in data.items():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}] (known: {', '.join(sorted(SCHEMA))})")
        if not isinstance(body, dict):
            raise ConfigError(f"[{section}] must be a table")
        for key, value in body.items():
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key '{key}' in [{section}]")
            _check_type(section, key, value)
        sections[section] = dict(body)
    return sections


@dataclass
class RunConfig:
    """Validated settings of one command run"""
    command: str
    action: str = ""
    sections: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    config_path: Optional[str] = None

    @classmethod
    def build(cls, command: str, overrides: Optional[Dict[str, Dict[str, Any]]] = None,
              config_path: Optional[str] = None, action: str = "") -> "RunConfig":
        """File values first, then non-None overrides from flags"""
        sections = validate_sections(load_toml(config_path)) if config_path else {}
        for section, body in (overrides or {}).items():
            for key, value in body.items():
                if value is None:
                    continue
                if section not in SCHEMA or key not in SCHEMA[section]:
                    raise ConfigError(f"unknown option {section}.{key}")
                _check_type(section, key, value)
                sections.setdefault(section, {})[key] = value
        run_config = cls(command, action, sections, config_path)
        run_config.validate()
        return run_config

    def get(self, section: str, key: str, default: Any = None) -> Any:
        return self.sections.get(section, {}).get(key, default)

    def validate(self):
        if self.output_format not in FORMATS:
            raise ConfigError(f"format must be one of {', '.join(FORMATS)}")
        if self.precision < 15:
            raise ConfigError("precision must be at least 15 digits")
        self.schedule  # raises ConfigError on a malformed triple

    @property
    def precision(self) -> int:
        return int(self.get("run", "precision") or get_config().PRECISION)

    @property
    def output_format(self) -> str:
        return self.get("run", "format", "json")

    @property
    def timing(self) -> bool:
        return bool(self.get("run", "timing", False))

    @property
    def out(self) -> Optional[str]:
        return self.get("run", "out")

    @property
    def schedule(self) -> SamplingSchedule:
        body = self.sections.get("schedule")
        if not body:
            return get_config().default_schedule(self.precision)
        default = get_config().SCHEDULE.split(",")
        text = ",".join(str(body.get(k, d)) for k, d in zip(("start", "ratio", "count"), default))
        return parse_schedule(text, self.precision)

    def echo(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"command": self.command}
        if self.action:
            data["action"] = self.action
        data["precision"] = self.precision
        data["schedule"] = self.schedule.describe()
        for section, body in self.sections.items():
            if section in ("run", "schedule"):
                continue
            data[section] = body
        return data


@dataclass
class Record:
    name: str
    anchor: str
    verdict: Verdict
    seconds: Optional[float] = None
    data: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self, timing: bool) -> Dict[str, Any]:
        entry = {"name": self.name, "anchor": self.anchor}
        entry.update(self.verdict.to_dict())
        if self.data:
            entry["data"] = _serialize(self.data)
        if timing and self.seconds is not None:
            entry["seconds"] = format_number(round(self.seconds, 6))
        return entry


class Report:
    """Per-check records of one command run"""

    def __init__(self, run_config: RunConfig):
        self.run_config = run_config
        self.records: List[Record] = []
        self.outputs: Dict[str, Any] = {}

    def add(self, name: str, anchor: str, verdict: Verdict, seconds: Optional[float] = None, **data) -> Verdict:
        self.records.append(Record(name, anchor, verdict, seconds, data))
        return verdict

    @contextmanager
    def timed(self) -> Iterator[Dict[str, float]]:
        """Wall-clock timer; the elapsed seconds land in the yielded dict"""
        box: Dict[str, float] = {}
        start = time.perf_counter()
        try:
            yield box
        finally:
            box["seconds"] = time.perf_counter() - start

    def exit_code(self) -> int:
        if any(r.verdict.fails for r in self.records):
            return EXIT_FAILS
        if any(r.verdict.inconclusive for r in self.records):
            return EXIT_INCONCLUSIVE
        return EXIT_OK

    def summary(self) -> Dict[str, int]:
        counts = {"Holds": 0, "Fails": 0, "Inconclusive": 0}
        for r in self.records:
            counts[r.verdict.tag.value] += 1
        return counts

    def to_dict(self) -> Dict[str, Any]:
        timing = self.run_config.timing
        data = {
            "tool": TOOL_NAME,
            "version": TOOL_VERSION,
            "config": _serialize(self.run_config.echo()),
            "records": [r.to_dict(timing) for r in self.records],
            "summary": {k: str(v) for k, v in self.summary().items()},
            "exit_code": str(self.exit_code()),
        }
        if self.outputs:
            data["outputs"] = _serialize(self.outputs)
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    def to_text(self) -> str:
        width = max([len(r.name) for r in self.records] + [5])
        lines = [f"{TOOL_NAME} {TOOL_VERSION}  {self.run_config.command} {self.run_config.action}".rstrip(), ""]
        lines.append(f"{'check'.ljust(width)}  {'verdict'.ljust(12)}  {'source'.ljust(8)}  anchor")
        lines.append("-" * (width + 40))
        for r in self.records:
            lines.append(f"{r.name.ljust(width)}  {r.verdict.tag.value.ljust(12)}  {r.verdict.source.ljust(8)}  {r.anchor}")
        counts = self.summary()
        lines.append("")
        lines.append(", ".join(f"{k}: {v}" for k, v in counts.items()) + f"  (exit {self.exit_code()})")
        return "\n".join(lines) + "\n"

    def render(self) -> str:
        return self.to_text() if self.run_config.output_format == "text" else self.to_json()

    def write(self, stream=None) -> Optional[Path]:
        """Write to the configured output path, or to the stream (stdout by default)"""
        text = self.render()
        if self.run_config.out:
            path = Path(self.run_config.out)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
            return path
        (stream or sys.stdout).write(text)
        return None
