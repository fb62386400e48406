#!/usr/bin/env python
"""
GaugeForge - command-line front-end

Loads the command scripts under Commands/ by path, feeds them a validated
RunConfig and writes the report. Exit codes: 0 all Holds, 1 any Fails,
2 configuration or input error, 3 Inconclusive without Fails.

Usage:
    python gaugeforge.py check-gauge --gauge pol
    python gaugeforge.py morphism --map 'pow(eps,2)' --from Is --to Is
    python gaugeforge.py ode transform --problem ode.toml --morphism lambda --emit out.toml
    python gaugeforge.py suite --out report.json
"""

import argparse
import importlib.util
import os
import sys
from typing import Any, Dict, List, Optional

ROOT = os.path.dirname(os.path.abspath(__file__))
lib_path = os.path.join(ROOT, "Lib")
if lib_path not in sys.path:
    sys.path.insert(0, lib_path)

from config import TOOL_NAME, TOOL_VERSION
from errors import ConfigError, GaugeForgeError
from logger import get_logger
from report import EXIT_CONFIG, FORMATS, RunConfig


logger = get_logger("gaugeforge")

COMMANDS = {
    "check-gauge": os.path.join("Commands", "Gauges", "CmdCheckGauge.py"),
    "equiv": os.path.join("Commands", "Gauges", "CmdEquiv.py"),
    "interleave": os.path.join("Commands", "Gauges", "CmdInterleave.py"),
    "morphism": os.path.join("Commands", "Index", "CmdMorphism.py"),
    "embed": os.path.join("Commands", "Colombeau", "CmdEmbed.py"),
    "ode": os.path.join("Commands", "Colombeau", "CmdOde.py"),
    "suite": os.path.join("Commands", "Core", "CmdSuite.py"),
}

ODE_ACTIONS = ("solve", "transform", "transfer", "classify")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=TOOL_NAME, description="Asymptotic gauges and Colombeau algebras")
    parser.add_argument("--version", action="version", version=f"{TOOL_NAME} {TOOL_VERSION}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--schedule", help="eps0,ratio,count (default 0.1,0.1,12)")
    common.add_argument("--precision", type=int, help="working precision in decimal digits")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=FORMATS, help="report format")
    common.add_argument("--timing", action="store_true", default=None, help="add wall-clock timings to records")
    common.add_argument("--config", help="TOML config file; flags override its values")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-gauge", parents=[common], help="verify the gauge axioms")
    p.add_argument("--gauge", help="zoo name or generator in eps")
    p.add_argument("--param-range", type=int)

    p = sub.add_parser("morphism", parents=[common], help="check a morphism of index sets")
    p.add_argument("--map", help="underlying map in the target variable")
    p.add_argument("--name", help="zoo morphism name")
    p.add_argument("--from", dest="source", help="source index set (Is or nbar)")
    p.add_argument("--to", dest="target", help="target index set (Is or nbar)")
    p.add_argument("--gauge-from")
    p.add_argument("--gauge-to")
    p.add_argument("--kind", choices=("Ag1", "Agle"))

    p = sub.add_parser("equiv", parents=[common], help="equivalence and isomorphism of two gauges")
    p.add_argument("--first")
    p.add_argument("--second")
    p.add_argument("--param-range", type=int)

    p = sub.add_parser("interleave", parents=[common], help="generator strictly between two principal gauges")
    p.add_argument("--b1")
    p.add_argument("--b2")
    p.add_argument("--depth", type=int)
    p.add_argument("--steps", type=int)

    p = sub.add_parser("embed", parents=[common], help="mollifier embedding of distributions")
    p.add_argument("--mollifier")
    p.add_argument("--generator")
    p.add_argument("--distribution", action="append", dest="distributions")
    p.add_argument("--order", type=int)
    p.add_argument("--compact")

    p = sub.add_parser("ode", parents=[common], help="linear ODEs with net data")
    p.add_argument("action", choices=ODE_ACTIONS)
    p.add_argument("--problem", help="problem TOML file, or exponential / logarithmic")
    p.add_argument("--solution", help="closed-form solution JSON")
    p.add_argument("--morphism")
    p.add_argument("--method", choices=("closed-form-linear", "rk4"))
    p.add_argument("--gauge")
    p.add_argument("--compact")
    p.add_argument("--step", type=float)
    p.add_argument("--emit", help="write the solution or transformed problem here")

    sub.add_parser("suite", parents=[common], help="run the acceptance battery")
    return parser


def parse_schedule_flag(text: Optional[str]) -> Dict[str, Any]:
    if text is None:
        return {}
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ConfigError(f"--schedule expects eps0,ratio,count, got '{text}'")
    try:
        count = int(parts[2])
    except ValueError:
        raise ConfigError(f"schedule count must be an integer, got '{parts[2]}'")
    return {"start": parts[0], "ratio": parts[1], "count": count}


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Dict[str, Any]]:
    """Flag values as config sections; unset flags stay None and are skipped"""
    def get(name):
        return getattr(args, name, None)

    overrides: Dict[str, Dict[str, Any]] = {
        "run": {"precision": args.precision, "out": args.out, "format": args.format, "timing": args.timing},
        "schedule": parse_schedule_flag(args.schedule),
    }
    if args.command == "check-gauge":
        overrides["gauge"] = {"name": get("gauge"), "param_range": get("param_range")}
    elif args.command == "equiv":
        overrides["gauge"] = {"first": get("first"), "second": get("second"), "param_range": get("param_range")}
    elif args.command == "interleave":
        overrides["gauge"] = {"b1": get("b1"), "b2": get("b2"), "depth": get("depth"), "steps": get("steps")}
    elif args.command == "morphism":
        overrides["morphism"] = {
            "map": get("map"), "name": get("name"), "from": get("source"), "to": get("target"),
            "gauge_from": get("gauge_from"), "gauge_to": get("gauge_to"), "kind": get("kind"),
        }
    elif args.command == "embed":
        overrides["embed"] = {
            "mollifier": get("mollifier"), "generator": get("generator"), "distributions": get("distributions"),
            "order": get("order"), "compact": get("compact"),
        }
    elif args.command == "ode":
        overrides["ode"] = {
            "problem": get("problem"), "solution": get("solution"), "morphism": get("morphism"),
            "method": get("method"), "gauge": get("gauge"), "compact": get("compact"), "step": get("step"),
            "out": get("emit"),
        }
    return overrides


def load_command(command: str):
    """Import a command script by path"""
    path = os.path.join(ROOT, COMMANDS[command])
    spec = importlib.util.spec_from_file_location(f"gaugeforge_{command.replace('-', '_')}", path)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def main(argv: Optional[List[str]] = None, stream=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run_config = RunConfig.build(args.command, overrides_from_args(args), args.config,
                                     action=getattr(args, "action", "") or "")
        report = load_command(args.command).run_command(run_config)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except GaugeForgeError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_CONFIG

    path = report.write(stream)
    if path:
        logger.info(f"Report written to {path}")
    return report.exit_code()


if __name__ == "__main__":
    sys.exit(main())
