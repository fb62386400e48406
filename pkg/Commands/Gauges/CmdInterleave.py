"""
Command: Interleave

Build a principal generator strictly between AG(b1) and AG(b2) by switching
between b1 and b2 at certified points, and report the witness table.

Inputs:
- [gauge] b1 (String): Slower generator, default pow(eps, -1)
- [gauge] b2 (String): Faster generator, default exp(1/eps)
- [gauge] depth (Integer): Number of switching points, default 6
- [gauge] steps (Integer): Repeat the construction towards b1 this many times, default 1

Outputs:
- One record per witness inequality n * b1(eps_bar_n)^n < b2(eps_bar_n)
- Record "strict interleaving" per construction
- outputs.witnesses: The witness table of the first construction
"""

from __future__ import annotations
import os
import sys

# Add Lib to path
lib_path = os.path.join(os.path.dirname(__file__), '..', '..', 'Lib')
if lib_path not in sys.path:
    sys.path.insert(0, os.path.abspath(lib_path))

from gauge import interleave, verify_interleaving
from index import Verdict
from logger import get_logger
from netlang import parse, print_expr
from report import Report, RunConfig


def run_command(run_config: RunConfig) -> Report:
    return CmdInterleave(run_config).execute()


class CmdInterleave:
    """Interleaving of principal gauges"""

    def __init__(self, run_config: RunConfig):
        self.run_config = run_config
        self.logger = get_logger("CmdInterleave")
        self.sched = run_config.schedule

    def execute(self) -> Report:
        self.logger.info("=" * 70)
        self.logger.info("COMMAND: INTERLEAVE")
        self.logger.info("=" * 70)

        report = Report(self.run_config)
        b1 = parse(self.run_config.get("gauge", "b1", "pow(eps, -1)"), extended=True)
        b2 = parse(self.run_config.get("gauge", "b2", "exp(1/eps)"), extended=True)
        depth = self.run_config.get("gauge", "depth", 6)
        steps = self.run_config.get("gauge", "steps", 1)
        self.logger.info(f"b1 = {print_expr(b1)}, b2 = {print_expr(b2)}, depth {depth}, steps {steps}")

        upper = b2
        for step in range(1, steps + 1):
            prefix = f"step {step} " if steps > 1 else ""
            with report.timed() as clock:
                hybrid, witnesses = interleave(b1, upper, depth, self.sched)
            for w in witnesses:
                verdict = Verdict.holds_(w.to_dict(), source="interval") if w.verified else Verdict.fails_(w.to_dict())
                report.add(f"{prefix}witness n={w.n}", "switching point: n * b1^n < b2", verdict,
                           clock["seconds"] / len(witnesses))
                self.logger.info(f"  eps_bar_{w.n} = {w.eps_bar}: {verdict.tag.value}")
            with report.timed() as clock:
                strict = verify_interleaving(hybrid, witnesses, self.sched)
            report.add(f"{prefix}strict interleaving", "AG(b1) < AG(b3) < AG(b2), both strict", strict,
                       clock["seconds"], hybrid=hybrid.label())
            self.logger.info(f"  {hybrid.label()}: {strict.tag.value}")
            if step == 1:
                report.outputs["witnesses"] = [w.to_dict() for w in witnesses]
            upper = hybrid
        return report
