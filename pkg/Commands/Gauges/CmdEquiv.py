"""
Command: Equivalence

Compare two gauges: equal moderate classes (equivalence) and, when the zoo
knows a pair of morphisms between them, isomorphism of gauges.

Inputs:
- [gauge] first (String): First gauge (zoo name or generator), default B_pol
- [gauge] second (String): Second gauge, default B_exp
- [gauge] param_range (Integer): Tested parameter values / powers

Outputs:
- Records "inclusion first in second", "inclusion second in first", "equivalent"
- Record "isomorphic" when an isomorphism is known
"""

from __future__ import annotations
import os
import sys

# Add Lib to path
lib_path = os.path.join(os.path.dirname(__file__), '..', '..', 'Lib')
if lib_path not in sys.path:
    sys.path.insert(0, os.path.abspath(lib_path))

from config import get_config
from gauge import inclusion, isomorphic_via
from index import all_of
from logger import get_logger
from report import Report, RunConfig
from zoo import gauge_by_name, isomorphism_for, morphism_by_name


def run_command(run_config: RunConfig) -> Report:
    return CmdEquiv(run_config).execute()


class CmdEquiv:
    """Gauge equivalence and isomorphism"""

    def __init__(self, run_config: RunConfig):
        self.run_config = run_config
        self.logger = get_logger("CmdEquiv")
        self.config = get_config()
        self.sched = run_config.schedule

    def execute(self) -> Report:
        self.logger.info("=" * 70)
        self.logger.info("COMMAND: EQUIV")
        self.logger.info("=" * 70)

        report = Report(self.run_config)
        param_range = self.run_config.get("gauge", "param_range", self.config.GAUGE_PARAM_RANGE)
        first_name = self.run_config.get("gauge", "first", "B_pol")
        second_name = self.run_config.get("gauge", "second", "B_exp")
        first = gauge_by_name(first_name, param_range)
        second = gauge_by_name(second_name, param_range)
        self.logger.info(f"Comparing {first.name} and {second.name}")

        parts = []
        for a, b in ((first, second), (second, first)):
            with report.timed() as clock:
                verdict = inclusion(a, b, self.sched)
            parts.append(report.add(f"inclusion {a.name} in {b.name}", "moderate-class inclusion", verdict,
                                    clock["seconds"]))
            self.logger.info(f"  {a.name} in {b.name}: {verdict.tag.value}")
        equivalent = all_of(parts, {"equivalence": f"{first.name} ~ {second.name}"})
        report.add("equivalent", "equivalent gauges: equal moderate classes", equivalent)

        pair = isomorphism_for(first_name, second_name)
        if pair:
            forward, backward = (morphism_by_name(name, self.sched) for name in pair)
            with report.timed() as clock:
                verdict = isomorphic_via(forward, backward, first, second, self.sched)
            report.add("isomorphic", "isomorphic gauges: invertible gauge morphism", verdict, clock["seconds"],
                       forward=forward.label(), backward=backward.label())
            self.logger.info(f"  isomorphic via {forward.label()}/{backward.label()}: {verdict.tag.value}")
        return report
