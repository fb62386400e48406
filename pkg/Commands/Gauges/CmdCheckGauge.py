"""
Command: Check Gauge

Verify the five asymptotic-gauge axioms for a zoo gauge or for the principal
gauge of a generator expression.

Inputs:
- [gauge] name (String): Zoo name (B_pol, B_exp, B^s, B_pol2, nbar, const1, or alias pol/exp/s/pol2) or a generator in eps
- [gauge] param_range (Integer): Number of tested parameter values / powers
- [schedule], [run] precision: Sampling schedule and working precision

Outputs:
- One record per axiom (i)..(v)
- outputs.gauge: Presentation of the checked gauge
"""

from __future__ import annotations
import os
import sys

# Add Lib to path
lib_path = os.path.join(os.path.dirname(__file__), '..', '..', 'Lib')
if lib_path not in sys.path:
    sys.path.insert(0, os.path.abspath(lib_path))

from config import get_config
from gauge import verify_gauge_axioms
from logger import get_logger
from report import Report, RunConfig
from zoo import gauge_by_name


AXIOM_ANCHORS = {
    "i": "gauge axiom (i): real-valued nets",
    "ii": "gauge axiom (ii): an infinite net",
    "iii": "gauge axiom (iii): products",
    "iv": "gauge axiom (iv): scalar multiples",
    "v": "gauge axiom (v): absolute sums",
}


def run_command(run_config: RunConfig) -> Report:
    return CmdCheckGauge(run_config).execute()


class CmdCheckGauge:
    """Gauge axiom check"""

    def __init__(self, run_config: RunConfig):
        self.run_config = run_config
        self.logger = get_logger("CmdCheckGauge")
        self.config = get_config()
        self.sched = run_config.schedule

    def execute(self) -> Report:
        self.logger.info("=" * 70)
        self.logger.info("COMMAND: CHECK GAUGE")
        self.logger.info("=" * 70)

        report = Report(self.run_config)
        name = self.run_config.get("gauge", "name", "B_pol")
        param_range = self.run_config.get("gauge", "param_range", self.config.GAUGE_PARAM_RANGE)
        gauge = gauge_by_name(name, param_range)
        self.logger.info(f"Gauge: {gauge.name} ({gauge.kind}, {len(gauge.generators())} tested generators)")
        self.logger.info(f"Schedule: {self.sched.describe()}")

        with report.timed() as clock:
            axioms = verify_gauge_axioms(gauge, self.sched)
        for key, verdict in axioms.verdicts.items():
            report.add(f"axiom {key}", AXIOM_ANCHORS[key], verdict, clock["seconds"] / len(axioms.verdicts))
            self.logger.info(f"  axiom ({key}): {verdict.tag.value}")

        report.outputs["gauge"] = gauge.describe()
        return report
