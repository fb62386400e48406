"""
Command: Morphism

Check that a map underlies a morphism of index sets, optionally lift it to a
morphism of gauges, and re-run a few asymptotic statements along it.

Inputs:
- [morphism] map (String): Underlying map in the target variable, e.g. pow(eps, 2)
- [morphism] name (String): Zoo morphism (identity, lambda, eta, square, sqrt, cube, nbar_in, nbar_out, wobble)
- [morphism] from / to (String): Source and target index sets (Is or nbar), default Is
- [morphism] gauge_from / gauge_to (String): Gauges for the Ag check (optional)
- [morphism] kind (String): Ag1 or Agle

Outputs:
- Record "morphism": the downward-directed criterion
- Records "ag morphism ..." when gauges are given or the zoo knows a standard pair
- Records "preserve ...": order, big-O and limit statements transported along the map
"""

from __future__ import annotations
import os
import sys

# Add Lib to path
lib_path = os.path.join(os.path.dirname(__file__), '..', '..', 'Lib')
if lib_path not in sys.path:
    sys.path.insert(0, os.path.abspath(lib_path))

from config import get_config
from errors import ConfigError, InclusionFailure
from gauge import check_ag_morphism
from index import IS_S, Verdict, index_set_by_name, morphism, preservation_suite, standard_cases
from logger import get_logger
from netlang import parse
from report import Report, RunConfig
from zoo import MORPHISM_GAUGES, gauge_by_name, morphism_by_name


def run_command(run_config: RunConfig) -> Report:
    return CmdMorphism(run_config).execute()


class CmdMorphism:
    """Index-set morphism check"""

    def __init__(self, run_config: RunConfig):
        self.run_config = run_config
        self.logger = get_logger("CmdMorphism")
        self.config = get_config()
        self.sched = run_config.schedule

    def _build(self):
        text = self.run_config.get("morphism", "map")
        name = self.run_config.get("morphism", "name", "")
        if not text and not name:
            raise ConfigError("morphism needs --map or --name")
        if not text:
            return morphism_by_name(name, self.sched)
        source = index_set_by_name(self.run_config.get("morphism", "from", "Is"))
        target = index_set_by_name(self.run_config.get("morphism", "to", "Is"))
        f_map = parse(text, variables=(target.variable,), extended=True)
        return morphism(f_map, source, target, self.sched, name)

    def _gauge_pair(self, f):
        gauge_from = self.run_config.get("morphism", "gauge_from", "")
        gauge_to = self.run_config.get("morphism", "gauge_to", "")
        if gauge_from and gauge_to:
            return gauge_from, gauge_to
        if not self.run_config.get("morphism", "map") and f.name in MORPHISM_GAUGES:
            return MORPHISM_GAUGES[f.name]
        return None

    def execute(self) -> Report:
        self.logger.info("=" * 70)
        self.logger.info("COMMAND: MORPHISM")
        self.logger.info("=" * 70)

        report = Report(self.run_config)
        with report.timed() as clock:
            f = self._build()
        report.add("morphism", "morphism of index sets: downward-directed criterion", f.verdict, clock["seconds"],
                   map=f.label(), source=f.source.name, target=f.target.name)
        self.logger.info(f"Morphism {f.label()}: {f.source.name} -> {f.target.name}: {f.verdict.tag.value}")
        report.outputs["morphism"] = {"map": f.label(), "source": f.source.name, "target": f.target.name}

        if not f.verified:
            self.logger.warning("Morphism not verified, skipping gauge and preservation checks")
            return report

        pair = self._gauge_pair(f)
        if pair:
            self._check_gauges(report, f, *pair)

        if f.source is IS_S:
            with report.timed() as clock:
                results = preservation_suite(f, standard_cases(IS_S.variable), self.sched)
            for result in results:
                report.add(f"preserve {result.case.label}", "statements preserved along morphisms",
                           result.transported, clock["seconds"] / len(results), original=result.original.tag.value)
                self.logger.info(f"  {result.case.label}: {result.transported.tag.value}")
        return report

    def _check_gauges(self, report: Report, f, gauge_from: str, gauge_to: str):
        param_range = self.config.GAUGE_PARAM_RANGE
        kind = self.run_config.get("morphism", "kind", "Ag1")
        source = gauge_by_name(gauge_from, param_range)
        target = gauge_by_name(gauge_to, param_range)
        anchor = f"morphism of gauges ({kind})"
        with report.timed() as clock:
            try:
                arrow = check_ag_morphism(f, source, target, self.sched, kind)
            except InclusionFailure as e:
                verdict = e.verdict or Verdict.fails_({"witness": e.witness})
                report.add(f"ag morphism {source.name} -> {target.name}", anchor, verdict, clock.get("seconds"),
                           reason=str(e))
                self.logger.info(f"  {kind} {source.name} -> {target.name}: Fails ({e})")
                return
        for label, verdict in arrow.record:
            report.add(f"ag morphism {label}", anchor, verdict, clock["seconds"] / len(arrow.record))
        self.logger.info(f"  {kind} {source.name} -> {target.name}: "
                         + ("verified" if arrow.verified else "not verified"))
