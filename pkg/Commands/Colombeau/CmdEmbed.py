"""
Command: Embed

Check a mollifier, embed test distributions into the algebra of a principal
gauge and run the diagram checks (derivation, reproduction of smooth
functions, linearity, injectivity, generator-preserving triangles).

Inputs:
- [embed] mollifier (String): 'hermite(M)' or 'gaussian', default from GAUGEFORGE_MOLLIFIER
- [embed] generator (String): Embedding generator b in eps, default pow(eps, -1)
- [embed] distributions (List): 'delta', 'heaviside', "delta'", 'smooth(<expr in x>)'
- [embed] order (Integer): Highest moment checked, default 3
- [embed] compact (String): Compact of the checks, default [-1, 1]

Outputs:
- Records "moment k", "embed <T>", "heaviside at 0", diagram and linearity records
- outputs.mollifier: Moment report
"""

from __future__ import annotations
import os
import sys
from dataclasses import replace
from fractions import Fraction

# Add Lib to path
lib_path = os.path.join(os.path.dirname(__file__), '..', '..', 'Lib')
if lib_path not in sys.path:
    sys.path.insert(0, os.path.abspath(lib_path))

import mpmath

from cgf import parse_compact
from config import get_config
from embed import (
    EMBED_SCHEDULE,
    MOMENT_TOLERANCE,
    Heaviside,
    QuadSpec,
    check_embedding_diagrams,
    check_linearity_and_injectivity,
    check_mollifier,
    distribution_from_text,
    embed,
    mollifier_from_text,
)
from errors import UnsupportedDistributionError
from index import Verdict
from logger import get_logger
from netlang import parse, print_expr
from report import Report, RunConfig
from zoo import morphism_by_name


DEFAULT_DISTRIBUTIONS = ["delta", "heaviside", "smooth(pow(x, 2))", "smooth(pow(x, 4))"]


def run_command(run_config: RunConfig) -> Report:
    return CmdEmbed(run_config).execute()


class CmdEmbed:
    """Mollifier embedding and diagram checks"""

    def __init__(self, run_config: RunConfig):
        self.run_config = run_config
        self.logger = get_logger("CmdEmbed")
        self.config = get_config()
        # exponential generators overflow on the deep default schedule
        if run_config.sections.get("schedule"):
            self.sched = run_config.schedule
        else:
            self.sched = replace(EMBED_SCHEDULE, precision=run_config.precision)
        self.quad = QuadSpec(self.config.QUAD_TOL, self.config.QUAD_RADIUS)

    def execute(self) -> Report:
        self.logger.info("=" * 70)
        self.logger.info("COMMAND: EMBED")
        self.logger.info("=" * 70)

        report = Report(self.run_config)
        rho = mollifier_from_text(self.run_config.get("embed", "mollifier", self.config.MOLLIFIER))
        b = parse(self.run_config.get("embed", "generator", "pow(eps, -1)"), extended=True)
        samples = [distribution_from_text(t) for t in self.run_config.get("embed", "distributions", DEFAULT_DISTRIBUTIONS)]
        order = self.run_config.get("embed", "order", 3)
        compact = parse_compact(self.run_config.get("embed", "compact", "[-1, 1]"))
        self.logger.info(f"Mollifier {rho.name}, generator {print_expr(b)}, {len(samples)} distributions on {compact.label()}")
        report.outputs["schedule"] = self.sched.describe()

        self._check_mollifier(report, rho, order)
        self._embed_samples(report, samples, b, rho, compact)

        triangles = []
        if print_expr(b) == print_expr(parse("pow(eps, -1)")):
            triangles.append((morphism_by_name("square", self.sched), b))
        with report.timed() as clock:
            diagrams = check_embedding_diagrams(samples, b, rho, self.sched, self.quad, compact, triangles)
        for label, verdict in diagrams.checks:
            report.add(label, _anchor(label), verdict, clock["seconds"] / max(len(diagrams.checks), 1))

        with report.timed() as clock:
            algebra = check_linearity_and_injectivity(samples, b, rho, self.sched, compact)
        for label, verdict in algebra.checks:
            report.add(label, _anchor(label), verdict, clock["seconds"] / max(len(algebra.checks), 1))

        summary = report.summary()
        self.logger.info(f"Holds {summary['Holds']}, Fails {summary['Fails']}, Inconclusive {summary['Inconclusive']}")
        return report

    def _check_mollifier(self, report: Report, rho, order: int):
        with report.timed() as clock:
            moments = check_mollifier(rho, order, self.quad)
        for k, value, abserr in moments.moments:
            target = 1.0 if k == 0 else 0.0
            evidence = {"value": value, "abserr": abserr, "tolerance": MOMENT_TOLERANCE}
            verdict = Verdict.holds_(evidence) if abs(value - target) <= MOMENT_TOLERANCE else Verdict.fails_(evidence)
            name = "mass" if k == 0 else f"moment {k}"
            report.add(name, "Colombeau mollifier: unit mass, vanishing moments", verdict,
                       clock["seconds"] / len(moments.moments))
        report.outputs["mollifier"] = moments.to_dict()
        self.logger.info(f"  {rho.name}: verified order {moments.order}")

    def _embed_samples(self, report: Report, samples, b, rho, compact):
        max_order = self.config.MAX_ORDER
        for t in samples:
            name = f"embed {t.label()}"
            with report.timed() as clock:
                try:
                    rep = embed(t, b, rho, sched=self.sched, compacts=[compact], max_order=max_order, quad=self.quad)
                except UnsupportedDistributionError as e:
                    report.add(name, "embedding is moderate", Verdict.inconclusive_({"reason": str(e)}))
                    continue
            report.add(name, "embedding is moderate", rep.verdict, clock["seconds"], representative=rep.net.label())
            self.logger.info(f"  {name}: {rep.verdict.tag.value}")
            if isinstance(t, Heaviside):
                report.add("heaviside at 0", "even mollifier: embedded Heaviside equals 1/2 at 0",
                           _value_at_zero(rep, self.sched), representative=rep.net.label())


def _value_at_zero(rep, sched) -> Verdict:
    with mpmath.workdps(sched.precision):
        gaps = [abs(rep.net.value(eps, Fraction(0), sched.precision) - mpmath.mpf(1) / 2) for eps in sched.points()]
        worst = max(gaps)
    evidence = {"max_gap": worst, "tolerance": MOMENT_TOLERANCE}
    return Verdict.holds_(evidence) if worst <= MOMENT_TOLERANCE else Verdict.fails_(evidence)


def _anchor(label: str) -> str:
    kind = label.split("[", 1)[0]
    return {
        "derivation": "embedding commutes with derivatives",
        "reproduction": "smooth functions reproduced to the mollifier order",
        "triangle": "generator-preserving morphism triangle",
        "linearity": "embedding is linear",
        "zero": "embedding is linear",
        "injectivity": "embedding is injective",
    }.get(kind, "embedding diagrams")
