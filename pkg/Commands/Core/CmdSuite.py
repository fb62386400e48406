"""
Command: Suite

Run the whole acceptance battery and write one deterministic report.

Groups:
1. Gauge axioms for the zoo; the constant gauge breaks the infinite-net axiom
2. B_pol and B_exp are isomorphic but not equivalent
3. The exponential ODE: solve, classify, transform, transfer, RK4 cross-check
4. Interleaving of eps^-1 and exp(1/eps)
5. Hermite mollifier and the embedding diagrams
6. Functor laws of the functorial action on a zoo of representatives
7. Symbolic / sampled oracle consistency and preservation along morphisms
8. Byte-identical reports

Inputs:
- [schedule], [run] precision: Sampling schedule and working precision

Outputs:
- One record per check, anchored "acceptance <group>: ..."
"""

from __future__ import annotations
import os
import sys
from dataclasses import replace
from fractions import Fraction
from typing import List, Tuple

# Add Lib to path
lib_path = os.path.join(os.path.dirname(__file__), '..', '..', 'Lib')
if lib_path not in sys.path:
    sys.path.insert(0, os.path.abspath(lib_path))

import mpmath
import numpy as np

from cgf import (
    Compact,
    Interval,
    check_functor_composition,
    check_functor_identity,
    check_restriction_derivation,
    function_net,
    make_rep,
)
from embed import (
    EMBED_SCHEDULE,
    MOMENT_TOLERANCE,
    Delta,
    Heaviside,
    Smooth,
    check_embedding_diagrams,
    check_mollifier,
    embed_net,
    hermite_mollifier,
)
from gauge import gauges_equivalent, inclusion, interleave, isomorphic_via, pullback, verify_gauge_axioms, verify_interleaving
from index import (
    IS_S,
    Verdict,
    VerdictTag,
    all_of,
    check_oracle_consistency,
    compose_morphisms,
    preservation_suite,
    random_fragment_net,
    standard_cases,
)
from logger import get_logger
from netlang import Const, EPS, Pow, evaluate, normalize, parse, print_expr, to_mpf
from ode import classify, exponential_problem, log_problem, rk4_integrate, solve_closed_form, transfer_solution, transform
from report import Report, RunConfig
from zoo import MORPHISMS, b_exp, b_pol, gauge_by_name, gauge_morphism_by_name, morphism_by_name


CONSISTENCY_PAIRS = 500
CONSISTENCY_SEED = 7
IDENTITY_TOLERANCE = mpmath.mpf("1e-30")
RK4_TOLERANCE = 1e-6
EXPONENT_FLOOR = 3.75
LAW_GRID = 101

B_POL_REPS = ("x", "x / eps", "pow(eps, -2) * pow(x, 2)", "sin(x) / eps", "exp(x) * pow(eps, -1)")
B_EXP_REPS = ("exp(1/eps) * x", "exp(2/eps) * sin(x)")
# (first leg, second leg) applied to B_pol representatives
B_POL_CHAINS = (("eta", "lambda"), ("square", "sqrt"), ("identity", "square"), ("identity", "eta"))
# (h1, h2) space maps for the composition law
SPACE_MAPS = ("x / 2", "x + 1/4")


def expect(verdict: Verdict, expected: VerdictTag, **evidence) -> Verdict:
    """Holds when the observed verdict is the expected one"""
    data = dict(evidence, observed=verdict.tag.value, expected=expected.value, verdict=verdict)
    if verdict.tag is expected:
        return Verdict.holds_(data, source=verdict.source)
    return Verdict.fails_(data, source=verdict.source)


def run_command(run_config: RunConfig) -> Report:
    return CmdSuite(run_config).execute()


class CmdSuite:
    """Acceptance battery"""

    def __init__(self, run_config: RunConfig):
        self.run_config = run_config
        self.logger = get_logger("CmdSuite")
        self.sched = run_config.schedule
        self.embed_sched = replace(EMBED_SCHEDULE, precision=run_config.precision)

    def execute(self) -> Report:
        self.logger.info("=" * 70)
        self.logger.info("COMMAND: SUITE")
        self.logger.info("=" * 70)

        report = Report(self.run_config)
        groups = [
            ("1", "gauge axioms", self._gauge_axioms),
            ("2", "isomorphic but not equivalent", self._isomorphism),
            ("3", "ODE transfer", self._ode),
            ("4", "interleaving", self._interleaving),
            ("5", "embedding", self._embedding),
            ("6", "functor laws", self._functor_laws),
            ("7", "oracle consistency", self._consistency),
            ("8", "determinism", self._determinism),
        ]
        for number, title, runner in groups:
            self.logger.info(f"[{number}/8] {title}")
            anchor = f"acceptance {number}: {title}"
            with report.timed() as clock:
                checks = runner()
            for name, verdict in checks:
                report.add(name, anchor, verdict, clock["seconds"] / max(len(checks), 1))
                self.logger.info(f"  {name}: {verdict.tag.value}")

        summary = report.summary()
        self.logger.info(f"Holds {summary['Holds']}, Fails {summary['Fails']}, Inconclusive {summary['Inconclusive']}")
        return report

    # ------------------------------------------------------------------

    def _gauge_axioms(self) -> List[Tuple[str, Verdict]]:
        checks = []
        for name in ("B_pol", "B_exp", "B^s", "nbar"):
            axioms = verify_gauge_axioms(gauge_by_name(name), self.sched)
            checks.append((f"axioms {name}", all_of(list(axioms.verdicts.values()))))
        degenerate = verify_gauge_axioms(gauge_by_name("const1"), self.sched)
        checks.append(("const1 breaks axiom (ii)", expect(degenerate.verdicts["ii"], VerdictTag.FAILS)))
        return checks

    def _isomorphism(self) -> List[Tuple[str, Verdict]]:
        lam = morphism_by_name("lambda", self.sched)
        eta = morphism_by_name("eta", self.sched)
        pulled = pullback(b_exp(), lam)
        expected = [normalize(Pow(EPS, Const(-n))) for n in range(1, 7)]
        got = [normalize(g) for g in pulled.generators()]
        structural = {"generators": [print_expr(g) for g in got], "expected": [print_expr(e) for e in expected]}
        checks = [("pullback of B_exp along lambda",
                   Verdict.holds_(structural, source="symbolic") if got == expected
                   else Verdict.fails_(structural, source="symbolic"))]

        for f, g in ((eta, lam), (lam, eta)):
            composite = compose_morphisms(f, g, self.sched)
            checks.append((f"{composite.label()} is the identity", self._identity_on_schedule(composite)))

        not_equivalent = gauges_equivalent(b_pol(), b_exp(), self.sched)
        witness = inclusion(b_exp(), b_pol(), self.sched).evidence.get("witness")
        expected_witness = print_expr(normalize(parse("exp(1/eps)")))
        verdict = expect(not_equivalent, VerdictTag.FAILS, witness=witness, expected_witness=expected_witness)
        if verdict.holds and witness != expected_witness:
            verdict = Verdict.fails_(dict(verdict.evidence, reason="unexpected witness"))
        checks.append(("B_pol and B_exp not equivalent", verdict))
        checks.append(("B_pol and B_exp isomorphic", isomorphic_via(eta, lam, b_pol(), b_exp(), self.sched)))
        return checks

    def _identity_on_schedule(self, m) -> Verdict:
        worst = mpmath.mpf(0)
        with mpmath.workdps(self.sched.precision):
            for p in self.sched.points():
                worst = max(worst, abs(m(p, self.sched.precision) - to_mpf(p)) / to_mpf(p))
        evidence = {"max_relative_gap": worst, "tolerance": IDENTITY_TOLERANCE}
        return Verdict.holds_(evidence) if worst <= IDENTITY_TOLERANCE else Verdict.fails_(evidence)

    def _same_function(self, a, b, variable: str) -> Verdict:
        """Two expressions in eps and `variable` agree on schedule x [0, 1]"""
        if normalize(a) == normalize(b):
            return Verdict.holds_({"expression": print_expr(a)}, source="symbolic")
        worst = mpmath.mpf(0)
        tol = mpmath.mpf(10) ** (-(self.sched.precision - 15))
        with mpmath.workdps(self.sched.precision):
            for eps in self.sched.points():
                for v in Compact(0, 1).grid(11):
                    left = evaluate(a, {"eps": eps, variable: v}, self.sched.precision)
                    right = evaluate(b, {"eps": eps, variable: v}, self.sched.precision)
                    worst = max(worst, abs(left - right) / (1 + abs(right)))
        evidence = {"left": print_expr(a), "right": print_expr(b), "max_relative_gap": worst}
        return Verdict.holds_(evidence) if worst <= tol else Verdict.fails_(evidence)

    def _ode(self) -> List[Tuple[str, Verdict]]:
        problem = exponential_problem()
        compact = Compact(0, 1)
        solution = solve_closed_form(problem)
        checks = [("solution is exp(t/eps)",
                   self._same_function(solution.expr, parse("exp(t / eps)", variables=("eps", "t")), "t"))]
        checks.append(("solution not moderate in B_pol",
                       expect(classify(solution, b_pol(), compact, self.sched), VerdictTag.FAILS)))
        checks.append(("solution moderate in B_exp",
                       expect(classify(solution, b_exp(), compact, self.sched), VerdictTag.HOLDS)))

        lam = morphism_by_name("lambda", self.sched)
        transformed = transform(problem, lam)
        target = log_problem()
        same = (normalize(transformed.coefficient()) == normalize(target.coefficient())
                and normalize(transformed.x0) == normalize(target.x0)
                and normalize(transformed.t0) == normalize(target.t0))
        evidence = {"transformed": transformed.to_dict(), "expected": target.to_dict()}
        checks.append(("transformed problem", Verdict.holds_(evidence, source="symbolic") if same
                       else Verdict.fails_(evidence, source="symbolic")))

        transferred, verdicts = transfer_solution(solution, gauge_morphism_by_name("lambda", self.sched),
                                                  self.sched, compact)
        checks.append(("transferred solution is eps^-t",
                       self._same_function(transferred.expr, parse("pow(eps, -t)", variables=("eps", "t")), "t")))
        checks.append(("transferred solution moderate in B_pol", verdicts["target"]))

        trajectory = rk4_integrate(target, Fraction(1, 10), 1.0)
        value = trajectory.value_at(1.0)
        evidence = {"value": value, "expected": 10.0, "tolerance": RK4_TOLERANCE}
        checks.append(("RK4 at eps = 0.1, t = 1", Verdict.holds_(evidence) if abs(value - 10.0) <= RK4_TOLERANCE
                       else Verdict.fails_(evidence)))
        return checks

    def _interleaving(self) -> List[Tuple[str, Verdict]]:
        b1, b2 = parse("pow(eps, -1)"), parse("exp(1/eps)")
        hybrid, witnesses = interleave(b1, b2, 6, self.sched)
        table = [w.to_dict() for w in witnesses]
        checks = [("witness inequalities", Verdict.holds_({"witnesses": table}, source="interval")
                   if all(w.verified for w in witnesses) else Verdict.fails_({"witnesses": table}))]
        first = witnesses[0]
        evidence = {"n": first.n, "eps_bar": first.eps_bar}
        checks.append(("first switching point is 1/10",
                       Verdict.holds_(evidence, source="interval") if (first.n, first.eps_bar) == (2, Fraction(1, 10))
                       else Verdict.fails_(evidence)))
        strict = verify_interleaving(hybrid, witnesses, self.sched)
        for label, verdict in strict.evidence.get("strictness", {}).items():
            checks.append((label, expect(verdict, VerdictTag.FAILS, net=label)))
        checks.append(("strict interleaving", strict))
        return checks

    def _embedding(self) -> List[Tuple[str, Verdict]]:
        rho = hermite_mollifier(3)
        b = parse("pow(eps, -1)")
        moments = check_mollifier(rho, 3)
        worst = max(abs(value - (1.0 if k == 0 else 0.0)) for k, value, _ in moments.moments)
        evidence = {"moments": moments.to_dict(), "worst": worst}
        checks = [("hermite(3) moments", Verdict.holds_(evidence) if worst <= MOMENT_TOLERANCE
                   else Verdict.fails_(evidence))]

        x = ("x",)
        smooth = [Smooth(parse(t, variables=x)) for t in ("1", "x", "pow(x, 2)", "pow(x, 3)", "pow(x, 4)")]
        diagrams = check_embedding_diagrams(smooth + [Delta(), Heaviside()], b, rho, self.embed_sched)
        for label, verdict in diagrams.checks:
            if label.startswith("reproduction") and "pow(x, 4)" in label:
                exponent = verdict.evidence.get("fitted_exponent")
                evidence = {"fitted_exponent": exponent, "floor": EXPONENT_FLOOR}
                ok = exponent is not None and exponent >= EXPONENT_FLOOR
                checks.append(("x^4 convergence exponent", Verdict.holds_(evidence) if ok else Verdict.fails_(evidence)))
            checks.append((label, verdict))

        heaviside = embed_net(Heaviside(), b, rho)
        with mpmath.workdps(self.embed_sched.precision):
            gap = max(abs(heaviside.value(eps, Fraction(0), self.embed_sched.precision) - mpmath.mpf(1) / 2)
                      for eps in self.embed_sched.points())
        evidence = {"max_gap": gap, "tolerance": MOMENT_TOLERANCE}
        checks.append(("heaviside at 0", Verdict.holds_(evidence) if gap <= MOMENT_TOLERANCE
                       else Verdict.fails_(evidence)))
        return checks

    def _functor_laws(self) -> List[Tuple[str, Verdict]]:
        compact = Compact(-1, 1)
        pol, exp_gauge = b_pol(), b_exp()

        def rep(text, gauge):
            return make_rep(function_net(text), gauge, gauge, [compact], self.sched, max_order=1, grid=LAW_GRID)

        pol_reps = [rep(t, pol) for t in B_POL_REPS]
        exp_reps = [rep(t, exp_gauge) for t in B_EXP_REPS]
        arrows = {name: gauge_morphism_by_name(name, self.sched) for name in ("identity", "eta", "lambda", "square", "sqrt")}
        h1, h2 = (parse(t, variables=("x",)) for t in SPACE_MAPS)

        identity, composition, derivation = [], [], []
        for u in pol_reps + exp_reps:
            identity.append(check_functor_identity(u, self.sched))
        for first, second in B_POL_CHAINS:
            for u in pol_reps:
                composition.append(check_functor_composition(arrows[first], arrows[second], u, self.sched))
                composition.append(check_functor_composition(arrows[first], arrows[second], u, self.sched, h1=h1, h2=h2))
        for u in exp_reps:
            composition.append(check_functor_composition(arrows["lambda"], arrows["eta"], u, self.sched))
        for u in pol_reps:
            derivation.append(check_restriction_derivation(u, Interval(Fraction(-2), Fraction(2)), self.sched))

        pairs = len(identity) + len(composition)
        return [
            ("identity law", all_of(identity, {"representatives": len(identity)})),
            ("composition law", all_of(composition, {"pairs": len(composition)})),
            ("restriction commutes with d/dx", all_of(derivation, {"representatives": len(derivation)})),
            ("zoo size", Verdict.holds_({"pairs": pairs}, source="symbolic") if pairs >= 20
             else Verdict.fails_({"pairs": pairs}, source="symbolic")),
        ]

    def _consistency(self) -> List[Tuple[str, Verdict]]:
        rng = np.random.default_rng(CONSISTENCY_SEED)
        pairs = [(random_fragment_net(rng), random_fragment_net(rng)) for _ in range(CONSISTENCY_PAIRS)]
        checks = [("symbolic vs sampled big-O", check_oracle_consistency(pairs, IS_S, self.sched))]

        cases = standard_cases(IS_S.variable)
        for name in ["identity"] + sorted(MORPHISMS):
            f = morphism_by_name(name, self.sched)
            if f.source is not IS_S or f.target is not IS_S:
                continue
            if not f.verified:
                checks.append((f"preservation along {name}",
                               Verdict.inconclusive_({"reason": "morphism not verified", "verdict": f.verdict})))
                continue
            parts = []
            for result in preservation_suite(f, cases, self.sched):
                if result.preserved:
                    parts.append(Verdict.holds_(result.to_dict(), source=result.transported.source))
                elif result.transported.fails:
                    parts.append(Verdict.fails_(result.to_dict(), source=result.transported.source))
                else:
                    parts.append(Verdict.inconclusive_(result.to_dict()))
            checks.append((f"preservation along {name}", all_of(parts)))
        return checks

    def _determinism(self) -> List[Tuple[str, Verdict]]:
        renders = []
        for _ in range(2):
            report = Report(replace(self.run_config, command="check-gauge", action=""))
            axioms = verify_gauge_axioms(gauge_by_name("B_pol"), self.sched)
            for key, verdict in axioms.verdicts.items():
                report.add(f"axiom {key}", "gauge axioms", verdict)
            renders.append(report.to_json())
        evidence = {"bytes": len(renders[0])}
        return [("byte-identical reports", Verdict.holds_(evidence, source="symbolic") if renders[0] == renders[1]
                 else Verdict.fails_(evidence, source="symbolic"))]
