"""
Command: ODE

Linear Cauchy problems with net data: solve them, move them along a morphism
of index sets, transfer solutions between algebras and classify solutions by
gauge.

Inputs:
- action (String): solve | transform | transfer | classify
- [ode] problem (String): Problem TOML file, or 'exponential' / 'logarithmic' (default exponential)
- [ode] solution (String): Closed-form solution JSON written by 'ode solve --out ...' (transfer, classify)
- [ode] method (String): closed-form-linear or rk4 (solve)
- [ode] step (Float): RK4 step
- [ode] morphism (String): Zoo morphism for transform / transfer, default lambda
- [ode] gauge (String): Gauge for classify, default B_pol
- [ode] compact (String): Time compact, default [0, 1]
- [ode] out (String): Where to write the solution (solve, transfer) or the transformed problem (transform)

Outputs:
- Records per action (initial time, residual, rk4 cross-check, moderateness)
- outputs.problem / outputs.solution
"""

from __future__ import annotations
import os
import sys
from pathlib import Path

# Add Lib to path
lib_path = os.path.join(os.path.dirname(__file__), '..', '..', 'Lib')
if lib_path not in sys.path:
    sys.path.insert(0, os.path.abspath(lib_path))

from cgf import parse_compact
from config import get_config
from errors import ConfigError, GaugeConditionError, PreconditionError
from index import Verdict
from logger import get_logger
from ode import (
    classify,
    compare_numeric,
    exponential_problem,
    load_problem,
    load_solution,
    log_problem,
    residual,
    rk4_solve,
    save_problem,
    save_solution,
    solve,
    transfer_solution,
    transform,
)
from report import Report, RunConfig
from zoo import gauge_by_name, gauge_morphism_by_name, morphism_by_name


ACTIONS = ("solve", "transform", "transfer", "classify")
BUILTIN_PROBLEMS = {"exponential": exponential_problem, "logarithmic": log_problem}
CROSS_CHECK_TIMES = (0.5, 1.0)


def run_command(run_config: RunConfig) -> Report:
    return CmdOde(run_config).execute()


class CmdOde:
    """ODE solve / transform / transfer / classify"""

    def __init__(self, run_config: RunConfig):
        if run_config.action not in ACTIONS:
            raise ConfigError(f"ode action must be one of {', '.join(ACTIONS)}, got '{run_config.action}'")
        self.run_config = run_config
        self.logger = get_logger("CmdOde")
        self.config = get_config()
        self.sched = run_config.schedule
        self.compact = parse_compact(run_config.get("ode", "compact", "[0, 1]"))

    def execute(self) -> Report:
        self.logger.info("=" * 70)
        self.logger.info(f"COMMAND: ODE {self.run_config.action.upper()}")
        self.logger.info("=" * 70)

        report = Report(self.run_config)
        getattr(self, f"_{self.run_config.action}")(report)
        return report

    # ------------------------------------------------------------------

    def _problem(self):
        source = self.run_config.get("ode", "problem", "exponential")
        if source in BUILTIN_PROBLEMS:
            return BUILTIN_PROBLEMS[source]()
        return load_problem(source)

    def _solution(self):
        path = self.run_config.get("ode", "solution")
        if path:
            return load_solution(path)
        return solve(self._problem(), self.sched)

    def _write(self, writer, item) -> None:
        out = self.run_config.get("ode", "out")
        if out:
            path = writer(item, Path(out))
            self.logger.info(f"Wrote {path}")

    def _solve(self, report: Report):
        problem = self._problem()
        method = self.run_config.get("ode", "method", "closed-form-linear")
        step = float(self.run_config.get("ode", "step", 1e-3))
        report.add("initial time", "t0 lies in the time interval", problem.check_initial_time(self.sched))

        with report.timed() as clock:
            solution = solve(problem, self.sched, method, step=step)
        self.logger.info(f"Solution ({method}): {solution.label()}")
        compact = self.compact if solution.kind == "closed" else None
        report.add("residual", "solution satisfies the equation", residual(solution, self.sched, compact),
                   clock["seconds"])

        if solution.kind == "closed":
            with report.timed() as clock:
                numeric = rk4_solve(problem, self.sched, max(CROSS_CHECK_TIMES), step)
            if numeric.trajectories:
                verdict = compare_numeric(solution, numeric, CROSS_CHECK_TIMES)
            else:
                verdict = Verdict.inconclusive_({"reason": "every trajectory blew up", "blowups": numeric.to_dict().get("blowups", {})})
            report.add("rk4 cross-check", "closed form agrees with RK4", verdict, clock["seconds"])
        elif solution.blowups:
            report.add("blow-up", "RK4 trajectories stay finite", Verdict.fails_({"blowups": solution.to_dict()["blowups"]}))

        report.outputs["problem"] = problem.to_dict()
        report.outputs["solution"] = solution.to_dict()
        self._write(save_solution, solution)

    def _transform(self, report: Report):
        problem = self._problem()
        f = morphism_by_name(self.run_config.get("ode", "morphism", "lambda"), self.sched)
        report.add("morphism", "morphism of index sets", f.verdict, map=f.label())
        if not f.verified:
            return
        transformed = transform(problem, f)
        self.logger.info(f"Transformed along {f.label()}: x' = {transformed.to_dict()['rhs']}")
        report.add("initial time", "t0 lies in the time interval", transformed.check_initial_time(self.sched))
        report.outputs["problem"] = transformed.to_dict()
        self._write(save_problem, transformed)

    def _transfer(self, report: Report):
        solution = self._solution()
        name = self.run_config.get("ode", "morphism", "lambda")
        m = gauge_morphism_by_name(name, self.sched, param_range=self.config.GAUGE_PARAM_RANGE)
        anchor = "solutions transfer along gauge morphisms"
        with report.timed() as clock:
            try:
                transferred, verdicts = transfer_solution(solution, m, self.sched, self.compact)
            except (PreconditionError, GaugeConditionError) as e:
                report.add("transfer", anchor, Verdict.fails_({"reason": str(e)}))
                return
        for key, verdict in verdicts.items():
            label = {"residual": "residual", "source": f"moderate in {m.source.name}",
                     "target": f"moderate in {m.target.name}"}[key]
            report.add(label, anchor, verdict, clock["seconds"] / len(verdicts))
        self.logger.info(f"Transferred along {m.morphism.label()}: {transferred.label()}")
        report.outputs["problem"] = transferred.problem.to_dict()
        report.outputs["solution"] = transferred.to_dict()
        self._write(save_solution, transferred)

    def _classify(self, report: Report):
        solution = self._solution()
        gauge = gauge_by_name(self.run_config.get("ode", "gauge", "B_pol"), self.config.GAUGE_PARAM_RANGE)
        with report.timed() as clock:
            verdict = classify(solution, gauge, self.compact, self.sched)
        report.add(f"moderate in {gauge.name}", "solution classified by gauge", verdict, clock["seconds"],
                   solution=solution.label(), compact=self.compact.label())
        report.outputs["solution"] = solution.to_dict()
