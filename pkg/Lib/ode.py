"""
Generalized Cauchy Problems

x'(t) = F_eps(x, t), x(t0_eps) = x0_eps with net coefficients: closed-form
solving of linear problems, per-eps RK4 integration with a Richardson error
estimate, gauge classification of solution nets and transfer of problems
and solutions along gauge morphisms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

import mpmath
import numpy as np

from cgf import DEFAULT_GRID, Compact, FunctionNet, Interval, is_moderate_fn
from config import load_toml
from errors import (
    BlowUpError,
    ConfigError,
    GaugeConditionError,
    NetDomainError,
    NotDifferentiableError,
    PreconditionError,
    UnverifiedMorphismError,
)
from gauge import Gauge, GaugeMorphism
from index import IndexMorphism, Verdict, format_number
from logger import get_logger
from netlang import (
    X,
    ZERO,
    Binary,
    Const,
    NetExpr,
    SamplingSchedule,
    Unary,
    Var,
    depends_on,
    differentiate,
    evaluate,
    free_vars,
    normalize,
    parse,
    print_expr,
    simplify,
    substitute_vars,
)


logger = get_logger("ode")

DEFAULT_STEP = 1e-3
STEP_SAFETY = 0.01
NUMERIC_EPS_FLOOR = Fraction(1, 100)
BLOW_UP_THRESHOLD = 1e250
RESIDUAL_FLOOR = 1e-12

# Classical RK4 tableau
RK4_A = np.array([
    [0.0, 0.0, 0.0, 0.0],
    [0.5, 0.0, 0.0, 0.0],
    [0.0, 0.5, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
])
RK4_B = np.array([1.0, 2.0, 2.0, 1.0]) / 6.0
RK4_C = np.array([0.0, 0.5, 0.5, 1.0])


# ---------------------------------------------------------------------------
# Problems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OdeProblem:
    """
    Cauchy problem with net data

    rhs is an expression in eps, x and t; t0 and x0 are nets in eps; the
    time interval is (t1, t2), None standing for an infinite end.
    """
    rhs: NetExpr
    t0: NetExpr
    x0: NetExpr
    t1: Optional[Fraction] = Fraction(-1)
    t2: Optional[Fraction] = Fraction(2)
    name: str = ""

    def __post_init__(self):
        if not free_vars(self.rhs) <= {"eps", "x", "t"}:
            raise PreconditionError(f"right-hand side {print_expr(self.rhs)} may only use eps, x and t")
        for label, net in (("t0", self.t0), ("x0", self.x0)):
            if not free_vars(net) <= {"eps"}:
                raise PreconditionError(f"{label} = {print_expr(net)} must be a net in eps")
        if self.t1 is not None and self.t2 is not None and self.t1 >= self.t2:
            raise PreconditionError(f"empty time interval ({self.t1}, {self.t2})")

    @property
    def interval(self) -> Interval:
        return Interval(self.t1, self.t2)

    def coefficient(self) -> Optional[NetExpr]:
        """a(eps) when F = a(eps) * x with a independent of x and t, else None"""
        try:
            a = differentiate(self.rhs, "x")
        except NotDifferentiableError:
            return None
        if depends_on(a, "x") or depends_on(a, "t"):
            return None
        if simplify(Binary("sub", self.rhs, Binary("mul", a, X))) == ZERO:
            return a
        for eps in (Fraction(1, 2), Fraction(1, 3)):
            for x in (Fraction(1), Fraction(-2)):
                for t in (Fraction(0), Fraction(1, 2)):
                    try:
                        lhs = evaluate(self.rhs, {"eps": eps, "x": x, "t": t}, 30)
                        rhs = evaluate(Binary("mul", a, X), {"eps": eps, "x": x}, 30)
                    except NetDomainError:
                        return None
                    if abs(lhs - rhs) > mpmath.mpf(10) ** -20 * (1 + abs(lhs)):
                        return None
        return a

    def check_initial_time(self, sched: SamplingSchedule) -> Verdict:
        """t0(eps) lies in (t1, t2) at every schedule point"""
        outside = []
        for eps in sched.points():
            value = evaluate(self.t0, {"eps": eps}, sched.precision)
            if not self.interval.contains(value):
                outside.append({"eps": eps, "t0": value})
        if outside:
            return Verdict.fails_({"outside": outside})
        return Verdict.holds_({"points": sched.count})

    def to_dict(self) -> Dict[str, str]:
        data = {
            "rhs": print_expr(self.rhs),
            "t0": print_expr(self.t0),
            "x0": print_expr(self.x0),
            "t1": "-inf" if self.t1 is None else _format_rational(self.t1),
            "t2": "inf" if self.t2 is None else _format_rational(self.t2),
        }
        if self.name:
            data["name"] = self.name
        return data

    def to_toml(self) -> str:
        return "".join(f"{key} = {json.dumps(value)}\n" for key, value in self.to_dict().items())


def _format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _rational(value: Any, key: str) -> Optional[Fraction]:
    if isinstance(value, str) and value.strip() in ("inf", "+inf", "-inf"):
        return None
    try:
        return Fraction(str(value))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"'{key}' must be a rational number, got {value!r}")


PROBLEM_KEYS = ("rhs", "t0", "x0", "t1", "t2", "name")


def problem_from_mapping(data: Dict[str, Any]) -> OdeProblem:
    """
    Build a problem from parsed TOML

    Raises:
        ConfigError: Unknown or missing keys, wrongly-typed values
    """
    unknown = set(data) - set(PROBLEM_KEYS)
    if unknown:
        raise ConfigError(f"unknown problem keys: {', '.join(sorted(unknown))}")
    for key in ("rhs", "x0"):
        if key not in data:
            raise ConfigError(f"problem is missing '{key}'")
    for key in ("rhs", "t0", "x0", "name"):
        if key in data and not isinstance(data[key], (str, int)):
            raise ConfigError(f"'{key}' must be a string")
    rhs = parse(str(data["rhs"]), variables=("eps", "x", "t"), extended=True)
    t0 = parse(str(data.get("t0", "0")), variables=("eps",), extended=True)
    x0 = parse(str(data["x0"]), variables=("eps",), extended=True)
    t1 = _rational(data.get("t1", "-1"), "t1")
    t2 = _rational(data.get("t2", "2"), "t2")
    return OdeProblem(rhs, t0, x0, t1, t2, str(data.get("name", "")))


def load_problem(path) -> OdeProblem:
    return problem_from_mapping(load_toml(path))


def save_problem(problem: OdeProblem, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(problem.to_toml(), encoding="utf-8")
    return path


def exponential_problem() -> OdeProblem:
    """x' = x/eps, x(0) = 1"""
    return OdeProblem(parse("x / eps", variables=("eps", "x", "t")), Const(0), Const(1), name="exponential")


def log_problem() -> OdeProblem:
    """x' = (-log eps) x, x(0) = 1"""
    return OdeProblem(parse("-log(eps) * x", variables=("eps", "x", "t")), Const(0), Const(1), name="logarithmic")


# ---------------------------------------------------------------------------
# Solutions
# ---------------------------------------------------------------------------

@dataclass
class Trajectory:
    eps: Fraction
    times: np.ndarray
    values: np.ndarray
    errors: np.ndarray
    step: float

    def value_at(self, t: float) -> float:
        return float(np.interp(t, self.times, self.values))


@dataclass
class SolutionNet:
    """Closed form in (eps, t), or per-eps RK4 trajectories"""
    problem: OdeProblem
    kind: str
    expr: Optional[NetExpr] = None
    trajectories: Dict[Fraction, Trajectory] = field(default_factory=dict)
    blowups: Dict[Fraction, float] = field(default_factory=dict)

    def value(self, eps, t, precision: int = 50):
        if self.kind == "closed":
            return evaluate(self.expr, {"eps": eps, "t": t}, precision)
        trajectory = self.trajectories.get(Fraction(eps))
        if trajectory is None:
            raise PreconditionError(f"no trajectory for eps = {format_number(eps)}")
        return mpmath.mpf(trajectory.value_at(float(t)))

    def as_function_net(self) -> FunctionNet:
        """The closed form with t renamed to x, over the problem's time interval"""
        if self.kind != "closed":
            raise PreconditionError("only closed-form solutions are function nets")
        return FunctionNet(substitute_vars(self.expr, {"t": X}), self.problem.interval)

    def label(self) -> str:
        if self.kind == "closed":
            return print_expr(self.expr)
        return f"rk4({len(self.trajectories)} trajectories)"

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"problem": self.problem.to_dict(), "kind": self.kind}
        if self.kind == "closed":
            data["solution"] = print_expr(self.expr)
        else:
            data["trajectories"] = {
                format_number(eps): {
                    "step": format_number(tr.step),
                    "t_end": format_number(float(tr.times[-1])),
                    "x_end": format_number(float(tr.values[-1])),
                    "max_error_estimate": format_number(float(np.max(tr.errors))),
                }
                for eps, tr in sorted(self.trajectories.items(), reverse=True)
            }
        if self.blowups:
            data["blowups"] = {format_number(eps): format_number(t) for eps, t in sorted(self.blowups.items(), reverse=True)}
        return data


def save_solution(solution: SolutionNet, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(solution.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def load_solution(path) -> SolutionNet:
    """
    Read a closed-form solution written by save_solution

    Raises:
        ConfigError: Missing file, invalid JSON or a numeric solution
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"solution file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON in {path}: {e}")
    if data.get("kind") != "closed" or "solution" not in data or "problem" not in data:
        raise ConfigError(f"{path} does not hold a closed-form solution")
    problem = problem_from_mapping(data["problem"])
    expr = parse(data["solution"], variables=("eps", "t"), extended=True)
    return SolutionNet(problem, "closed", expr)


def solve_closed_form(problem: OdeProblem) -> SolutionNet:
    """
    x0 * exp(a (t - t0)) for F = a(eps) x

    Raises:
        PreconditionError: The right-hand side is not linear with a constant-in-t coefficient
    """
    a = problem.coefficient()
    if a is None:
        raise PreconditionError(f"{print_expr(problem.rhs)} is not of the form a(eps) * x")
    exponent = Binary("mul", a, Binary("sub", Var("t"), problem.t0))
    expr = simplify(Binary("mul", problem.x0, Unary("exp", exponent)))
    logger.debug(f"closed form for {print_expr(problem.rhs)}: {print_expr(expr)}")
    return SolutionNet(problem, "closed", expr)


def _rhs_function(problem: OdeProblem, eps: Fraction):
    def fun(t: float, y: float) -> float:
        # an overflowed stage propagates as nan and is reported as a blow-up
        if not np.isfinite(y):
            return float("nan")
        return float(evaluate(problem.rhs, {"eps": eps, "x": y, "t": t}, 30))
    return fun


def rk_step(fun, t: float, y: float, h: float) -> float:
    """One explicit Runge-Kutta step with the RK4 tableau"""
    k = np.zeros(len(RK4_C))
    for s, (a, c) in enumerate(zip(RK4_A, RK4_C)):
        k[s] = fun(t + c * h, y + h * float(k[:s] @ a[:s]))
    return y + h * float(k @ RK4_B)


def _lipschitz_estimate(problem: OdeProblem, eps: Fraction, x0: float, t0: float) -> float:
    try:
        dfdx = differentiate(problem.rhs, "x")
        return abs(float(evaluate(dfdx, {"eps": eps, "x": x0, "t": t0}, 30)))
    except (NotDifferentiableError, NetDomainError):
        logger.warning(f"no Lipschitz estimate for {print_expr(problem.rhs)} at eps = {format_number(eps)}")
        return 0.0


def rk4_integrate(problem: OdeProblem, eps: Fraction, t_end: float, step: float = DEFAULT_STEP) -> Trajectory:
    """
    Fixed-step RK4 from t0(eps) to t_end, with the Richardson estimate
    |y_h - y_{h/2}| / 15 at every step of the coarse grid

    Raises:
        BlowUpError: The solution leaves every finite bound before t_end
    """
    t0 = float(evaluate(problem.t0, {"eps": eps}, 30))
    x0 = float(evaluate(problem.x0, {"eps": eps}, 30))
    lipschitz = _lipschitz_estimate(problem, eps, x0, t0)
    h = min(step, STEP_SAFETY / lipschitz) if lipschitz > 0 else step
    steps = max(int(np.ceil((t_end - t0) / h)), 1)
    h = (t_end - t0) / steps
    fun = _rhs_function(problem, eps)

    times = t0 + h * np.arange(steps + 1)
    coarse = np.empty(steps + 1)
    fine = np.empty(steps + 1)
    coarse[0] = fine[0] = x0
    y, z = x0, x0
    for n in range(steps):
        t = times[n]
        y = rk_step(fun, t, y, h)
        z = rk_step(fun, t + h / 2, rk_step(fun, t, z, h / 2), h / 2)
        if not (np.isfinite(y) and np.isfinite(z)) or abs(z) > BLOW_UP_THRESHOLD:
            raise BlowUpError(eps, float(times[n + 1]))
        coarse[n + 1], fine[n + 1] = y, z
    errors = np.abs(coarse - fine) / 15.0
    return Trajectory(eps, times, fine, errors, h)


def rk4_solve(problem: OdeProblem, sched: SamplingSchedule, t_end: Optional[float] = None,
              step: float = DEFAULT_STEP) -> SolutionNet:
    """Per-eps integration on the schedule points eps >= 1/100; blow-ups are recorded per eps"""
    if t_end is None:
        t_end = float(problem.t2) if problem.t2 is not None else 1.0
        t_end = min(t_end, 1.0)
    solution = SolutionNet(problem, "numeric")
    for eps in sched.points():
        if eps < NUMERIC_EPS_FLOOR:
            continue
        try:
            solution.trajectories[eps] = rk4_integrate(problem, eps, t_end, step)
        except BlowUpError as e:
            logger.warning(str(e))
            solution.blowups[eps] = e.time
    if not solution.trajectories and not solution.blowups:
        raise PreconditionError(f"no schedule point with eps >= {NUMERIC_EPS_FLOOR} for the numeric path")
    return solution


def solve(problem: OdeProblem, sched: SamplingSchedule, method: str = "closed-form-linear",
          t_end: Optional[float] = None, step: float = DEFAULT_STEP) -> SolutionNet:
    if method == "closed-form-linear":
        return solve_closed_form(problem)
    if method == "rk4":
        return rk4_solve(problem, sched, t_end, step)
    raise PreconditionError(f"unknown method '{method}' (closed-form-linear or rk4)")


def residual(solution: SolutionNet, sched: SamplingSchedule, compact: Optional[Compact] = None) -> Verdict:
    """
    max |x' - F(x, t)| over collocation points plus the initial condition

    Closed forms are differentiated symbolically; trajectories with a
    five-point stencil, against ten times the Richardson estimate per step.
    """
    problem = solution.problem
    if solution.kind == "closed":
        return _closed_residual(solution, problem, sched, compact or Compact(0, 1))
    return _numeric_residual(solution, problem)


def _closed_residual(solution: SolutionNet, problem: OdeProblem, sched: SamplingSchedule, compact: Compact) -> Verdict:
    derivative = differentiate(solution.expr, "t")
    tol = mpmath.mpf(10) ** (-(sched.precision - 15))
    worst = mpmath.mpf(0)
    witness = None
    with mpmath.workdps(sched.precision):
        for eps in sched.points():
            t0 = evaluate(problem.t0, {"eps": eps}, sched.precision)
            x0 = evaluate(problem.x0, {"eps": eps}, sched.precision)
            start = evaluate(solution.expr, {"eps": eps, "t": t0}, sched.precision)
            gap = abs(start - x0) / (1 + abs(x0))
            if gap > worst:
                worst, witness = gap, {"eps": eps, "t": "t0"}
            for t in compact.grid(11):
                x = evaluate(solution.expr, {"eps": eps, "t": t}, sched.precision)
                dx = evaluate(derivative, {"eps": eps, "t": t}, sched.precision)
                f = evaluate(problem.rhs, {"eps": eps, "x": x, "t": t}, sched.precision)
                gap = abs(dx - f) / (1 + abs(f))
                if gap > worst:
                    worst, witness = gap, {"eps": eps, "t": t}
    evidence = {"max_relative_residual": worst, "tolerance": tol}
    if worst <= tol:
        return Verdict.holds_(evidence, source="symbolic")
    evidence["witness"] = witness
    return Verdict.fails_(evidence, source="symbolic")


def _numeric_residual(solution: SolutionNet, problem: OdeProblem) -> Verdict:
    worst_ratio = 0.0
    evidence: Dict[str, Any] = {}
    for eps, tr in sorted(solution.trajectories.items(), reverse=True):
        v = tr.values
        if len(v) < 5:
            continue
        fun = _rhs_function(problem, eps)
        h = tr.step
        stencil = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * h)
        f = np.array([fun(float(t), float(x)) for t, x in zip(tr.times[2:-2], v[2:-2])])
        defect = np.abs(stencil - f)
        # local error of a step is about 16 times the growth of |y_h - y_{h/2}| / 15
        local = 16 * np.lib.stride_tricks.sliding_window_view(np.abs(np.diff(tr.errors)), 4).max(axis=1)
        bound = 10 * local / h + RESIDUAL_FLOOR * (1 + np.abs(f))
        ratio = float(np.max(defect / bound))
        worst_ratio = max(worst_ratio, ratio)
        evidence[format_number(eps)] = {"max_defect": float(np.max(defect)), "max_bound": float(np.max(bound))}
    evidence["worst_ratio"] = worst_ratio
    if worst_ratio <= 1.0:
        return Verdict.holds_(evidence)
    return Verdict.fails_(evidence)


def compare_numeric(closed: SolutionNet, numeric: SolutionNet, times: Sequence[float]) -> Verdict:
    """Relative agreement of the closed form and the trajectories at the given times"""
    worst = 0.0
    for eps, tr in numeric.trajectories.items():
        for t in times:
            exact = float(closed.value(eps, Fraction(t).limit_denominator(10 ** 9), 30))
            gap = abs(tr.value_at(t) - exact) / max(abs(exact), 1e-300)
            worst = max(worst, gap)
    evidence = {"max_relative_error": worst, "tolerance": 1e-6}
    return Verdict.holds_(evidence) if worst <= 1e-6 else Verdict.fails_(evidence)


# ---------------------------------------------------------------------------
# Classification and transfer
# ---------------------------------------------------------------------------

def classify(solution: SolutionNet, gauge: Gauge, compact: Compact, sched: SamplingSchedule,
             max_order: int = 1, grid: int = DEFAULT_GRID) -> Verdict:
    """Moderateness of the solution net over K (t-derivatives up to max_order)"""
    if not solution.problem.interval.contains_compact(compact):
        raise PreconditionError(f"{compact.label()} is not inside {solution.problem.interval.label()}")
    if solution.kind != "closed":
        return Verdict.inconclusive_({"reason": f"numeric solutions only cover eps >= {NUMERIC_EPS_FLOOR}"})
    verdict = is_moderate_fn(solution.as_function_net(), gauge, [compact], sched, max_order, grid)
    logger.info(f"solution {solution.label()} in {gauge.name} on {compact.label()}: {verdict.tag.value}")
    return verdict


def _underlying(m) -> IndexMorphism:
    morphism = m.morphism if isinstance(m, GaugeMorphism) else m
    if not m.verified:
        raise UnverifiedMorphismError(f"morphism {morphism.label()} is not verified")
    return morphism


def _transport(e: NetExpr, morphism: IndexMorphism) -> NetExpr:
    return normalize(substitute_vars(e, {"eps": morphism.map}))


def transform(problem: OdeProblem, m) -> OdeProblem:
    """
    Substitute eps <- f(eps) in F, t0 and x0; same interval

    Raises:
        UnverifiedMorphismError: m is not verified
    """
    morphism = _underlying(m)
    if morphism.map == Var(morphism.target.variable):
        return problem
    name = f"{problem.name}@{morphism.label()}" if problem.name else morphism.label()
    return OdeProblem(_transport(problem.rhs, morphism), _transport(problem.t0, morphism),
                      _transport(problem.x0, morphism), problem.t1, problem.t2, name)


def transfer_solution(solution: SolutionNet, m, sched: SamplingSchedule,
                      compact: Optional[Compact] = None, grid: int = DEFAULT_GRID) -> Tuple[SolutionNet, Dict[str, Verdict]]:
    """
    y = [x_{f(eps)}]: the solution of the transformed problem

    With a compact and a gauge morphism the source classification must Hold
    and the target classification is checked as well.

    Raises:
        PreconditionError: Numeric solution, or the source classification does not Hold
        GaugeConditionError: The transferred solution Fails classification in the target gauge
    """
    morphism = _underlying(m)
    if solution.kind != "closed":
        raise PreconditionError("only closed-form solutions can be transferred")
    target_problem = transform(solution.problem, m)
    if morphism.map == Var(morphism.target.variable):
        transferred = SolutionNet(target_problem, "closed", solution.expr)
    else:
        transferred = SolutionNet(target_problem, "closed", _transport(solution.expr, morphism))

    verdicts: Dict[str, Verdict] = {"residual": residual(transferred, sched, compact or Compact(0, 1))}
    if compact is not None and isinstance(m, GaugeMorphism):
        source = classify(solution, m.source, compact, sched, grid=grid)
        if not source.holds:
            raise PreconditionError(f"solution is not moderate in {m.source.name} ({source.tag.value})")
        target = classify(transferred, m.target, compact, sched, grid=grid)
        if target.fails:
            raise GaugeConditionError(f"transferred solution {transferred.label()} is not moderate in {m.target.name}")
        verdicts["source"] = source
        verdicts["target"] = target
    return transferred, verdicts
