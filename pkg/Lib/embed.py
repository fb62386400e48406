"""
Mollifier Embeddings of Distributions

Finite-order Hermite-Gaussian mollifiers, the scaling operation r (.) rho,
embeddings i_b^rho of a small set of test distributions into AG-algebras
(closed forms where available, adaptive quadrature otherwise) and the
diagram checks that relate the embeddings to derivatives, smooth functions
and generator-preserving morphisms.

Scaling convention: the embedding convolves with (1/b_eps) (.) rho, i.e.
x -> b_eps * rho(b_eps * x), which concentrates as b_eps grows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Any, Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from numpy.polynomial import hermite
from scipy import integrate

from cgf import (
    CombinedNet,
    Compact,
    FunctionNet,
    GenFuncRep,
    Interval,
    REAL_LINE,
    SupNet,
    functor_action,
    gf_equal,
    make_rep,
    sup_net,
)
from errors import (
    ConfigError,
    InclusionFailure,
    NetDomainError,
    NotDifferentiableError,
    PreconditionError,
    QuadratureError,
    UnsupportedDistributionError,
)
from gauge import Gauge, GaugeMorphism, check_ag_morphism, principal
from index import IS_S, IndexMorphism, Verdict, all_of, big_o, format_number, limit
from logger import get_logger
from netlang import (
    ONE,
    PI,
    X,
    ZERO,
    Binary,
    Const,
    NetExpr,
    Pow,
    SamplingSchedule,
    Unary,
    derivative,
    differentiate,
    evaluate,
    free_vars,
    normalize,
    parse,
    print_expr,
    simplify,
    substitute,
    substitute_vars,
)


logger = get_logger("embed")

DEFAULT_QUAD_TOL = 1e-10
DEFAULT_QUAD_RADIUS = 12.0
MOMENT_TOLERANCE = 1e-8
MAX_POLY_DEGREE = 16
EMBED_GRID = 201
EXPONENT_SLACK = 0.25

# Moderateness and diagram checks run on a shallower schedule than the gauge
# oracles: mollified deltas with exponential generators are evaluated at
# b_eps * x, whose square enters an exponential.
EMBED_SCHEDULE = SamplingSchedule(start=Fraction(1, 10), ratio=Fraction(1, 10), count=9, precision=50)


# ---------------------------------------------------------------------------
# Mollifiers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadSpec:
    """Adaptive quadrature over [-radius, radius]"""
    tol: float = DEFAULT_QUAD_TOL
    radius: float = DEFAULT_QUAD_RADIUS

    def to_dict(self) -> Dict[str, str]:
        return {"tol": format_number(self.tol), "radius": format_number(self.radius)}


@dataclass(frozen=True)
class Mollifier:
    """
    rho(x) as an expression in x.

    Hermite-Gaussian mollifiers also carry the power coefficients of their
    polynomial factor p, rho = p(x) * pi^(-1/2) * exp(-x^2), so that moments
    and the Heaviside primitive have exact closed forms.
    """
    name: str
    expr: NetExpr
    poly: Optional[Tuple[Fraction, ...]] = None
    hermite_terms: Optional[int] = None
    decay: str = "gaussian"

    def __post_init__(self):
        if not free_vars(self.expr) <= {"x"}:
            raise PreconditionError(f"mollifier {print_expr(self.expr)} must be an expression in x")

    def value(self, x, precision: int = 50):
        return evaluate(self.expr, {"x": x}, precision)

    def derivative_expr(self) -> NetExpr:
        return differentiate(self.expr, "x")

    def exact_moment(self, k: int) -> Optional[Fraction]:
        if self.poly is None:
            return None
        return sum((c * gaussian_moment(i + k) for i, c in enumerate(self.poly)), Fraction(0))

    def exact_order(self) -> Optional[int]:
        """Largest M with unit mass and vanishing moments 1..M (exact)"""
        if self.poly is None:
            return None
        if self.exact_moment(0) != 1:
            return None
        k = 1
        while k <= 2 * len(self.poly) + 2 and self.exact_moment(k) == 0:
            k += 1
        return k - 1

    def label(self) -> str:
        return self.name


def gaussian_moment(n: int) -> Fraction:
    """int x^n pi^(-1/2) exp(-x^2) dx = (n-1)!! / 2^(n/2) for even n"""
    if n % 2:
        return Fraction(0)
    double_factorial = 1
    for odd in range(n - 1, 0, -2):
        double_factorial *= odd
    return Fraction(double_factorial, 2 ** (n // 2))


def _hermite_coefficients(n: int) -> List[int]:
    """Power-basis coefficients of the physicists' Hermite polynomial H_n"""
    unit = np.zeros(n + 1)
    unit[n] = 1.0
    return [int(round(c)) for c in hermite.herm2poly(unit)]


def _polynomial(coefficients: Sequence[Fraction], y: NetExpr) -> NetExpr:
    result: NetExpr = ZERO
    for k, c in enumerate(coefficients):
        if c == 0:
            continue
        power = ONE if k == 0 else (y if k == 1 else Pow(y, Const(k)))
        result = Binary("add", result, Binary("mul", Const(c), power))
    return simplify(result)


def _gaussian(y: NetExpr) -> NetExpr:
    return Binary("mul", Pow(PI, Const(Fraction(-1, 2))), Unary("exp", Unary("neg", Pow(y, Const(2)))))


def hermite_mollifier(order: int) -> Mollifier:
    """
    pi^(-1/2) exp(-x^2) sum_{j<m} (-1)^j H_2j(x) / (4^j j!) with m = order//2 + 1

    Moments 1 .. 2m-1 vanish, so the verified order is at least `order`.
    """
    if order < 1:
        raise PreconditionError("mollifier order must be at least 1")
    terms = order // 2 + 1
    degree = 2 * (terms - 1)
    poly = [Fraction(0)] * (degree + 1)
    for j in range(terms):
        weight = Fraction((-1) ** j, 4 ** j * factorial(j))
        for k, c in enumerate(_hermite_coefficients(2 * j)):
            poly[k] += weight * c
    expr = simplify(Binary("mul", _polynomial(poly, X), _gaussian(X)))
    return Mollifier(f"hermite({order})", expr, tuple(poly), terms)


def gaussian_mollifier() -> Mollifier:
    return Mollifier("gaussian", simplify(_gaussian(X)), (Fraction(1),), 1)


def mollifier_from_text(text: str) -> Mollifier:
    """'gaussian' or 'hermite(M)'"""
    text = text.strip()
    if text == "gaussian":
        return gaussian_mollifier()
    if text.startswith("hermite(") and text.endswith(")"):
        try:
            return hermite_mollifier(int(text[len("hermite("):-1]))
        except ValueError:
            pass
    raise ConfigError(f"unknown mollifier '{text}' (expected 'gaussian' or 'hermite(M)')")


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

def _float_function(expr: NetExpr, var: str = "x"):
    def f(value: float) -> float:
        return float(evaluate(expr, {var: mpmath.mpf(value)}, 20))
    return f


def _quad(f, lo: float, hi: float, spec: QuadSpec) -> Tuple[float, float]:
    result = integrate.quad(f, lo, hi, epsabs=spec.tol, epsrel=spec.tol, limit=200, full_output=1)
    if len(result) == 4:
        raise QuadratureError(f"quadrature on [{lo}, {hi}] did not converge: {result[3]}")
    value, abserr = result[0], result[1]
    if abserr > 100 * spec.tol * max(1.0, abs(value)):
        raise QuadratureError(f"quadrature error estimate {abserr:.3e} exceeds tolerance {spec.tol:.1e}")
    return value, abserr


def _tail_bound(rho: Mollifier, k: int, radius: float) -> float:
    """Gaussian-tail estimate of the mass of |x^k rho| outside [-R, R]"""
    edge = max(abs(float(rho.value(radius, 20))), abs(float(rho.value(-radius, 20))))
    return 2.0 * edge * radius ** k / max(2.0 * radius - k / radius, 1.0)


@dataclass
class MomentReport:
    mollifier: str
    moments: List[Tuple[int, float, float]]
    order: Optional[int]
    tail_bound: float
    decay_verified: bool
    quad: QuadSpec = field(default_factory=QuadSpec)

    @property
    def mass(self) -> float:
        return self.moments[0][1]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mollifier": self.mollifier,
            "moments": {str(k): {"value": format_number(v), "abserr": format_number(e)} for k, v, e in self.moments},
            "order": "none" if self.order is None else str(self.order),
            "tail_bound": format_number(self.tail_bound),
            "decay_verified": str(self.decay_verified),
            "quadrature": self.quad.to_dict(),
        }


def _decay_verified(rho: Mollifier, radius: float) -> bool:
    """|rho(x)| x^8 stays bounded and falls off beyond the truncation radius"""
    try:
        values = [abs(float(rho.value(x, 20))) * x ** 8 for x in np.linspace(0.0, 2.0 * radius, 97)]
        values += [abs(float(rho.value(-x, 20))) * x ** 8 for x in np.linspace(0.0, 2.0 * radius, 97)]
    except NetDomainError:
        return False
    return bool(np.all(np.isfinite(values))) and max(values) < 1e12 and values[96] < 1e-6 and values[-1] < 1e-6


def check_mollifier(rho: Mollifier, target_order: int, quad: Optional[QuadSpec] = None) -> MomentReport:
    """
    Moments int x^k rho for k = 0..target_order by adaptive quadrature

    Raises:
        QuadratureError: A moment integral does not converge
    """
    quad = quad or QuadSpec()
    f = _float_function(rho.expr)
    moments = []
    for k in range(target_order + 1):
        value, abserr = _quad(lambda x, k=k: x ** k * f(x), -quad.radius, quad.radius, quad)
        moments.append((k, value, abserr))

    order: Optional[int] = None
    if abs(moments[0][1] - 1.0) <= MOMENT_TOLERANCE:
        order = 0
        for k, value, _ in moments[1:]:
            if abs(value) > MOMENT_TOLERANCE:
                break
            order = k
    tail = _tail_bound(rho, target_order, quad.radius)
    report = MomentReport(rho.name, moments, order, tail, _decay_verified(rho, quad.radius), quad)
    logger.debug(f"mollifier {rho.name}: order {order}, tail bound {tail:.3e}")
    return report


def scale(rho_expr: NetExpr, r) -> NetExpr:
    """r (.) rho: x -> (1/r) rho(x/r)"""
    r_expr = r if isinstance(r, NetExpr) else Const(Fraction(r))
    if isinstance(r_expr, Const) and r_expr.value <= 0:
        raise PreconditionError("scale factor must be positive")
    if r_expr == ONE:
        return rho_expr
    inner = substitute_vars(rho_expr, {"x": Binary("div", X, r_expr)})
    return simplify(Binary("mul", Binary("div", ONE, r_expr), inner))


def concentrate(rho_expr: NetExpr, b: NetExpr) -> NetExpr:
    """(1/b) (.) rho: x -> b rho(b x)"""
    return simplify(Binary("mul", b, substitute_vars(rho_expr, {"x": Binary("mul", b, X)})))


def convolve_smooth(f: NetExpr, rho: Mollifier, r: float, x: float, quad: Optional[QuadSpec] = None) -> Tuple[float, float, float]:
    """
    (f * r (.) rho)(x) = int f(x - r s) rho(s) ds by adaptive quadrature

    Returns:
        (value, quadrature error estimate, tail bound)
    """
    quad = quad or QuadSpec()
    f_float = _float_function(f)
    rho_float = _float_function(rho.expr)
    value, abserr = _quad(lambda s: f_float(x - r * s) * rho_float(s), -quad.radius, quad.radius, quad)
    edge = max(abs(f_float(x - r * quad.radius)), abs(f_float(x + r * quad.radius)), 1.0)
    return value, abserr, edge * _tail_bound(rho, 0, quad.radius)


# ---------------------------------------------------------------------------
# Test distributions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Smooth:
    f: NetExpr

    def __post_init__(self):
        if not free_vars(self.f) <= {"x"}:
            raise UnsupportedDistributionError(f"smooth function {print_expr(self.f)} must depend on x only")

    support = None

    def label(self) -> str:
        return f"smooth({print_expr(self.f)})"


@dataclass(frozen=True)
class Delta:
    support = (Fraction(0), Fraction(0))

    def label(self) -> str:
        return "delta"


@dataclass(frozen=True)
class Heaviside:
    support = (Fraction(0), None)

    def label(self) -> str:
        return "heaviside"


@dataclass(frozen=True)
class DeltaPrime:
    support = (Fraction(0), Fraction(0))

    def label(self) -> str:
        return "delta'"


@dataclass(frozen=True)
class Combination:
    """Finite linear combination sum c_k T_k"""
    terms: Tuple[Tuple[Fraction, Any], ...]

    support = None

    def label(self) -> str:
        return " + ".join(f"{format_number(c)}*{t.label()}" for c, t in self.terms)


ZERO_DISTRIBUTION = Smooth(ZERO)

_DISTRIBUTIONS = {"delta": Delta(), "heaviside": Heaviside(), "delta'": DeltaPrime(), "deltaprime": DeltaPrime()}


def distribution_from_text(text: str) -> Any:
    """'delta', 'heaviside', "delta'" or 'smooth(<expr in x>)'"""
    text = text.strip()
    if text in _DISTRIBUTIONS:
        return _DISTRIBUTIONS[text]
    if text.startswith("smooth(") and text.endswith(")"):
        return Smooth(parse(text[len("smooth("):-1], variables=("x",), extended=True))
    raise UnsupportedDistributionError(f"unknown distribution '{text}'")


def distribution_derivative(t: Any) -> Optional[Any]:
    """T' for the variants whose derivative is again implemented"""
    if isinstance(t, Smooth):
        return Smooth(differentiate(t.f, "x"))
    if isinstance(t, Heaviside):
        return Delta()
    if isinstance(t, Delta):
        return DeltaPrime()
    if isinstance(t, Combination):
        parts = [(c, distribution_derivative(s)) for c, s in t.terms]
        if any(d is None for _, d in parts):
            return None
        return Combination(tuple(parts))
    return None


def polynomial_degree(f: NetExpr) -> Optional[int]:
    """Degree of f in x when some derivative of order <= MAX_POLY_DEGREE + 1 vanishes"""
    current = simplify(f)
    for k in range(MAX_POLY_DEGREE + 2):
        if current == ZERO:
            return k - 1
        try:
            current = differentiate(current, "x")
        except NotDifferentiableError:
            return None
    return None


# ---------------------------------------------------------------------------
# Embedding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvolutionNet:
    """u(eps, x) = int f^(order)(x - s/b_eps) rho(s) ds, evaluated by quadrature"""
    f: NetExpr
    b: NetExpr
    rho: Mollifier
    quad: QuadSpec = QuadSpec()
    order: int = 0
    domain: Interval = REAL_LINE

    x_independent = False

    def derivative(self, order: int) -> "ConvolutionNet":
        if order == 0:
            return self
        return ConvolutionNet(self.f, self.b, self.rho, self.quad, self.order + order, self.domain)

    def value(self, eps, x, precision: int = 50):
        with mpmath.workdps(precision):
            r = float(1 / evaluate(self.b, {"eps": eps}, precision))
            f_k = derivative(self.f, "x", self.order) if self.order else self.f
            value, _, _ = convolve_smooth(f_k, self.rho, r, float(x), self.quad)
            return mpmath.mpf(value)

    def label(self) -> str:
        suffix = f"^({self.order})" if self.order else ""
        return f"conv({print_expr(self.f)}{suffix}, {print_expr(self.b)}, {self.rho.name})"


def _smooth_closed_form(f: NetExpr, degree: int, b: NetExpr, rho: Mollifier) -> NetExpr:
    """sum_k f^(k)(x) (-1/b)^k m_k / k!, with the k = 0 term kept in front"""
    rest: NetExpr = ZERO
    for k in range(1, degree + 1):
        m_k = rho.exact_moment(k)
        if not m_k:
            continue
        coefficient = Const(Fraction((-1) ** k) * m_k / factorial(k))
        term = Binary("mul", Binary("mul", coefficient, derivative(f, "x", k)), Pow(b, Const(-k)))
        rest = Binary("add", rest, term)
    head = simplify(Binary("mul", Const(rho.exact_moment(0)), f))
    return simplify(Binary("add", head, simplify(rest)))


def _heaviside_closed_form(b: NetExpr, rho: Mollifier) -> NetExpr:
    """int_{-inf}^{b x} rho = (1 + erf(y))/2 + pi^(-1/2) e^(-y^2) sum_{1<=j<m} (-1)^(j+1) H_{2j-1}(y)/(4^j j!)"""
    y = Binary("mul", b, X)
    head = Binary("mul", Const(Fraction(1, 2)), Binary("add", ONE, Unary("erf", y)))
    degree = max(2 * rho.hermite_terms - 3, 0)
    poly = [Fraction(0)] * (degree + 1)
    for j in range(1, rho.hermite_terms):
        weight = Fraction((-1) ** (j + 1), 4 ** j * factorial(j))
        for k, c in enumerate(_hermite_coefficients(2 * j - 1)):
            poly[k] += weight * c
    if not any(poly):
        return simplify(head)
    return simplify(Binary("add", head, Binary("mul", _polynomial(poly, y), _gaussian(y))))


def embed_net(t: Any, b: NetExpr, rho: Mollifier, domain: Interval = REAL_LINE, quad: Optional[QuadSpec] = None):
    """
    Representative net of i_b^rho(T) on the domain

    Raises:
        UnsupportedDistributionError: No closed form or quadrature route for (T, rho)
    """
    quad = quad or QuadSpec()
    if isinstance(t, Delta):
        return FunctionNet(concentrate(rho.expr, b), domain)
    if isinstance(t, DeltaPrime):
        expr = Binary("mul", Pow(b, Const(2)), substitute_vars(rho.derivative_expr(), {"x": Binary("mul", b, X)}))
        return FunctionNet(simplify(expr), domain)
    if isinstance(t, Heaviside):
        if rho.hermite_terms is None:
            raise UnsupportedDistributionError(f"no closed form for heaviside with mollifier {rho.name}")
        return FunctionNet(_heaviside_closed_form(b, rho), domain)
    if isinstance(t, Smooth):
        degree = polynomial_degree(t.f)
        if degree is not None and rho.poly is not None:
            if degree < 0:
                return FunctionNet(ZERO, domain)
            return FunctionNet(_smooth_closed_form(t.f, degree, b, rho), domain)
        return ConvolutionNet(t.f, b, rho, quad, 0, domain)
    if isinstance(t, Combination):
        parts = [(Fraction(c), embed_net(s, b, rho, domain, quad)) for c, s in t.terms]
        if not all(isinstance(net, FunctionNet) for _, net in parts):
            raise UnsupportedDistributionError("linear combinations need closed-form embeddings")
        expr: NetExpr = ZERO
        for c, net in parts:
            expr = Binary("add", expr, Binary("mul", Const(c), net.expr))
        return FunctionNet(simplify(expr), domain)
    raise UnsupportedDistributionError(f"unsupported distribution {t!r}")


def embedding_gauge(b: NetExpr, param_range: int = 6) -> Gauge:
    return principal(f"AG({print_expr(b)})", b, IS_S, param_range)


def default_compact(domain: Interval) -> Compact:
    lo = Fraction(-1) if domain.lo is None else domain.lo
    hi = Fraction(1) if domain.hi is None else domain.hi
    if domain.lo is not None and domain.hi is None:
        hi = lo + 2
    if domain.hi is not None and domain.lo is None:
        lo = hi - 2
    width = hi - lo
    if domain.lo is None and domain.hi is None:
        return Compact(lo, hi)
    return Compact(lo + width / 4, hi - width / 4)


def embed(t: Any, b: NetExpr, rho: Mollifier, domain: Interval = REAL_LINE,
          sched: Optional[SamplingSchedule] = None, compacts: Optional[Sequence[Compact]] = None,
          max_order: int = 3, verify: bool = True, quad: Optional[QuadSpec] = None,
          gauge: Optional[Gauge] = None) -> GenFuncRep:
    """
    i_b^rho(T) as a representative of G(AG(b), AG(b), domain)

    Raises:
        PreconditionError: b does not tend to +infinity
        UnsupportedDistributionError: No embedding route for (T, rho)
    """
    sched = sched or EMBED_SCHEDULE
    if not isinstance(b, NetExpr) or not free_vars(b) <= {"eps"}:
        raise PreconditionError("the embedding generator must be an expression in eps")
    lim = limit(b, IS_S, sched)
    if not lim.is_plus_infinity:
        raise PreconditionError(f"generator {print_expr(b)} has limit {lim.describe()}, expected +inf")

    gauge = gauge or embedding_gauge(b)
    net = embed_net(t, b, rho, domain, quad)
    compacts = tuple(compacts or [default_compact(domain)])
    if verify:
        rep = make_rep(net, gauge, gauge, compacts, sched, max_order, EMBED_GRID, check_pair=False)
    else:
        verdict = Verdict.inconclusive_({"reason": "moderateness not checked"})
        rep = GenFuncRep(net, gauge, gauge, compacts, max_order, verdict, EMBED_GRID)
    logger.debug(f"embedded {t.label()} with {print_expr(b)} and {rho.name}: {rep.verdict.tag.value}")
    return rep


def colombeau_transport(u: GenFuncRep, f: GaugeMorphism, sched: SamplingSchedule) -> GenFuncRep:
    """[u_eps1] -> [u_{f(eps2)}] along a gauge morphism, same domain"""
    return functor_action(f, X, u, u.domain, sched)


# ---------------------------------------------------------------------------
# Diagram checks
# ---------------------------------------------------------------------------

@dataclass
class EmbeddingReport:
    checks: List[Tuple[str, Verdict]]

    @property
    def all_hold(self) -> bool:
        return all(v.holds for _, v in self.checks)

    def to_dict(self) -> Dict[str, Any]:
        return {label: v.to_dict() for label, v in self.checks}


def _pointwise_agreement(u, v, eps_points: Sequence[Fraction], compact: Compact, precision: int, tol) -> Verdict:
    """max |u - v| / (1 + |v|) over an x grid and the eps points"""
    worst = mpmath.mpf(0)
    witness = None
    with mpmath.workdps(precision):
        for eps in eps_points:
            for x in compact.grid(21):
                a = u.value(eps, x, precision)
                c = v.value(eps, x, precision)
                gap = abs(a - c) / (1 + abs(c))
                if gap > worst:
                    worst, witness = gap, {"eps": eps, "x": x}
    evidence = {"max_relative_gap": worst, "tolerance": tol}
    if worst <= tol:
        return Verdict.holds_(evidence)
    evidence["witness"] = witness
    return Verdict.fails_(evidence)


def _tolerance(u, v, precision: int, quad: QuadSpec):
    if isinstance(u, ConvolutionNet) or isinstance(v, ConvolutionNet):
        return mpmath.mpf(100 * quad.tol)
    return mpmath.mpf(10) ** (-(precision - 15))


def approximation_order(f: NetExpr, b: NetExpr, rho: Mollifier, compact: Compact,
                        sched: Optional[SamplingSchedule] = None, quad: Optional[QuadSpec] = None) -> Optional[float]:
    """Least-squares slope of log sup_K |i(f) - f| against log eps; None when the difference vanishes"""
    sched = sched or EMBED_SCHEDULE
    f = simplify(f)
    net = embed_net(Smooth(f), b, rho, REAL_LINE, quad)
    diff = _difference_net(net, FunctionNet(f))
    if isinstance(diff, FunctionNet) and diff.expr == ZERO:
        return None
    s = sup_net(diff, compact, 0, EMBED_GRID)
    logs, sups = [], []
    for eps in sched.points():
        value = s.evaluate_at(eps, sched.precision) if isinstance(s, SupNet) else abs(evaluate(s, {"eps": eps}, sched.precision))
        if value == 0:
            continue
        logs.append(float(mpmath.log10(mpmath.mpf(eps.numerator) / eps.denominator)))
        sups.append(float(mpmath.log10(value)))
    if len(logs) < 2:
        return None
    return float(np.polyfit(logs, sups, 1)[0])


def _difference_net(u, v):
    if isinstance(u, FunctionNet) and isinstance(v, FunctionNet):
        return FunctionNet(simplify(Binary("sub", u.expr, v.expr)), u.domain)
    return CombinedNet("sub", u, v, u.domain)


def _mollifier_order(rho: Mollifier, quad: QuadSpec) -> int:
    exact = rho.exact_order()
    if exact is not None:
        return exact
    report = check_mollifier(rho, 8, quad)
    return report.order or 0


def generator_rate(b: NetExpr, sched: SamplingSchedule) -> float:
    """Least-squares slope of log b against -log eps; 1 for 1/eps"""
    logs, values = [], []
    with mpmath.workdps(sched.precision):
        for eps in sched.points():
            logs.append(float(mpmath.log10(mpmath.mpf(eps.numerator) / eps.denominator)))
            values.append(float(mpmath.log10(abs(evaluate(b, {"eps": eps}, sched.precision)))))
    return -float(np.polyfit(logs, values, 1)[0])


def check_embedding_diagrams(samples: Sequence[Any], b: NetExpr, rho: Mollifier,
                             sched: Optional[SamplingSchedule] = None, quad: Optional[QuadSpec] = None,
                             compact: Optional[Compact] = None,
                             triangles: Sequence[Tuple[IndexMorphism, NetExpr]] = ()) -> EmbeddingReport:
    """
    Derivation square, i(f) = f to the mollifier order, and the
    generator-preserving morphism triangle, reported check by check
    """
    sched = sched or EMBED_SCHEDULE
    quad = quad or QuadSpec()
    compact = compact or Compact(-1, 1)
    shallow = sched.points()[:3]
    order = _mollifier_order(rho, quad)
    rate = generator_rate(b, sched)
    checks: List[Tuple[str, Verdict]] = []

    for t in samples:
        t_prime = distribution_derivative(t)
        label = f"derivation[{t.label()}]"
        if t_prime is None:
            checks.append((label, Verdict.inconclusive_({"reason": "derivative not implemented"})))
            continue
        try:
            u = embed_net(t, b, rho, REAL_LINE, quad)
            direct = embed_net(t_prime, b, rho, REAL_LINE, quad)
        except UnsupportedDistributionError as e:
            checks.append((label, Verdict.inconclusive_({"reason": str(e)})))
            continue
        derived = u.derivative(1)
        tol = _tolerance(derived, direct, sched.precision, quad)
        checks.append((label, _pointwise_agreement(derived, direct, shallow, compact, sched.precision, tol)))

    for t in samples:
        if not isinstance(t, Smooth):
            continue
        label = f"reproduction[{t.label()}]"
        u = embed_net(t, b, rho, REAL_LINE, quad)
        diff = _difference_net(u, FunctionNet(simplify(t.f)))
        if isinstance(diff, FunctionNet) and diff.expr == ZERO:
            checks.append((label, Verdict.holds_({"difference": "0", "order": order}, source="symbolic")))
            continue
        bound = normalize(Pow(b, Const(-(order + 1))))
        s = sup_net(diff, compact, 0, EMBED_GRID)
        verdict = big_o(s, bound, IS_S, sched)
        verdict.evidence.update({"order": order, "bound": print_expr(bound)})
        if isinstance(diff, FunctionNet):
            exponent = approximation_order(t.f, b, rho, compact, sched, quad)
            if exponent is not None:
                required = (order + 1) * rate - EXPONENT_SLACK
                meets = exponent >= required
                verdict.evidence.update({"fitted_exponent": exponent, "required_exponent": required, "meets_order": meets})
                if not meets and not verdict.fails:
                    verdict = Verdict.fails_(dict(verdict.evidence, reason="convergence slower than the mollifier order"))
        checks.append((label, verdict))

    for f_map, b1 in triangles:
        label = f"triangle[{f_map.label()}]"
        b2 = substitute(b1, f_map.map)
        try:
            arrow = check_ag_morphism(f_map, embedding_gauge(b1), embedding_gauge(b2), sched)
        except InclusionFailure as e:
            checks.append((label, Verdict.fails_({"reason": str(e), "b1": print_expr(b1), "b2": print_expr(b2)})))
            continue
        if not arrow.verified:
            checks.append((label, Verdict.inconclusive_({"reason": f"{f_map.label()} not verified as a gauge morphism"})))
            continue
        parts = []
        for t in samples:
            try:
                u1 = embed_net(t, b1, rho, REAL_LINE, quad)
                u2 = embed_net(t, b2, rho, REAL_LINE, quad)
            except UnsupportedDistributionError:
                continue
            if not (isinstance(u1, FunctionNet) and isinstance(u2, FunctionNet)):
                continue
            rep = GenFuncRep(u1, arrow.source, arrow.source, (compact,), 0,
                             Verdict.inconclusive_({"reason": "moderateness not checked"}), EMBED_GRID)
            try:
                transported = colombeau_transport(rep, arrow, sched).net
            except PreconditionError as e:
                parts.append(Verdict.fails_({"distribution": t.label(), "reason": str(e)}))
                continue
            tol = _tolerance(transported, u2, sched.precision, quad)
            verdict = _pointwise_agreement(transported, u2, shallow, compact, sched.precision, tol)
            verdict.evidence["distribution"] = t.label()
            parts.append(verdict)
        checks.append((label, all_of(parts, {"b1": print_expr(b1), "b2": print_expr(b2)})))

    report = EmbeddingReport(checks)
    logger.info(f"embedding diagrams for {print_expr(b)} / {rho.name}: "
                + ", ".join(f"{label} {v.tag.value}" for label, v in checks))
    return report


def check_linearity_and_injectivity(samples: Sequence[Any], b: NetExpr, rho: Mollifier,
                                    sched: Optional[SamplingSchedule] = None,
                                    compact: Optional[Compact] = None, max_order: int = 0) -> EmbeddingReport:
    """
    Linearity of i on pairs (exact at representative level), i(0) = 0, and
    injectivity tested contrapositively: distinct samples are not equal in G
    """
    sched = sched or EMBED_SCHEDULE
    compact = compact or Compact(-1, 1)
    shallow = sched.points()[:3]
    gauge = embedding_gauge(b)
    checks: List[Tuple[str, Verdict]] = []

    zero = embed_net(ZERO_DISTRIBUTION, b, rho)
    checks.append(("zero", Verdict.holds_({"representative": "0"}, source="symbolic") if zero.expr == ZERO
                   else Verdict.fails_({"representative": zero.label()}, source="symbolic")))

    for k, t1 in enumerate(samples):
        for t2 in samples[k + 1:]:
            combined = embed_net(Combination(((Fraction(2), t1), (Fraction(1), t2))), b, rho)
            u1, u2 = embed_net(t1, b, rho), embed_net(t2, b, rho)
            expected = FunctionNet(simplify(Binary("add", Binary("mul", Const(2), u1.expr), u2.expr)))
            tol = mpmath.mpf(10) ** (-(sched.precision - 15))
            checks.append((f"linearity[2*{t1.label()} + {t2.label()}]",
                           _pointwise_agreement(combined, expected, shallow, compact, sched.precision, tol)))

    candidates = list(samples) + [ZERO_DISTRIBUTION]
    for k, t1 in enumerate(candidates):
        for t2 in candidates[k + 1:]:
            if t1 == t2:
                continue
            r1 = GenFuncRep(embed_net(t1, b, rho), gauge, gauge, (compact,), max_order,
                            Verdict.inconclusive_({"reason": "not checked"}), EMBED_GRID)
            r2 = GenFuncRep(embed_net(t2, b, rho), gauge, gauge, (compact,), max_order,
                            Verdict.inconclusive_({"reason": "not checked"}), EMBED_GRID)
            equal = gf_equal(r1, r2, sched)
            evidence = {"gf_equal": equal}
            if equal.fails:
                verdict = Verdict.holds_(evidence, source=equal.source)
            elif equal.holds:
                verdict = Verdict.fails_(evidence, source=equal.source)
            else:
                verdict = Verdict.inconclusive_(evidence)
            checks.append((f"injectivity[{t1.label()} vs {t2.label()}]", verdict))

    return EmbeddingReport(checks)
