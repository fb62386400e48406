"""
Colombeau AG-algebra Representatives

Nets of smooth functions on open intervals, their moderateness and
negligibility with respect to gauges (through sampled sup-nets over compact
subintervals), the representative-level algebra and the functorial action
G(i, h): [u_eps1] -> [u_{i(eps2)} o h].
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import mpmath

from errors import ConfigError, IndexSetMismatchError, NetDomainError, PreconditionError, UnverifiedMorphismError
from gauge import Gauge, GaugeMorphism, compose_ag_morphisms, inclusion, moderate_in
from index import Verdict, all_of, big_o, format_number, identity_morphism, order_gt
from logger import get_logger
from netlang import (
    Binary,
    Const,
    NetExpr,
    SamplingSchedule,
    Unary,
    Var,
    derivative,
    depends_on,
    evaluate,
    free_vars,
    normalize,
    parse,
    print_expr,
    simplify,
    substitute_vars,
    to_mpf,
)


logger = get_logger("cgf")

DEFAULT_MAX_ORDER = 3
DEFAULT_GRID = 1000
REFINE_POINTS = 21


# ---------------------------------------------------------------------------
# Domains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Compact:
    """Closed interval [lo, hi] with rational endpoints"""
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise PreconditionError(f"empty compact [{self.lo}, {self.hi}]")

    def grid(self, points: int) -> List[Fraction]:
        if self.lo == self.hi or points < 2:
            return [self.lo]
        step = (self.hi - self.lo) / (points - 1)
        return [self.lo + step * i for i in range(points)]

    def label(self) -> str:
        return f"[{format_number(self.lo)}, {format_number(self.hi)}]"


@dataclass(frozen=True)
class Interval:
    """Open interval (lo, hi); None stands for an infinite end"""
    lo: Optional[Fraction] = None
    hi: Optional[Fraction] = None

    def contains(self, x) -> bool:
        if isinstance(x, mpmath.mpf):
            return (self.lo is None or x > to_mpf(self.lo)) and (self.hi is None or x < to_mpf(self.hi))
        return (self.lo is None or x > self.lo) and (self.hi is None or x < self.hi)

    def contains_compact(self, k: Compact) -> bool:
        return self.contains(k.lo) and self.contains(k.hi)

    def label(self) -> str:
        lo = "-inf" if self.lo is None else format_number(self.lo)
        hi = "+inf" if self.hi is None else format_number(self.hi)
        return f"({lo}, {hi})"


REAL_LINE = Interval()


def _endpoints(text: str, brackets: str) -> Tuple[str, str]:
    body = text.strip()
    if len(body) < 2 or body[0] != brackets[0] or body[-1] != brackets[1] or body.count(",") != 1:
        raise ConfigError(f"malformed interval '{text}', expected {brackets[0]}a, b{brackets[1]}")
    lo_text, hi_text = [p.strip() for p in body[1:-1].split(",")]
    return lo_text, hi_text


def _rational(text: str, source: str) -> Fraction:
    try:
        return Fraction(text)
    except ValueError:
        raise ConfigError(f"malformed endpoint '{text}' in '{source}'")


def parse_interval(text: str) -> Interval:
    """'(a,b)' with 'inf' allowed at either end"""
    lo_text, hi_text = _endpoints(text, "()")
    lo = None if lo_text in ("-inf", "inf") else _rational(lo_text, text)
    hi = None if hi_text in ("inf", "+inf") else _rational(hi_text, text)
    if lo is not None and hi is not None and lo >= hi:
        raise ConfigError(f"empty interval '{text}'")
    return Interval(lo, hi)


def parse_compact(text: str) -> Compact:
    lo_text, hi_text = _endpoints(text, "[]")
    lo, hi = _rational(lo_text, text), _rational(hi_text, text)
    if lo > hi:
        raise ConfigError(f"empty compact '{text}'")
    return Compact(lo, hi)


# ---------------------------------------------------------------------------
# Function nets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FunctionNet:
    """Net of smooth functions given by an expression in eps and x"""
    expr: NetExpr
    domain: Interval = REAL_LINE

    def __post_init__(self):
        if not free_vars(self.expr) <= {"eps", "x"}:
            raise PreconditionError(f"{print_expr(self.expr)} uses variables other than eps and x")

    def derivative(self, order: int) -> "FunctionNet":
        if order == 0:
            return self
        return FunctionNet(derivative(self.expr, "x", order), self.domain)

    def value(self, eps, x, precision: int = 50):
        return evaluate(self.expr, {"eps": eps, "x": x}, precision)

    @property
    def x_independent(self) -> bool:
        return not depends_on(self.expr, "x")

    def label(self) -> str:
        return print_expr(self.expr)


def function_net(text: str, domain: Interval = REAL_LINE) -> FunctionNet:
    return FunctionNet(parse(text, variables=("eps", "x"), extended=True), domain)


@dataclass(frozen=True)
class CombinedNet:
    """Sum or difference of nets that are not all expressions"""
    op: str
    left: Any
    right: Any
    domain: Interval = REAL_LINE

    def derivative(self, order: int) -> "CombinedNet":
        return CombinedNet(self.op, self.left.derivative(order), self.right.derivative(order), self.domain)

    def value(self, eps, x, precision: int = 50):
        with mpmath.workdps(precision):
            a = self.left.value(eps, x, precision)
            b = self.right.value(eps, x, precision)
            return a + b if self.op == "add" else a - b

    x_independent = False

    def label(self) -> str:
        symbol = "+" if self.op == "add" else "-"
        return f"({self.left.label()} {symbol} {self.right.label()})"


class SupNet:
    """
    eps -> sup_{x in K} |d^order u(eps, x)|, sampled on a grid with one
    10x refinement around the grid argmax; values are cached per eps.
    """

    def __init__(self, net, compact: Compact, order: int = 0, grid: int = DEFAULT_GRID):
        self.net = net.derivative(order)
        self.compact = compact
        self.order = order
        self.grid = grid
        self._values: Dict[Any, Any] = {}

    def evaluate_at(self, point, precision: int = 50):
        key = (point, precision)
        if key not in self._values:
            self._values[key] = self._sup(point, precision)
        return self._values[key]

    def _sup(self, eps, precision: int):
        with mpmath.workdps(precision):
            xs = self.compact.grid(self.grid)
            values = [abs(self.net.value(eps, x, precision)) for x in xs]
            best = max(range(len(values)), key=lambda i: values[i])
            result = values[best]
            if len(xs) > 1:
                lo = xs[max(best - 1, 0)]
                hi = xs[min(best + 1, len(xs) - 1)]
                for x in Compact(lo, hi).grid(REFINE_POINTS):
                    result = max(result, abs(self.net.value(eps, x, precision)))
            return result

    def sampled(self) -> Dict[str, str]:
        return {format_number(p): format_number(v) for (p, _), v in sorted(self._values.items(), reverse=True)}

    def label(self) -> str:
        return f"sup_{self.compact.label()} |d^{self.order} {self.net.label() if hasattr(self.net, 'label') else ''}|"


def sup_net(net, compact: Compact, order: int = 0, grid: int = DEFAULT_GRID):
    """Sup-net of a derivative; an exact expression when the derivative does not depend on x"""
    if isinstance(net, FunctionNet):
        d = net.derivative(order)
        if d.x_independent:
            return normalize(Unary("abs", d.expr))
    return SupNet(net, compact, order, grid)


def _check_compacts(net, compacts: Sequence[Compact]):
    if not compacts:
        raise PreconditionError("at least one compact subinterval is needed")
    domain = getattr(net, "domain", REAL_LINE)
    for k in compacts:
        if not domain.contains_compact(k):
            raise PreconditionError(f"{k.label()} is not inside {domain.label()}")


def is_moderate_fn(net, gauge: Gauge, compacts: Sequence[Compact], sched: SamplingSchedule,
                   max_order: int = DEFAULT_MAX_ORDER, grid: int = DEFAULT_GRID) -> Verdict:
    """
    For every compact K and derivative order up to max_order the sup-net is
    moderate with respect to the gauge
    """
    if max_order < 0:
        raise PreconditionError("max_order must be non-negative")
    _check_compacts(net, compacts)
    parts = []
    for k in compacts:
        for order in range(max_order + 1):
            s = sup_net(net, k, order, grid)
            verdict = moderate_in(s, gauge, sched)
            verdict.evidence.update({"compact": k.label(), "order": order})
            if isinstance(s, SupNet):
                verdict.evidence["sup"] = s.sampled()
            parts.append(verdict)
            if verdict.fails:
                return all_of(parts, {"gauge": gauge.name, "moderate": "no"})
    return all_of(parts, {"gauge": gauge.name})


def _reciprocal(z):
    return normalize(Binary("div", Const(1), z))


def is_negligible_fn(net, gauge: Gauge, compacts: Sequence[Compact], sched: SamplingSchedule,
                     max_order: int = DEFAULT_MAX_ORDER, grid: int = DEFAULT_GRID) -> Verdict:
    """sup_K |d^a u| = O(1/z) for every eventually positive presented z"""
    if max_order < 0:
        raise PreconditionError("max_order must be non-negative")
    _check_compacts(net, compacts)
    zero = Const(0)
    positive = [z for z in gauge.generators() if isinstance(z, NetExpr)
                and order_gt(z, zero, gauge.index_set, sched).holds]
    if not positive:
        return Verdict.inconclusive_({"reason": f"{gauge.name} has no eventually positive generator"})
    parts = []
    for k in compacts:
        for order in range(max_order + 1):
            s = sup_net(net, k, order, grid)
            for z in positive:
                verdict = big_o(s, _reciprocal(z), gauge.index_set, sched)
                verdict.evidence.update({"compact": k.label(), "order": order, "z": print_expr(z)})
                parts.append(verdict)
                if verdict.fails:
                    return all_of(parts, {"gauge": gauge.name, "negligible": "no"})
    return all_of(parts, {"gauge": gauge.name})


# ---------------------------------------------------------------------------
# Representatives and the algebra
# ---------------------------------------------------------------------------

@dataclass
class GenFuncRep:
    """Representative of [u] in G(B, Z, Omega) with its moderateness record"""
    net: Any
    b: Gauge
    z: Gauge
    compacts: Sequence[Compact]
    max_order: int
    verdict: Verdict
    grid: int = DEFAULT_GRID

    @property
    def domain(self) -> Interval:
        return self.net.domain

    @property
    def expr(self) -> Optional[NetExpr]:
        return self.net.expr if isinstance(self.net, FunctionNet) else None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "representative": self.net.label(),
            "domain": self.domain.label(),
            "gauges": [self.b.name, self.z.name],
            "moderate": self.verdict.to_dict(),
        }


def make_rep(net, b: Gauge, z: Gauge, compacts: Sequence[Compact], sched: SamplingSchedule,
             max_order: int = DEFAULT_MAX_ORDER, grid: int = DEFAULT_GRID, check_pair: bool = True) -> GenFuncRep:
    """
    Wrap a net as a representative after checking R_M(B) in R_M(Z) and moderateness

    Raises:
        PreconditionError: The gauge pair is not ordered
    """
    if check_pair and b is not z:
        pair = inclusion(b, z, sched)
        if not pair.holds:
            raise PreconditionError(f"R_M({b.name}) in R_M({z.name}) is {pair.tag.value}")
    verdict = is_moderate_fn(net, b, compacts, sched, max_order, grid)
    logger.debug(f"representative {net.label()}: moderate {verdict.tag.value}")
    return GenFuncRep(net, b, z, tuple(compacts), max_order, verdict, grid)


def _same_algebra(u: GenFuncRep, v: GenFuncRep):
    if u.b.name != v.b.name or u.z.name != v.z.name:
        raise IndexSetMismatchError(f"representatives live in G({u.b.name}, {u.z.name}) and G({v.b.name}, {v.z.name})")
    if u.domain != v.domain:
        raise PreconditionError(f"domains {u.domain.label()} and {v.domain.label()} differ")


def _require_moderate(*reps: GenFuncRep):
    for rep in reps:
        if not rep.verdict.holds:
            raise PreconditionError(f"{rep.net.label()} is not verified moderate ({rep.verdict.tag.value})")


def _combine(u: GenFuncRep, net, sched: SamplingSchedule, verify: bool) -> GenFuncRep:
    verdict = is_moderate_fn(net, u.b, u.compacts, sched, u.max_order, u.grid) if verify else u.verdict
    return GenFuncRep(net, u.b, u.z, u.compacts, u.max_order, verdict, u.grid)


def _binary(op: str, u: GenFuncRep, v: GenFuncRep, sched: SamplingSchedule, verify: bool) -> GenFuncRep:
    _same_algebra(u, v)
    _require_moderate(u, v)
    if isinstance(u.net, FunctionNet) and isinstance(v.net, FunctionNet):
        net = FunctionNet(simplify(Binary(op, u.net.expr, v.net.expr)), u.domain)
    elif op in ("add", "sub"):
        net = CombinedNet(op, u.net, v.net, u.domain)
    else:
        raise PreconditionError("products need expression representatives")
    return _combine(u, net, sched, verify)


def gf_add(u: GenFuncRep, v: GenFuncRep, sched: SamplingSchedule, verify: bool = True) -> GenFuncRep:
    return _binary("add", u, v, sched, verify)


def gf_sub(u: GenFuncRep, v: GenFuncRep, sched: SamplingSchedule, verify: bool = True) -> GenFuncRep:
    return _binary("sub", u, v, sched, verify)


def gf_mul(u: GenFuncRep, v: GenFuncRep, sched: SamplingSchedule, verify: bool = True) -> GenFuncRep:
    return _binary("mul", u, v, sched, verify)


def gf_scale(u: GenFuncRep, c, sched: SamplingSchedule, verify: bool = False) -> GenFuncRep:
    _require_moderate(u)
    if not isinstance(u.net, FunctionNet):
        raise PreconditionError("scaling needs an expression representative")
    net = FunctionNet(simplify(Binary("mul", Const(Fraction(c)), u.net.expr)), u.domain)
    return _combine(u, net, sched, verify)


def gf_derive(u: GenFuncRep, sched: SamplingSchedule, order: int = 1, verify: bool = True) -> GenFuncRep:
    _require_moderate(u)
    return _combine(u, u.net.derivative(order), sched, verify)


def _difference(u, v):
    if isinstance(u, FunctionNet) and isinstance(v, FunctionNet):
        return FunctionNet(simplify(Binary("sub", u.expr, v.expr)), u.domain)
    return CombinedNet("sub", u, v, u.domain)


def gf_equal(u: GenFuncRep, v: GenFuncRep, sched: SamplingSchedule,
             compacts: Optional[Sequence[Compact]] = None, max_order: Optional[int] = None) -> Verdict:
    """[u] = [v] in G(B, Z): the difference is Z-negligible"""
    _same_algebra(u, v)
    compacts = compacts or u.compacts
    order = u.max_order if max_order is None else max_order
    verdict = is_negligible_fn(_difference(u.net, v.net), u.z, compacts, sched, order, u.grid)
    verdict.evidence["difference"] = _difference(u.net, v.net).label()
    return verdict


# ---------------------------------------------------------------------------
# Functorial action
# ---------------------------------------------------------------------------

def _maps_into(h: NetExpr, compacts: Sequence[Compact], domain: Interval, precision: int) -> bool:
    for k in compacts:
        for x in k.grid(33):
            try:
                value = evaluate(h, {"x": x}, precision)
            except NetDomainError:
                return False
            if not ((domain.lo is None or value > to_mpf(domain.lo)) and (domain.hi is None or value < to_mpf(domain.hi))):
                return False
    return True


def functor_action(i: GaugeMorphism, h: NetExpr, u: GenFuncRep, target_domain: Interval,
                   sched: SamplingSchedule, compacts: Optional[Sequence[Compact]] = None) -> GenFuncRep:
    """
    G(i, h): representative u(i(eps2), h(x)) over the target domain

    Raises:
        UnverifiedMorphismError: i is not a verified gauge morphism
        PreconditionError: h does not map the target compacts into the source domain,
            or the transported representative is not moderate
    """
    if not i.verified:
        raise UnverifiedMorphismError(f"gauge morphism {i.morphism.label()} is not verified")
    if i.source.name != u.b.name:
        raise IndexSetMismatchError(f"{i.morphism.label()} starts at {i.source.name}, the representative lives in {u.b.name}")
    if not isinstance(u.net, FunctionNet):
        raise PreconditionError("the functorial action needs an expression representative")
    if not free_vars(h) <= {"x"}:
        raise PreconditionError(f"h = {print_expr(h)} must be an expression in x")

    compacts = tuple(compacts or u.compacts)
    identity_map = i.morphism.map == Var(i.morphism.target.variable)
    identity_h = h == Var("x")
    if identity_map and identity_h and target_domain == u.domain and i.target.name == u.b.name:
        return GenFuncRep(u.net, u.b, u.z, compacts, u.max_order, u.verdict, u.grid)

    if not _maps_into(h, compacts, u.domain, sched.precision):
        raise PreconditionError(f"h = {print_expr(h)} does not map the compacts into {u.domain.label()}")

    mapping = {"x": h}
    if not identity_map:
        mapping["eps"] = i.morphism.map
    expr = simplify(substitute_vars(u.net.expr, mapping))
    net = FunctionNet(expr, target_domain)
    target_z = i.target_z or i.target
    verdict = is_moderate_fn(net, i.target, compacts, sched, u.max_order, u.grid)
    if verdict.fails:
        raise PreconditionError(f"transported representative {net.label()} is not moderate in {i.target.name}")
    return GenFuncRep(net, i.target, target_z, compacts, u.max_order, verdict, u.grid)


def _interval_inside(inner: Interval, outer: Interval) -> bool:
    lo_ok = outer.lo is None or (inner.lo is not None and inner.lo >= outer.lo)
    hi_ok = outer.hi is None or (inner.hi is not None and inner.hi <= outer.hi)
    return lo_ok and hi_ok


def identity_gauge_morphism(b: Gauge, z: Optional[Gauge] = None) -> GaugeMorphism:
    return GaugeMorphism(identity_morphism(b.index_set), b, b, "Ag2",
                         [("identity", Verdict.holds_({"identity": True}, source="symbolic"))], z or b, z or b)


def gf_restrict(u: GenFuncRep, subdomain: Interval, sched: SamplingSchedule,
                compacts: Optional[Sequence[Compact]] = None) -> GenFuncRep:
    """Restriction along the inclusion of a subinterval"""
    if not _interval_inside(subdomain, u.domain):
        raise PreconditionError(f"{subdomain.label()} is not inside {u.domain.label()}")
    compacts = tuple(compacts or [k for k in u.compacts if subdomain.contains_compact(k)])
    if not compacts:
        raise PreconditionError(f"no compact of the representative lies inside {subdomain.label()}")
    return functor_action(identity_gauge_morphism(u.b, u.z), Var("x"), u, subdomain, sched, compacts)


# ---------------------------------------------------------------------------
# Functor laws
# ---------------------------------------------------------------------------

LAW_GRID = 11


def _agreement(u: GenFuncRep, v: GenFuncRep, sched: SamplingSchedule) -> Verdict:
    """Structural equality after normalization, else relative agreement on schedule x grid"""
    a, b = normalize(u.net.expr), normalize(v.net.expr)
    evidence: Dict[str, Any] = {"left": print_expr(a), "right": print_expr(b), "structural": str(a == b)}
    if a == b:
        return Verdict.holds_(evidence, source="symbolic")
    tol = mpmath.mpf(10) ** (-(sched.precision - 20))
    worst = mpmath.mpf(0)
    with mpmath.workdps(sched.precision):
        for eps in sched.points():
            for k in u.compacts:
                for x in k.grid(LAW_GRID):
                    left = u.net.value(eps, x, sched.precision)
                    right = v.net.value(eps, x, sched.precision)
                    gap = abs(left - right) / (1 + abs(right))
                    if gap > worst:
                        worst = gap
                        evidence["witness"] = {"eps": eps, "x": x}
    evidence.update({"max_relative_gap": worst, "tolerance": tol})
    if worst <= tol:
        return Verdict.holds_(evidence)
    return Verdict.fails_(evidence)


def check_functor_identity(u: GenFuncRep, sched: SamplingSchedule) -> Verdict:
    """G(id, x) u = u"""
    image = functor_action(identity_gauge_morphism(u.b, u.z), Var("x"), u, u.domain, sched)
    return _agreement(image, u, sched)


def check_functor_composition(f: GaugeMorphism, g: GaugeMorphism, u: GenFuncRep, sched: SamplingSchedule,
                              h1: Optional[NetExpr] = None, h2: Optional[NetExpr] = None,
                              middle: Optional[Interval] = None, target: Optional[Interval] = None,
                              middle_compacts: Optional[Sequence[Compact]] = None,
                              target_compacts: Optional[Sequence[Compact]] = None) -> Verdict:
    """
    G(g o f, h1 o h2) u = G(g, h2) G(f, h1) u

    h1 maps the middle domain into the domain of u and h2 maps the target domain
    into the middle one; both default to x and both domains to the domain of u.
    """
    h1 = Var("x") if h1 is None else h1
    h2 = Var("x") if h2 is None else h2
    middle = middle or u.domain
    target = target or middle
    composite = compose_ag_morphisms(f, g, sched)
    h = simplify(substitute_vars(h1, {"x": h2}))
    direct = functor_action(composite, h, u, target, sched, target_compacts)
    first = functor_action(f, h1, u, middle, sched, middle_compacts)
    stepwise = functor_action(g, h2, first, target, sched, target_compacts)
    verdict = _agreement(direct, stepwise, sched)
    verdict.evidence.update({"composite": composite.morphism.label(), "h": print_expr(h)})
    return verdict


def check_restriction_derivation(u: GenFuncRep, subdomain: Interval, sched: SamplingSchedule) -> Verdict:
    """Restriction to a subinterval commutes with d/dx"""
    restricted_first = gf_derive(gf_restrict(u, subdomain, sched), sched, verify=False)
    derived_first = gf_restrict(gf_derive(u, sched, verify=False), subdomain, sched)
    return _agreement(restricted_first, derived_first, sched)
