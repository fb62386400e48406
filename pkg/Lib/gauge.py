"""
Asymptotic Gauges

Finitely presented gauges (principal, finite family, parametric), the
moderate-class oracle, pullback along index-set morphisms, Ag1/Ag2/Ag<=
morphism checks, equivalence and isomorphism, mu-images of gauges and the
interleaving construction of a principal gauge strictly between two others.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import mpmath

from errors import (
    GaugeConditionError,
    IndexSetMismatchError,
    InclusionFailure,
    InterleaveDepthError,
    NetDomainError,
    PreconditionError,
    UnverifiedMorphismError,
)
from index import (
    IS_S,
    IndexMorphism,
    SegmentedIndexSet,
    Verdict,
    all_of,
    as_eps_net,
    big_o,
    compose_morphisms,
    decades,
    eventually,
    format_number,
    limit,
    net_value,
    order_gt,
    sample_points_for,
)
from logger import get_logger
from netlang import (
    Binary,
    Const,
    NetExpr,
    Pow,
    SamplingSchedule,
    Unary,
    Var,
    evaluate,
    evaluate_interval,
    free_vars,
    growth_key,
    normalize,
    print_expr,
    substitute_vars,
    to_mpf,
)


logger = get_logger("gauge")

DEFAULT_PARAM_RANGE = 6
SCALARS = (Fraction(-2), Fraction(1, 2), Fraction(3), Fraction(10))
MU_SCALES = (Fraction(1, 2), Fraction(1), Fraction(2))
OUTGROWTH_FACTOR = 2
POWER_LIKE_TOLERANCE = 0.05


# ---------------------------------------------------------------------------
# Non-expression nets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerNet:
    """net ** power for nets that are not expression trees"""
    base: Any
    power: int

    def evaluate_at(self, point, precision: int = 50):
        with mpmath.workdps(precision):
            return net_value(self.base, IS_S, point, precision) ** self.power

    def evaluate_interval_at(self, point, precision: int = 50):
        return interval_value(self.base, point, precision) ** self.power

    def witness_points(self, lowest) -> List[Fraction]:
        announce = getattr(self.base, "witness_points", None)
        return announce(lowest) if announce is not None else []

    def label(self) -> str:
        return f"pow({net_label(self.base)}, {self.power})"


class HybridNet:
    """
    Piecewise net switching between `low` and `high` at eps_bar_1 > eps_bar_2 > ...

    On the block (eps_bar_{n+1}, eps_bar_n] the value is low for n odd and
    high for n even. eps_bar_1 = 1 and, for n >= 2, eps_bar_n is the largest
    10^-k below min(1/n, eps_bar_{n-1}) with n * low^n < high certified by
    interval arithmetic. Switching points are found on demand; below the last
    one that exists down to 10^-max_exponent the last block continues.
    """

    def __init__(self, low, high, precision: int = 50, max_exponent: Optional[int] = None):
        self.low = low
        self.high = high
        self.precision = precision
        self.max_exponent = max_exponent or precision
        self._switches: List[Fraction] = [Fraction(1)]
        self._exhausted = False

    @property
    def switches(self) -> Tuple[Fraction, ...]:
        """Switching points found so far"""
        return tuple(self._switches)

    def switch(self, n: int) -> Optional[Fraction]:
        """eps_bar_n, or None when no admissible point exists down to 10^-max_exponent"""
        while len(self._switches) < n and not self._exhausted:
            self._extend()
        return self._switches[n - 1] if n <= len(self._switches) else None

    def _extend(self):
        n = len(self._switches) + 1
        bound = min(Fraction(1, n), self._switches[-1])
        for k in range(1, self.max_exponent + 1):
            eps = Fraction(1, 10 ** k)
            if eps < bound and _certified_gap(self.low, self.high, n, eps, self.precision):
                self._switches.append(eps)
                logger.debug(f"eps_bar_{n} = {format_number(eps)}")
                return
        self._exhausted = True

    def block(self, point) -> int:
        exact = isinstance(point, Fraction)
        if not exact:
            point = to_mpf(point)
        n = 1
        while True:
            s = self.switch(n + 1)
            if s is None or not point <= (s if exact else to_mpf(s)):
                return n
            n += 1

    def branch(self, point):
        return self.low if self.block(point) % 2 == 1 else self.high

    def evaluate_at(self, point, precision: int = 50):
        return net_value(self.branch(point), IS_S, point, precision)

    def evaluate_interval_at(self, point, precision: int = 50):
        return interval_value(self.branch(point), point, precision)

    def witness_points(self, lowest) -> List[Fraction]:
        """Switching points down to `lowest`, with those of hybrid branches"""
        points = []
        n = 2
        while True:
            s = self.switch(n)
            if s is None or s < lowest:
                break
            points.append(s)
            n += 1
        for net in (self.low, self.high):
            announce = getattr(net, "witness_points", None)
            if announce is not None:
                points.extend(announce(lowest))
        return points

    def label(self) -> str:
        return f"hybrid({net_label(self.low)}, {net_label(self.high)})"


def net_label(net) -> str:
    if isinstance(net, NetExpr):
        return print_expr(net)
    if hasattr(net, "label"):
        return net.label()
    return repr(net)


def interval_value(net, point, precision: int = 50):
    """Interval enclosure of a net at a point of (0,1]"""
    if isinstance(net, NetExpr):
        return evaluate_interval(net, {"eps": point}, precision)
    if hasattr(net, "evaluate_interval_at"):
        return net.evaluate_interval_at(point, precision)
    raise NetDomainError(f"no interval enclosure for {net_label(net)}")


# ---------------------------------------------------------------------------
# Gauges
# ---------------------------------------------------------------------------

@dataclass
class Gauge:
    """
    Finitely presented asymptotic gauge.

    kind "principal": nets = (b,), generators b^m for m = 1..R
    kind "family": the listed nets
    kind "parametric": nets = (template,), generators template[parameter := v] for v in values
    """
    name: str
    index_set: SegmentedIndexSet
    kind: str
    nets: Tuple[Any, ...]
    parameter: Optional[str] = None
    values: Tuple[Fraction, ...] = ()
    param_range: int = DEFAULT_PARAM_RANGE
    _cache: Dict[Any, List[Any]] = field(default_factory=dict, repr=False, compare=False)

    def generators(self, extended: bool = False) -> List[Any]:
        """Tested generators, slowest growth first; `extended` adds sums of parameters / doubled powers"""
        key = ("generators", extended)
        if key not in self._cache:
            self._cache[key] = self._build_generators(extended)
        return self._cache[key]

    def _build_generators(self, extended: bool) -> List[Any]:
        if self.kind == "principal":
            top = 2 * self.param_range if extended else self.param_range
            return [_power(self.nets[0], m) for m in range(1, top + 1)]
        if self.kind == "family":
            return list(self.nets)
        values = sorted(set(self.values))
        if extended:
            values = sorted(set(values) | {a + b for a in values for b in values})
        return [self.instantiate(v) for v in values]

    def instantiate(self, value: Fraction) -> NetExpr:
        return normalize(substitute_vars(self.nets[0], {self.parameter: Const(Fraction(value))}))

    def describe(self) -> Dict[str, Any]:
        info = {
            "name": self.name,
            "index_set": self.index_set.name,
            "kind": self.kind,
            "nets": [net_label(n) for n in self.nets],
        }
        if self.kind == "parametric":
            info["parameter"] = self.parameter
            info["values"] = [format_number(v) for v in self.values]
        if self.kind == "principal":
            info["powers"] = str(self.param_range)
        return info


def _power(net, m: int):
    if m == 1:
        return net
    if isinstance(net, NetExpr):
        return normalize(Pow(net, Const(m)))
    return PowerNet(net, m)


def principal(name: str, generator, index_set: SegmentedIndexSet = IS_S, param_range: int = DEFAULT_PARAM_RANGE) -> Gauge:
    return Gauge(name, index_set, "principal", (generator,), param_range=param_range)


def finite_family(name: str, nets: Sequence[Any], index_set: SegmentedIndexSet = IS_S) -> Gauge:
    return Gauge(name, index_set, "family", tuple(nets))


def parametric(name: str, template: NetExpr, parameter: str, values: Sequence, index_set: SegmentedIndexSet = IS_S) -> Gauge:
    if index_set.variable == parameter:
        raise PreconditionError(f"parameter '{parameter}' clashes with the index variable")
    values = tuple(Fraction(v) for v in values)
    return Gauge(name, index_set, "parametric", (template,), parameter, values, param_range=len(values))


# ---------------------------------------------------------------------------
# Moderate class oracle
# ---------------------------------------------------------------------------

def _uniformly_dominates(x, generators: Sequence[Any]) -> bool:
    """
    True when x's growth key beats every generator key in a coordinate where
    all generator keys agree, so no untested parameter value can catch up
    """
    if not isinstance(x, NetExpr):
        return False
    kx = growth_key(x)
    keys = [growth_key(g) for g in generators if isinstance(g, NetExpr)]
    if not kx.in_fragment or kx.is_zero or len(keys) != len(generators):
        return False
    if not all(k.in_fragment and not k.is_zero for k in keys):
        return False
    tx = kx.as_tuple()
    tuples = [k.as_tuple() for k in keys]
    for i in range(3):
        coordinate = {t[i] for t in tuples}
        if len(coordinate) != 1:
            return False
        value = coordinate.pop()
        if tx[i] > value:
            return True
        if tx[i] < value:
            return False
    return False


def _power_scale(gauge: Gauge, sched: SamplingSchedule) -> Optional[Tuple[Any, float]]:
    """
    (b, c) when every tested generator behaves like b^c' with c' <= c for
    the slowest generator b; None when the family is not power-like
    """
    if gauge.kind == "principal":
        return gauge.nets[0], float(2 * gauge.param_range)
    if gauge.kind != "parametric":
        return None
    b = gauge.generators()[0]
    points = gauge.index_set.sample_points(sched)
    shallow, deep = points[len(points) // 2], points[-1]
    top = 0.0
    with mpmath.workdps(sched.precision):
        try:
            base = [abs(net_value(b, gauge.index_set, p, sched.precision)) for p in (shallow, deep)]
            if min(base) <= 1:
                return None
            for g in gauge.generators(extended=True):
                exponents = [float(mpmath.log(abs(net_value(g, gauge.index_set, p, sched.precision))) / mpmath.log(v))
                             for p, v in zip((shallow, deep), base)]
                if abs(exponents[1] - exponents[0]) > POWER_LIKE_TOLERANCE * abs(exponents[1]):
                    return None
                top = max(top, exponents[1])
        except NetDomainError:
            return None
    return b, top


def _outgrows_powers(x, gauge: Gauge, sched: SamplingSchedule) -> Optional[Dict[str, Any]]:
    """
    Sampled certificate that log|x| / log|b| is unbounded for the slowest
    generator b of a power-like gauge: the deeper half of the quotients
    peaks above OUTGROWTH_FACTOR times the shallower half and times the
    largest tested exponent.
    """
    scale = _power_scale(gauge, sched)
    if scale is None:
        return None
    b, top = scale
    index_set = gauge.index_set
    quotients = []
    with mpmath.workdps(sched.precision):
        for p in sample_points_for((x, b), index_set, sched):
            try:
                xv = abs(net_value(x, index_set, p, sched.precision))
                bv = abs(net_value(b, index_set, p, sched.precision))
            except NetDomainError:
                continue
            if xv > 1 and bv > 1:
                quotients.append((p, decades(index_set, p), float(mpmath.log(xv) / mpmath.log(bv))))
    if len(quotients) < 4:
        return None
    bottom = max(d for _, d, _ in quotients)
    tail = [q for q in quotients if q[1] >= bottom / 2]
    middle = (min(d for _, d, _ in tail) + bottom) / 2
    early = [q for _, d, q in tail if d < middle]
    late = [(p, q) for p, d, q in tail if d >= middle]
    if not early or not late:
        return None
    point, peak = max(late, key=lambda item: item[1])
    if peak > OUTGROWTH_FACTOR * max(early) and peak > OUTGROWTH_FACTOR * top:
        return {"point": point, "log_quotient": peak, "shallower_peak": max(early)}
    return None


def moderate_in(x, gauge: Gauge, sched: SamplingSchedule) -> Verdict:
    """
    x in R_M(B): big-O of some presented generator

    Generators are tried slowest first, then the extended presentation; the
    first Holds answers. Fails needs more than the tested generators: a finite
    family, a growth key beating every generator in a shared coordinate, or
    an unbounded log-quotient against the slowest generator of a power-like gauge.
    """
    verdicts = []
    base = gauge.generators()
    extra = [b for b in gauge.generators(extended=True) if b not in base]
    for b in base + extra:
        verdict = big_o(x, b, gauge.index_set, sched)
        if verdict.holds:
            return Verdict.holds_({"generator": net_label(b), "big_o": verdict}, source=verdict.source)
        verdicts.append(verdict)

    evidence: Dict[str, Any] = {"gauge": gauge.name, "tested_generators": len(verdicts)}
    if any(v.inconclusive for v in verdicts):
        return Verdict.inconclusive_(evidence)
    if verdicts:
        evidence["against_largest"] = verdicts[-1]
    source = "symbolic" if all(v.source == "symbolic" for v in verdicts) else "sampled"
    if gauge.kind == "family":
        return Verdict.fails_(evidence, source=source)
    evidence["dominates_family"] = _uniformly_dominates(x, base)
    if evidence["dominates_family"]:
        return Verdict.fails_(evidence, source=source)
    if gauge.kind in ("principal", "parametric"):
        outgrowth = _outgrows_powers(x, gauge, sched)
        if outgrowth is not None:
            evidence["outgrowth"] = outgrowth
            return Verdict.fails_(evidence)
    evidence["reason"] = "x outgrows the tested generators only"
    return Verdict.inconclusive_(evidence)


def inclusion(first: Gauge, second: Gauge, sched: SamplingSchedule) -> Verdict:
    """R_M(first) contained in R_M(second), checked generator by generator"""
    if first.index_set != second.index_set:
        raise IndexSetMismatchError(f"{first.name} lives on {first.index_set!r}, {second.name} on {second.index_set!r}")
    parts = []
    for b in first.generators():
        verdict = moderate_in(b, second, sched)
        verdict.evidence["net"] = net_label(b)
        parts.append(verdict)
        if verdict.fails:
            evidence = {"inclusion": f"{first.name} in {second.name}", "witness": net_label(b)}
            return Verdict.fails_(dict(evidence, parts=parts), source=verdict.source)
    evidence = {"inclusion": f"{first.name} in {second.name}"}
    if first.kind == "family" and len(first.generators()) > 1:
        evidence["generator_level"] = "finite family: checked on the listed nets only"
    return all_of(parts, evidence)


def gauges_equivalent(first: Gauge, second: Gauge, sched: SamplingSchedule) -> Verdict:
    """R_M(first) = R_M(second)"""
    return all_of([inclusion(first, second, sched), inclusion(second, first, sched)],
                  {"equivalence": f"{first.name} ~ {second.name}"})


def moderate_class_gauge(gauge: Gauge) -> Gauge:
    """The gauge R_M(B) presented by generators, scalar multiples and absolute sums"""
    generators = gauge.generators()
    nets: List[Any] = list(generators)
    for b in generators:
        if isinstance(b, NetExpr):
            nets.append(normalize(Binary("mul", Const(2), b)))
    for b, c in zip(generators, generators[1:]):
        if isinstance(b, NetExpr) and isinstance(c, NetExpr):
            nets.append(normalize(Binary("add", Unary("abs", b), Unary("abs", c))))
    return finite_family(f"R_M({gauge.name})", nets, gauge.index_set)


# ---------------------------------------------------------------------------
# Axioms
# ---------------------------------------------------------------------------

@dataclass
class AxiomReport:
    gauge: Gauge
    verdicts: Dict[str, Verdict]

    @property
    def all_hold(self) -> bool:
        return all(v.holds for v in self.verdicts.values())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "gauge": self.gauge.describe(),
            "axioms": {name: v.to_dict() for name, v in self.verdicts.items()},
            "all_hold": str(self.all_hold),
        }


def _search(statement, candidates: Sequence[Any]) -> Verdict:
    """First candidate for which statement(candidate) Holds"""
    seen = []
    for c in candidates:
        verdict = statement(c)
        if verdict.holds:
            return Verdict.holds_({"witness": net_label(c)}, source=verdict.source)
        seen.append(verdict)
    if any(v.inconclusive for v in seen):
        return Verdict.inconclusive_({"candidates": len(seen)})
    source = "symbolic" if all(v.source == "symbolic" for v in seen) else "sampled"
    return Verdict.fails_({"candidates": len(seen)}, source=source)


def _product(i, j):
    if isinstance(i, NetExpr) and isinstance(j, NetExpr):
        return normalize(Binary("mul", i, j))
    return _ProductNet(i, j)


@dataclass(frozen=True)
class _ProductNet:
    left: Any
    right: Any
    absolute_sum: bool = False

    def evaluate_at(self, point, precision: int = 50):
        with mpmath.workdps(precision):
            a = net_value(self.left, IS_S, point, precision)
            b = net_value(self.right, IS_S, point, precision)
            return abs(a) + abs(b) if self.absolute_sum else a * b


def _abs_sum(i, j):
    if isinstance(i, NetExpr) and isinstance(j, NetExpr):
        return normalize(Binary("add", Unary("abs", i), Unary("abs", j)))
    return _ProductNet(i, j, absolute_sum=True)


def verify_gauge_axioms(gauge: Gauge, sched: SamplingSchedule) -> AxiomReport:
    """
    Check the five gauge axioms on the tested presentation

    (i) real-valued nets, (ii) some generator tends to +infinity, (iii) closure
    of products, (iv) closure of scalar multiples, (v) absolute sums bounded by
    an eventually positive generator. Each axiom reports independently.
    """
    index_set = gauge.index_set
    generators = gauge.generators()
    candidates = gauge.generators(extended=True)
    verdicts: Dict[str, Verdict] = {}

    bad = []
    for b in generators:
        for p in index_set.sample_points(sched):
            try:
                net_value(b, index_set, p, sched.precision)
            except NetDomainError as e:
                bad.append({"net": net_label(b), "point": p, "error": str(e)})
                break
    verdicts["i"] = Verdict.fails_({"undefined": bad}) if bad else Verdict.holds_(
        {"generators": len(generators)}, source="symbolic")

    limits = [(b, limit(b, index_set, sched)) for b in generators]
    infinite = [b for b, lim in limits if lim.is_plus_infinity]
    if infinite:
        source = "symbolic" if all(isinstance(b, NetExpr) for b in infinite[:1]) and limits[0][1].source == "symbolic" else "sampled"
        verdicts["ii"] = Verdict.holds_({"unbounded_generator": net_label(infinite[0])}, source=source)
    elif any(not lim.determined for _, lim in limits):
        verdicts["ii"] = Verdict.inconclusive_({"limits": [lim for _, lim in limits]})
    else:
        verdicts["ii"] = Verdict.fails_({"limits": {net_label(b): lim for b, lim in limits}},
                                        source=limits[0][1].source if limits else "symbolic")

    product_parts = []
    for a, i in enumerate(generators):
        for j in generators[a:]:
            ij = _product(i, j)
            part = _search(lambda p: big_o(ij, p, index_set, sched), candidates)
            part.evidence["pair"] = [net_label(i), net_label(j)]
            product_parts.append(part)
    verdicts["iii"] = all_of(product_parts)

    scalar_parts = []
    for i in generators:
        for r in SCALARS:
            ri = normalize(Binary("mul", Const(r), i)) if isinstance(i, NetExpr) else i
            part = _search(lambda s: big_o(ri, s, index_set, sched), candidates)
            part.evidence["scalar"] = r
            scalar_parts.append(part)
    verdicts["iv"] = all_of(scalar_parts)

    zero = Const(0)
    positive = [s for s in candidates if order_gt(s, zero, index_set, sched).holds]
    sum_parts = []
    for a, i in enumerate(generators):
        for j in generators[a:]:
            total = _abs_sum(i, j)
            part = _search(lambda s: big_o(total, s, index_set, sched), positive)
            part.evidence["pair"] = [net_label(i), net_label(j)]
            sum_parts.append(part)
    verdicts["v"] = all_of(sum_parts, {"positive_candidates": len(positive)})

    report = AxiomReport(gauge, verdicts)
    logger.info(f"axioms of {gauge.name}: " + ", ".join(f"{k}={v.tag.value}" for k, v in verdicts.items()))
    return report


# ---------------------------------------------------------------------------
# Pullback and gauge morphisms
# ---------------------------------------------------------------------------

def _fresh_parameter(gauge: Gauge, taken: str) -> str:
    for name in ("k", "m", "j", "a"):
        if name != taken and name != gauge.parameter:
            return name
    return "p"


def pullback(gauge: Gauge, f: IndexMorphism) -> Gauge:
    """
    B o f = {b o f | b in B}, a gauge on the target of f

    Raises:
        UnverifiedMorphismError: f has not passed check_morphism
        IndexSetMismatchError: f does not start at the index set of B
    """
    if not f.verified:
        raise UnverifiedMorphismError(f"morphism {f.label()} is not verified")
    if f.source != gauge.index_set:
        raise IndexSetMismatchError(f"{gauge.name} lives on {gauge.index_set!r}, {f.label()} starts at {f.source!r}")
    if f.map == Var(f.target.variable) and f.source == f.target:
        return gauge

    name = f"{gauge.name} o {f.label()}"
    if gauge.kind == "parametric":
        template, parameter = gauge.nets[0], gauge.parameter
        if parameter == f.target.variable:
            fresh = _fresh_parameter(gauge, f.target.variable)
            template = substitute_vars(template, {parameter: Var(fresh)})
            parameter = fresh
        return Gauge(name, f.target, "parametric", (f.pull(template),), parameter, gauge.values, gauge.param_range)
    nets = tuple(_pull_net(f, b) for b in gauge.nets)
    return Gauge(name, f.target, gauge.kind, nets, param_range=gauge.param_range)


@dataclass(frozen=True)
class _PulledNet:
    net: Any
    morphism: IndexMorphism

    def evaluate_at(self, point, precision: int = 50):
        inner = self.morphism(point, precision)
        return net_value(self.net, self.morphism.source, inner, precision)

    def label(self) -> str:
        return f"{net_label(self.net)} o {self.morphism.label()}"


def _pull_net(f: IndexMorphism, net):
    if isinstance(net, NetExpr):
        return f.pull(net)
    return _PulledNet(net, f)


AG_KINDS = ("Ag1", "Ag2", "Agle")


@dataclass
class GaugeMorphism:
    """An index-set morphism together with the gauges it connects and the inclusion record"""
    morphism: IndexMorphism
    source: Gauge
    target: Gauge
    kind: str
    record: List[Tuple[str, Verdict]]
    source_z: Optional[Gauge] = None
    target_z: Optional[Gauge] = None

    @property
    def verified(self) -> bool:
        return all(v.holds for _, v in self.record)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "map": print_expr(self.morphism.map),
            "source": self.source.name,
            "target": self.target.name,
            "verified": str(self.verified),
            "inclusions": {label: v.to_dict() for label, v in self.record},
        }


def _require_inclusion(label: str, verdict: Verdict) -> Tuple[str, Verdict]:
    if verdict.fails:
        witness = verdict.evidence.get("witness")
        raise InclusionFailure(f"inclusion {label} fails (witness {witness})", witness=witness, verdict=verdict)
    return label, verdict


def check_ag_morphism(
    f: IndexMorphism,
    source: Gauge,
    target: Gauge,
    sched: SamplingSchedule,
    kind: str = "Ag1",
    source_z: Optional[Gauge] = None,
    target_z: Optional[Gauge] = None,
) -> GaugeMorphism:
    """
    Verify f as a morphism of gauges

    Ag1 and Agle: R_M(B1 o f) = R_M(B2). Ag2 on pairs (B1, Z1) -> (B2, Z2):
    R_M(B1 o f) in R_M(B2) and R_M(Z2) in R_M(Z1 o f).

    Raises:
        InclusionFailure: A required inclusion Fails; carries the witness generator
    """
    if kind not in AG_KINDS:
        raise PreconditionError(f"unknown gauge morphism kind '{kind}'")
    if not f.verified:
        raise UnverifiedMorphismError(f"morphism {f.label()} is not verified")
    if f.source != source.index_set or f.target != target.index_set:
        raise IndexSetMismatchError(f"{f.label()} does not connect {source.name} and {target.name}")

    pulled = pullback(source, f)
    record = []
    if kind in ("Ag1", "Agle"):
        record.append(_require_inclusion(f"{pulled.name} in {target.name}", inclusion(pulled, target, sched)))
        record.append(_require_inclusion(f"{target.name} in {pulled.name}", inclusion(target, pulled, sched)))
    else:
        if source_z is None or target_z is None:
            raise PreconditionError("Ag2 morphisms need the negligibility gauges of both pairs")
        record.append(_require_inclusion(f"{pulled.name} in {target.name}", inclusion(pulled, target, sched)))
        pulled_z = pullback(source_z, f)
        record.append(_require_inclusion(f"{target_z.name} in {pulled_z.name}", inclusion(target_z, pulled_z, sched)))

    morphism = GaugeMorphism(f, source, target, kind, record, source_z, target_z)
    logger.info(f"{kind} check of {f.label()}: {source.name} -> {target.name}: "
                + ("verified" if morphism.verified else "not verified"))
    return morphism


def check_agle_morphism(f: IndexMorphism, source: Gauge, target: Gauge, sched: SamplingSchedule) -> GaugeMorphism:
    """Ag<= arrows are stated by the same equality of moderate classes as Ag1"""
    return check_ag_morphism(f, source, target, sched, kind="Agle")


def compose_ag_morphisms(f: GaugeMorphism, g: GaugeMorphism, sched: SamplingSchedule) -> GaugeMorphism:
    """g o f with re-verification of the composite"""
    composite = compose_morphisms(f.morphism, g.morphism, sched)
    return check_ag_morphism(composite, f.source, g.target, sched, kind=f.kind if f.kind == g.kind else "Ag1",
                             source_z=f.source_z, target_z=g.target_z)


def _pointwise_identity(m: IndexMorphism, sched: SamplingSchedule) -> Verdict:
    if m.map == Var(m.target.variable):
        return Verdict.holds_({"map": m.map}, source="symbolic")
    worst = mpmath.mpf(0)
    with mpmath.workdps(sched.precision):
        tolerance = mpmath.mpf(10) ** (-(sched.precision - 10))
        for p in m.target.sample_points(sched):
            value = m(p, sched.precision)
            gap = abs(value - to_mpf(p)) / abs(to_mpf(p))
            worst = max(worst, gap)
        if worst <= tolerance:
            return Verdict.holds_({"max_relative_gap": worst, "map": m.map})
    return Verdict.fails_({"max_relative_gap": worst, "map": m.map})


def isomorphic_via(f: IndexMorphism, g: IndexMorphism, first: Gauge, second: Gauge, sched: SamplingSchedule) -> Verdict:
    """f in Ag1(B1, B2), g in Ag1(B2, B1) and both composites are identities"""
    try:
        forward = check_ag_morphism(f, first, second, sched)
        backward = check_ag_morphism(g, second, first, sched)
    except InclusionFailure as e:
        return Verdict.fails_({"failed_inclusion": str(e), "witness": e.witness})
    legs = [v for _, v in forward.record + backward.record]
    round_trips = [
        _pointwise_identity(compose_morphisms(f, g, sched), sched),
        _pointwise_identity(compose_morphisms(g, f, sched), sched),
    ]
    return all_of(legs + round_trips, {"isomorphism": f"{first.name} ~= {second.name}"})


# ---------------------------------------------------------------------------
# mu-images and the exponential of a gauge
# ---------------------------------------------------------------------------

def _mu_of(mu: NetExpr, net):
    if isinstance(net, NetExpr):
        return normalize(substitute_vars(mu, {"x": net}))
    raise PreconditionError("mu can only be applied to expression nets")


def check_mu(mu: NetExpr, sched: SamplingSchedule) -> Verdict:
    """mu non-decreasing on a test grid and mu(x) -> +infinity"""
    if not free_vars(mu) <= {"x"}:
        raise PreconditionError("mu must be an expression in x")
    grid = [Fraction(k, 4) for k in range(-8, 201)]
    values = [evaluate(mu, {"x": x}, sched.precision) for x in grid]
    drops = [grid[k + 1] for k in range(len(values) - 1) if values[k + 1] < values[k]]
    if drops:
        return Verdict.fails_({"decreasing_at": drops[0]})
    at_infinity = limit(substitute_vars(mu, {"x": Binary("div", Const(1), Var("eps"))}), IS_S, sched)
    if not at_infinity.is_plus_infinity:
        return Verdict.fails_({"limit": at_infinity}, source=at_infinity.source)
    return Verdict.holds_({"limit": at_infinity}, source=at_infinity.source)


def _square_candidates(gauge: Gauge) -> List[Any]:
    """Extended generators plus one step past them: template[2v + 1] or b^(2R + 1)"""
    candidates = list(gauge.generators(extended=True))
    if gauge.kind == "parametric":
        candidates += [gauge.instantiate(2 * v + 1) for v in sorted(set(gauge.values))]
    elif gauge.kind == "principal":
        candidates.append(_power(gauge.nets[0], 2 * gauge.param_range + 1))
    return candidates


def mu_gauge(gauge: Gauge, mu: NetExpr, sched: SamplingSchedule, scales: Sequence[Fraction] = MU_SCALES, name: str = "") -> Gauge:
    """
    mu(B) = {mu(H * b) | H in scales, b in B}

    Raises:
        PreconditionError: mu is not non-decreasing or does not tend to +infinity
        GaugeConditionError: some generator b has no c with mu(b)^2 < mu(c) eventually
    """
    verdict = check_mu(mu, sched)
    if verdict.fails:
        raise PreconditionError(f"mu = {print_expr(mu)} is not admissible: {verdict.evidence}")

    generators = gauge.generators()
    candidates = _square_candidates(gauge)
    for b in generators:
        squared = normalize(Pow(_mu_of(mu, b), Const(2)))
        found = _search(lambda c: order_gt(_mu_of(mu, c), squared, gauge.index_set, sched), candidates)
        if not found.holds:
            raise GaugeConditionError(f"no c with mu(b)^2 < mu(c) for b = {net_label(b)}")

    nets = [_mu_of(mu, normalize(Binary("mul", Const(h), b))) for b in generators for h in scales]
    label = name or f"{print_expr(mu)}({gauge.name})"
    return finite_family(label, nets, gauge.index_set)


EXP_MU = Unary("exp", Var("x"))


def exp_gauge(gauge: Gauge, sched: SamplingSchedule, scales: Sequence[Fraction] = MU_SCALES) -> Gauge:
    """e^B = {exp(H * b)}"""
    return mu_gauge(gauge, EXP_MU, sched, scales, name=f"e^{gauge.name}")


def functor_E_mu(mu: NetExpr, f: GaugeMorphism, sched: SamplingSchedule, scales: Sequence[Fraction] = MU_SCALES) -> GaugeMorphism:
    """
    E_mu on an Ag<= arrow: the same index map between mu(B1) and mu(B2)

    Raises:
        GaugeConditionError: The retargeted arrow fails verification
    """
    if f.kind not in ("Agle", "Ag1") or not f.verified:
        raise PreconditionError("E_mu acts on verified Ag<= arrows")
    source = mu_gauge(f.source, mu, sched, scales)
    target = source if f.target is f.source else mu_gauge(f.target, mu, sched, scales)
    if f.morphism.map == Var(f.morphism.target.variable) and f.source is f.target:
        return GaugeMorphism(f.morphism, source, target, "Agle",
                             [("identity", Verdict.holds_({"identity": True}, source="symbolic"))])
    try:
        return check_ag_morphism(f.morphism, source, target, sched, kind="Agle")
    except InclusionFailure as e:
        raise GaugeConditionError(f"E_mu({f.morphism.label()}) is not an arrow: {e}")


def monotone_transport(mu: NetExpr, b1, b2, index_set: SegmentedIndexSet, sched: SamplingSchedule) -> Verdict:
    """b1 < b2 eventually implies mu(b1) = O(mu(b2)) for non-decreasing mu"""
    order = order_gt(b2, b1, index_set, sched)
    if not order.holds:
        return Verdict.inconclusive_({"order": order}) if order.inconclusive else Verdict.fails_({"order": order})
    return big_o(_mu_of(mu, b1), _mu_of(mu, b2), index_set, sched)


# ---------------------------------------------------------------------------
# Interleaving of principal gauges
# ---------------------------------------------------------------------------

@dataclass
class InterleaveWitness:
    """Certified n * b1(eps_bar)^n < b2(eps_bar)"""
    n: int
    eps_bar: Fraction
    lhs: Any
    rhs: Any
    verified: bool

    def to_dict(self) -> Dict[str, str]:
        return {
            "n": str(self.n),
            "eps_bar": format_number(self.eps_bar),
            "lhs": format_number(self.lhs),
            "rhs": format_number(self.rhs),
            "verified": str(self.verified),
        }


def _certified_gap(b1, b2, n: int, eps: Fraction, precision: int) -> bool:
    try:
        lhs = interval_value(b1, eps, precision) ** n * n
        rhs = interval_value(b2, eps, precision)
    except NetDomainError:
        return False
    return (lhs < rhs) is True


def _point_values(b1, b2, n: int, eps: Fraction, precision: int):
    with mpmath.workdps(precision):
        lhs = n * net_value(b1, IS_S, eps, precision) ** n
        rhs = net_value(b2, IS_S, eps, precision)
    return lhs, rhs


def _check_interleave_preconditions(b1, b2, sched: SamplingSchedule):
    one = Const(1)
    for label, net in (("b1", b1), ("b2", b2)):
        if not order_gt(net, one, IS_S, sched).holds:
            raise PreconditionError(f"{label} = {net_label(net)} is not eventually greater than 1")
    if isinstance(b1, NetExpr) and isinstance(b2, NetExpr):
        if not big_o(b1, b2, IS_S, sched).holds:
            raise PreconditionError("b1 = O(b2) does not hold")
        strict = moderate_in(b2, principal("AG(b1)", b1), sched)
        if not strict.fails:
            raise PreconditionError(f"b2 is not shown outside the moderate class of b1 ({strict.tag.value})")
    else:
        below = eventually(
            lambda p: net_value(b1, IS_S, p, sched.precision) <= net_value(b2, IS_S, p, sched.precision),
            IS_S, sched)
        if not below.holds:
            raise PreconditionError("b1 <= b2 does not hold eventually")


def interleave(b1, b2, depth: int, sched: SamplingSchedule, max_exponent: Optional[int] = None) -> Tuple[HybridNet, List[InterleaveWitness]]:
    """
    Principal generator strictly between AG(b1) and AG(b2)

    The hybrid of b1 and b2 (see HybridNet) with its first `depth` switching
    points certified up front.

    Raises:
        PreconditionError: b1, b2 are not eventually > 1, or AG(b2) is not strictly larger
        InterleaveDepthError: No admissible switching point down to 10^-max_exponent
    """
    if depth < 2:
        raise PreconditionError("interleaving depth must be at least 2")
    _check_interleave_preconditions(b1, b2, sched)
    max_exponent = max_exponent or sched.precision

    hybrid = HybridNet(b1, b2, sched.precision, max_exponent)
    witnesses: List[InterleaveWitness] = []
    for n in range(2, depth + 1):
        chosen = hybrid.switch(n)
        if chosen is None:
            raise InterleaveDepthError(f"no admissible eps_bar_{n} down to 1e-{max_exponent}")
        lhs, rhs = _point_values(b1, b2, n, chosen, sched.precision)
        witnesses.append(InterleaveWitness(n, chosen, lhs, rhs, True))
    return hybrid, witnesses


def _strictness(hybrid: HybridNet, sched: SamplingSchedule) -> Dict[str, Verdict]:
    return {
        "hybrid outside AG(b1)": moderate_in(hybrid, principal("AG(b1)", hybrid.low), sched),
        "b2 outside AG(hybrid)": moderate_in(hybrid.high, principal("AG(hybrid)", hybrid), sched),
    }


def verify_interleaving(hybrid: HybridNet, witnesses: Sequence[InterleaveWitness], sched: SamplingSchedule) -> Verdict:
    """
    R_M(AG(b1)) < R_M(AG(b3)) < R_M(AG(b2)), both strict

    The sandwich b1 <= b3 <= b2 gives the inclusions. Strictness needs the
    certified witnesses of both parities and the moderate-class oracle to
    place b3 outside AG(b1) and b2 outside AG(b3).
    """
    sandwich = eventually(
        lambda p: net_value(hybrid.low, IS_S, p, sched.precision) <= net_value(hybrid.high, IS_S, p, sched.precision),
        IS_S, sched)
    evidence: Dict[str, Any] = {"sandwich": sandwich, "witnesses": [w.to_dict() for w in witnesses]}
    if not all(w.verified for w in witnesses):
        return Verdict.fails_(evidence)
    parities = {w.n % 2 for w in witnesses}
    if parities != {0, 1}:
        evidence["reason"] = "witnesses of both parities are needed"
        return Verdict.inconclusive_(evidence)
    values = [hybrid.evaluate_at(w.eps_bar, sched.precision) for w in witnesses]
    for w, value in zip(witnesses, values):
        expected = w.rhs if w.n % 2 == 0 else None
        if expected is not None and value != expected:
            return Verdict.fails_(dict(evidence, reason=f"hybrid misses b2 at eps_bar_{w.n}"))
    if not sandwich.holds:
        return Verdict(sandwich.tag, evidence, sandwich.source)

    strict = _strictness(hybrid, sched)
    evidence["strictness"] = strict
    for label, verdict in strict.items():
        if verdict.holds:
            return Verdict.fails_(dict(evidence, reason=f"not strict: {label} is refuted"))
    if any(v.inconclusive for v in strict.values()):
        evidence["reason"] = "strictness not decided by the moderate-class oracle"
        return Verdict.inconclusive_(evidence)
    return Verdict.holds_(evidence)


def interleave_chain(b1, b2, steps: int, depth: int, sched: SamplingSchedule) -> Tuple[List[Any], List[Verdict]]:
    """
    Repeated interleaving towards b1: b1 < h_steps < ... < h_1 < b2

    Returns:
        (nets from b1 up to b2, strictness verdict of each construction)
    """
    upper = b2
    nets = [b2]
    verdicts = []
    for _ in range(steps):
        hybrid, witnesses = interleave(b1, upper, depth, sched)
        verdicts.append(verify_interleaving(hybrid, witnesses, sched))
        nets.append(hybrid)
        upper = hybrid
    nets.append(b1)
    return list(reversed(nets)), verdicts
