"""
Index Sets and Asymptotic Oracles

Sets of indices (the interval (0,1] and the reversed naturals), the eventual
quantifier, big-O, limits, the strict order of nets and morphisms of index
sets. Every oracle answers with a three-valued Verdict: a symbolic answer
when all nets lie in the growth fragment, a sampled one over a
SamplingSchedule otherwise.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence

import mpmath
import numpy as np

from errors import (
    IndexSetMismatchError,
    MorphismMismatchError,
    NetDomainError,
    UnsupportedIndexSetError,
    UnverifiedMorphismError,
)
from logger import get_logger
from netlang import (
    Binary,
    Compose,
    Const,
    NetExpr,
    Pow,
    SamplingSchedule,
    Unary,
    Var,
    eliminate_compose,
    evaluate,
    fragment_form,
    free_vars,
    growth_key,
    minus_log_eps,
    normalize,
    print_expr,
    substitute,
    substitute_vars,
    to_mpf,
)


logger = get_logger("index")

SLOPE_TOLERANCE = 0.05
MIN_DECADES = 3.0
CAUCHY_TOLERANCE = mpmath.mpf("1e-8")
LOG_CLIP = 1e6


def format_number(value: Any) -> str:
    """Deterministic text for report values: 17 significant digits for floats"""
    if value is None:
        return "null"
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    if isinstance(value, (bool, str)):
        return str(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float) and not math.isfinite(value):
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    if isinstance(value, (float, mpmath.mpf)):
        if mpmath.isinf(value):
            return "inf" if value > 0 else "-inf"
        return mpmath.nstr(mpmath.mpf(value), 17)
    return str(value)


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------

class VerdictTag(Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class Verdict:
    """Outcome of an oracle run with the evidence behind it"""
    tag: VerdictTag
    evidence: Dict[str, Any] = field(default_factory=dict)
    source: str = "sampled"

    @property
    def holds(self) -> bool:
        return self.tag is VerdictTag.HOLDS

    @property
    def fails(self) -> bool:
        return self.tag is VerdictTag.FAILS

    @property
    def inconclusive(self) -> bool:
        return self.tag is VerdictTag.INCONCLUSIVE

    @staticmethod
    def holds_(evidence=None, source="sampled") -> "Verdict":
        return Verdict(VerdictTag.HOLDS, evidence or {}, source)

    @staticmethod
    def fails_(evidence=None, source="sampled") -> "Verdict":
        return Verdict(VerdictTag.FAILS, evidence or {}, source)

    @staticmethod
    def inconclusive_(evidence=None) -> "Verdict":
        return Verdict(VerdictTag.INCONCLUSIVE, evidence or {}, "sampled")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.tag.value,
            "source": self.source,
            "evidence": _serialize(self.evidence),
        }


def _serialize(value):
    if isinstance(value, dict):
        return {str(k): _serialize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_serialize(v) for v in value]
    if isinstance(value, Verdict):
        return value.to_dict()
    if isinstance(value, NetExpr):
        return print_expr(value)
    if isinstance(value, Limit):
        return value.to_dict()
    return format_number(value)


def all_of(verdicts: Sequence[Verdict], evidence: Optional[Dict[str, Any]] = None) -> Verdict:
    """Conjunction: Fails dominates Inconclusive, which dominates Holds"""
    evidence = dict(evidence or {})
    evidence.setdefault("parts", list(verdicts))
    source = "symbolic" if all(v.source == "symbolic" for v in verdicts) else "sampled"
    if any(v.fails for v in verdicts):
        return Verdict(VerdictTag.FAILS, evidence, source)
    if any(v.inconclusive for v in verdicts):
        return Verdict(VerdictTag.INCONCLUSIVE, evidence, "sampled")
    return Verdict(VerdictTag.HOLDS, evidence, source)


# ---------------------------------------------------------------------------
# Index sets
# ---------------------------------------------------------------------------

class IndexSet(ABC):
    """A pre-ordered set with a filter family of 'small' sets"""

    name: str
    variable: str

    @abstractmethod
    def contains(self, point) -> bool:
        """Membership of a value in the underlying set"""

    @abstractmethod
    def leq(self, a, b) -> bool:
        """The pre-order a <= b"""

    @abstractmethod
    def sample_points(self, sched: SamplingSchedule) -> List[Any]:
        """Points of the set running down the order, one per schedule step"""

    def __eq__(self, other):
        return isinstance(other, IndexSet) and (self.name, self.variable) == (other.name, other.variable)

    def __hash__(self):
        return hash((self.name, self.variable))

    def __repr__(self):
        return self.name


class SegmentedIndexSet(IndexSet):
    """
    Segmented downward-directed index set presented by its down-segments.

    Args:
        name: Display name
        variable: DSL variable of nets on this set
        domain: Short descriptor of the underlying set
        leq: Comparator
        meet: Witness of downward directedness, meet(a, b) <= a and <= b
        sampler: Maps an eps of the schedule to a point of the set
        contains: Membership test
        to_eps: Maps a point to the eps-scale used for decade counting
        to_eps_expr: Expression of the set variable in terms of eps (for the symbolic path)
    """

    def __init__(
        self,
        name: str,
        variable: str,
        domain: str,
        leq: Callable[[Any, Any], bool],
        meet: Callable[[Any, Any], Any],
        sampler: Callable[[Fraction], Any],
        contains: Callable[[Any], bool],
        to_eps: Callable[[Any], Fraction],
        to_eps_expr: Optional[NetExpr] = None,
    ):
        self.name = name
        self.variable = variable
        self.domain = domain
        self._leq = leq
        self._meet = meet
        self._sampler = sampler
        self._contains = contains
        self._to_eps = to_eps
        self.to_eps_expr = to_eps_expr

    def contains(self, point) -> bool:
        return self._contains(point)

    def leq(self, a, b) -> bool:
        return self._leq(a, b)

    def meet(self, a, b):
        return self._meet(a, b)

    def sample_points(self, sched: SamplingSchedule) -> List[Any]:
        return [self._sampler(eps) for eps in sched.points()]

    def to_eps(self, point) -> Fraction:
        return self._to_eps(point)

    def check_axioms(self, sched: SamplingSchedule) -> Verdict:
        """Sampled reflexivity, transitivity and downward directedness of the comparator"""
        points = self.sample_points(sched)
        violations = []
        for a in points:
            if not self.leq(a, a):
                violations.append({"axiom": "reflexive", "a": a})
        for a in points:
            for b in points:
                if not self.leq(a, b):
                    continue
                for c in points:
                    if self.leq(b, c) and not self.leq(a, c):
                        violations.append({"axiom": "transitive", "a": a, "b": b, "c": c})
        for a in points:
            for b in points:
                m = self.meet(a, b)
                if not (self.contains(m) and self.leq(m, a) and self.leq(m, b)):
                    violations.append({"axiom": "directed", "a": a, "b": b})
        evidence = {"index_set": self.name, "points": len(points)}
        if violations:
            evidence["violations"] = violations[:5]
            return Verdict.fails_(evidence)
        return Verdict.holds_(evidence)


def _in_unit_interval(point) -> bool:
    try:
        return 0 < point <= 1
    except TypeError:
        return False


def _is_natural(point) -> bool:
    if isinstance(point, Fraction):
        return point.denominator == 1 and point >= 0
    if isinstance(point, int):
        return point >= 0
    if isinstance(point, mpmath.mpf):
        return mpmath.isint(point) and point >= 0
    return False


IS_S = SegmentedIndexSet(
    name="IsS",
    variable="eps",
    domain="(0,1]",
    leq=lambda a, b: a <= b,
    meet=min,
    sampler=lambda eps: eps,
    contains=_in_unit_interval,
    to_eps=lambda p: Fraction(p) if not isinstance(p, mpmath.mpf) else p,
    to_eps_expr=Var("eps"),
)

# Small index = large n: the order of the naturals is reversed
NBAR = SegmentedIndexSet(
    name="Nbar",
    variable="n",
    domain="N",
    leq=lambda a, b: a >= b,
    meet=max,
    sampler=lambda eps: math.ceil(1 / Fraction(eps)),
    contains=_is_natural,
    to_eps=lambda n: Fraction(1, int(n)) if int(n) > 0 else Fraction(1),
    to_eps_expr=Binary("div", Const(1), Var("eps")),
)


def canonical(name: str, variable: str, leq, meet, sampler, contains, to_eps) -> SegmentedIndexSet:
    """User-supplied segmented downward-directed index set"""
    return SegmentedIndexSet(name, variable, "user", leq, meet, sampler, contains, to_eps)


def index_set_by_name(name: str) -> SegmentedIndexSet:
    key = name.strip().lower()
    if key in ("iss", "is", "s", "eps", "(0,1]"):
        return IS_S
    if key in ("nbar", "n"):
        return NBAR
    raise UnsupportedIndexSetError(f"unknown index set '{name}'")


def _require_segmented(*sets: IndexSet):
    for s in sets:
        if not isinstance(s, SegmentedIndexSet):
            raise UnsupportedIndexSetError(
                f"{s!r} is not a segmented downward-directed index set"
            )


# ---------------------------------------------------------------------------
# Net access
# ---------------------------------------------------------------------------

def net_value(net, index_set: IndexSet, point, precision: int = 50):
    """Value of a net (expression, object with evaluate_at, or callable) at a point"""
    if isinstance(net, NetExpr):
        return evaluate(net, {index_set.variable: point}, precision)
    if hasattr(net, "evaluate_at"):
        return net.evaluate_at(point, precision)
    with mpmath.workdps(precision):
        return mpmath.mpf(net(point))


def as_eps_net(net, index_set: IndexSet) -> Optional[NetExpr]:
    """The net rewritten in eps for the symbolic path, or None"""
    if not isinstance(net, NetExpr) or not isinstance(index_set, SegmentedIndexSet):
        return None
    if index_set.to_eps_expr is None:
        return None
    flat = eliminate_compose(net)
    if not free_vars(flat) <= {index_set.variable}:
        return None
    if index_set.variable == "eps":
        return flat
    return substitute_vars(flat, {index_set.variable: index_set.to_eps_expr})


def decades(index_set: SegmentedIndexSet, point) -> float:
    """Decades below 1 of the eps-scale of a point"""
    return float(-mpmath.log10(to_mpf(index_set.to_eps(point))))


# ---------------------------------------------------------------------------
# Eventual quantifier and strict order
# ---------------------------------------------------------------------------

def eventually(predicate: Callable[[Any], bool], index_set: IndexSet, sched: SamplingSchedule) -> Verdict:
    """
    Decide 'P holds for all sufficiently small indices' on the schedule

    Holds when the predicate is true on the whole tail after some cut in the
    first half; Fails when it is false at the last point and at another point
    of the second half; Inconclusive otherwise.
    """
    points = index_set.sample_points(sched)
    values = [bool(predicate(p)) for p in points]
    count = len(values)
    half = count // 2

    for cut in range(half):
        if all(values[cut:]):
            return Verdict.holds_({"cut": points[cut], "cut_index": cut, "points": count})

    tail_failures = [points[k] for k in range(half, count) if not values[k]]
    evidence = {
        "pattern": "".join("T" if v else "F" for v in values),
        "points": count,
    }
    if not values[-1] and len(tail_failures) >= 2:
        evidence["violations"] = tail_failures
        return Verdict.fails_(evidence)
    evidence["reason"] = "schedule exhausted"
    return Verdict.inconclusive_(evidence)


def exponent_of(net: NetExpr) -> Optional[NetExpr]:
    """u with net = exp(u), through products, quotients and constant powers of exp nodes"""
    if isinstance(net, Unary) and net.op == "exp":
        return net.arg
    if isinstance(net, Pow) and isinstance(net.exponent, Const):
        inner = exponent_of(net.base)
        return None if inner is None else Binary("mul", net.exponent, inner)
    if isinstance(net, Binary) and net.op in ("mul", "div"):
        left, right = exponent_of(net.left), exponent_of(net.right)
        if left is None or right is None:
            return None
        return Binary("add" if net.op == "mul" else "sub", left, right)
    return None


def order_gt(i, j, index_set: IndexSet, sched: SamplingSchedule) -> Verdict:
    """i >_I j: i > j for all sufficiently small indices"""
    ei, ej = as_eps_net(i, index_set), as_eps_net(j, index_set)
    if ei is not None and ej is not None:
        form = fragment_form(Binary("sub", ei, ej))
        if form is not None:
            if form.is_zero:
                return Verdict.fails_({"difference": "zero"}, source="symbolic")
            key, coefficient = form.dominant()
            evidence = {"dominant_coefficient": coefficient, "difference": form.to_expr()}
            if coefficient > 0:
                return Verdict.holds_(evidence, source="symbolic")
            return Verdict.fails_(evidence, source="symbolic")
        ui, uj = exponent_of(ei), exponent_of(ej)
        if ui is not None and uj is not None:
            # exp is increasing
            verdict = order_gt(normalize(ui), normalize(uj), IS_S, sched)
            verdict.evidence["compared"] = "exponents"
            return verdict
    precision = sched.precision
    return eventually(
        lambda p: net_value(i, index_set, p, precision) > net_value(j, index_set, p, precision),
        index_set,
        sched,
    )


# ---------------------------------------------------------------------------
# Big-O
# ---------------------------------------------------------------------------

def _ratio(xv, yv):
    if yv == 0:
        return mpmath.mpf(0) if xv == 0 else mpmath.inf
    return abs(xv) / abs(yv)


def _log10_clipped(r) -> float:
    if r == 0:
        return -LOG_CLIP
    if mpmath.isinf(r):
        return LOG_CLIP
    return float(mpmath.log10(r))


def witness_points(nets: Sequence[Any], index_set: IndexSet, sched: SamplingSchedule) -> List[Fraction]:
    """
    Extra indices announced by nets with a switching structure

    A net exposing witness_points(lowest) (a hybrid and its powers) names the
    points where it changes branch; they are taken down to the square of the
    last schedule point.
    """
    if index_set is not IS_S:
        return []
    lowest = sched.points()[-1] ** 2
    found = set()
    for net in nets:
        announce = getattr(net, "witness_points", None)
        if announce is not None:
            found.update(announce(lowest))
    return sorted(found, reverse=True)


def _with_extra(points: Sequence[Any], extra: Sequence[Any]) -> List[Any]:
    if not extra:
        return list(points)
    return sorted(set(points) | set(extra), reverse=True)


def sample_points_for(nets: Sequence[Any], index_set: IndexSet, sched: SamplingSchedule) -> List[Any]:
    """Schedule points merged with the witness points of the nets, deepest last"""
    return _with_extra(index_set.sample_points(sched), witness_points(nets, index_set, sched))


def _sampled_ratios(x, y, index_set, sched, extra: Sequence[Any] = ()) -> List[tuple]:
    points = _with_extra(index_set.sample_points(sched), extra)
    ratios = []
    with mpmath.workdps(sched.precision):
        for p in points:
            try:
                xv = net_value(x, index_set, p, sched.precision)
                yv = net_value(y, index_set, p, sched.precision)
            except NetDomainError as e:
                logger.debug(f"skipping sample {format_number(p)}: {e}")
                continue
            ratios.append((p, _ratio(xv, yv)))
    return ratios


def big_o(x, y, index_set: IndexSet, sched: SamplingSchedule) -> Verdict:
    """
    x = O(y) on an index set

    Symbolic when both nets are in the growth fragment (compare dominant
    keys); exponentials compare through the limit of their exponent gap;
    otherwise the log-ratio trend over the schedule tail decides.
    """
    ex, ey = as_eps_net(x, index_set), as_eps_net(y, index_set)
    if ex is not None and ey is not None:
        kx, ky = growth_key(ex), growth_key(ey)
        if kx.in_fragment and ky.in_fragment:
            return _big_o_symbolic(x, y, kx, ky, index_set, sched)
        ux, uy = exponent_of(ex), exponent_of(ey)
        if ux is not None and uy is not None:
            return _big_o_exponents(ux, uy, sched)
    return _big_o_sampled(x, y, index_set, sched)


def _big_o_symbolic(x, y, kx, ky, index_set, sched) -> Verdict:
    evidence: Dict[str, Any] = {"key_x": kx.describe(), "key_y": ky.describe()}
    if kx.is_zero:
        evidence["H"] = Fraction(0)
        return Verdict.holds_(evidence, source="symbolic")
    ratios = _sampled_ratios(x, y, index_set, sched)
    if ky.is_zero:
        evidence["reason"] = "y vanishes identically"
        return Verdict.fails_(evidence, source="symbolic")
    if kx.compare(ky) <= 0:
        finite = [r for _, r in ratios if not mpmath.isinf(r)]
        if finite:
            evidence["H"] = max(finite)
        return Verdict.holds_(evidence, source="symbolic")
    if ratios:
        point, ratio = ratios[-1]
        evidence["witness"] = {"point": point, "ratio": ratio}
        evidence["ratios"] = {format_number(p): r for p, r in ratios}
    return Verdict.fails_(evidence, source="symbolic")


def _big_o_exponents(ux: NetExpr, uy: NetExpr, sched: SamplingSchedule) -> Verdict:
    """exp(ux) = O(exp(uy)) iff ux - uy is bounded above"""
    difference = normalize(Binary("sub", ux, uy))
    gap = limit(difference, IS_S, sched)
    evidence: Dict[str, Any] = {"exponent_gap": print_expr(difference), "limit": gap.describe()}
    if gap.kind == "+inf":
        return Verdict.fails_(evidence, source=gap.source)
    if gap.kind in ("finite", "-inf"):
        return Verdict.holds_(evidence, source=gap.source)
    evidence["reason"] = "exponent gap has no limit on the schedule"
    return Verdict.inconclusive_(evidence)


def _deep_half(ratios: List[tuple], index_set) -> List[tuple]:
    if not ratios:
        return []
    bottom = max(decades(index_set, p) for p, _ in ratios)
    return [(p, r) for p, r in ratios if decades(index_set, p) >= bottom / 2]


def _envelope_growth(tail, depths, logs, evidence) -> Optional[Verdict]:
    """Fails when the deeper half of the tail peaks a decade above the shallower half"""
    middle = (depths[0] + depths[-1]) / 2
    early, late = logs[depths < middle], logs[depths >= middle]
    if not len(early) or not len(late):
        return None
    evidence["envelope"] = {"early_max_log10": float(early.max()), "late_max_log10": float(late.max())}
    if late.max() > 0 and late.max() > early.max() + 1:
        point, ratio = tail[int(np.argmax(logs))]
        evidence["witness"] = {"point": point, "ratio": ratio}
        return Verdict.fails_(evidence)
    return None


def _big_o_sampled(x, y, index_set, sched) -> Verdict:
    extra = witness_points((x, y), index_set, sched)
    ratios = _sampled_ratios(x, y, index_set, sched, extra)
    tail = _deep_half(ratios, index_set) if extra else ratios[len(ratios) // 2:]
    evidence: Dict[str, Any] = {}
    if extra:
        evidence["witness_points"] = len(extra)
    if len(tail) < 3:
        evidence["reason"] = "too few evaluable samples"
        return Verdict.inconclusive_(evidence)

    depths = np.array([decades(index_set, p) for p, _ in tail])
    logs = np.array([_log10_clipped(r) for _, r in tail])
    span = float(depths[-1] - depths[0])
    evidence["decades"] = span
    if span < MIN_DECADES:
        evidence["reason"] = "tail spans fewer than three decades"
        return Verdict.inconclusive_(evidence)

    if extra:
        verdict = _envelope_growth(tail, depths, logs, evidence)
        if verdict is not None:
            return verdict

    slope = float(np.polyfit(depths, logs, 1)[0])
    increments = np.diff(logs)
    monotone = bool(np.all(increments > 0))
    evidence.update({"slope": slope, "monotone": monotone})
    tail_max = max(r for _, r in tail)

    if slope > SLOPE_TOLERANCE:
        point, ratio = tail[int(np.argmax(logs))]
        evidence["witness"] = {"point": point, "ratio": ratio}
        return Verdict.fails_(evidence)
    if slope < -SLOPE_TOLERANCE:
        evidence["H"] = tail_max
        return Verdict.holds_(evidence)
    if monotone and increments[-1] > 0.1 * increments[0]:
        evidence["reason"] = "slowly growing ratio"
        return Verdict.inconclusive_(evidence)
    evidence["H"] = tail_max
    return Verdict.holds_(evidence)


# ---------------------------------------------------------------------------
# Oracle consistency
# ---------------------------------------------------------------------------

POWERS = tuple(Fraction(k, 2) for k in range(-4, 5))
LOG_POWERS = tuple(Fraction(k) for k in range(-2, 3))
EXP_RATES = tuple(Fraction(k) for k in range(-1, 3))
COEFFICIENTS = (Fraction(1), Fraction(2), Fraction(-3), Fraction(1, 2), Fraction(-1, 4))


def random_fragment_net(rng: np.random.Generator, terms: int = 2) -> NetExpr:
    """Sum of up to `terms` monomials c eps^a (-log eps)^b exp(k/eps) drawn from small grids"""
    eps = Var("eps")
    minus_log = minus_log_eps()
    total = None
    for _ in range(int(rng.integers(1, terms + 1))):
        c = COEFFICIENTS[int(rng.integers(len(COEFFICIENTS)))]
        a = POWERS[int(rng.integers(len(POWERS)))]
        b = LOG_POWERS[int(rng.integers(len(LOG_POWERS)))]
        k = EXP_RATES[int(rng.integers(len(EXP_RATES)))]
        term = Binary("mul", Const(c), Pow(eps, Const(a)))
        if b:
            term = Binary("mul", term, Pow(minus_log, Const(b)))
        if k:
            term = Binary("mul", term, Unary("exp", Binary("div", Const(k), eps)))
        total = term if total is None else Binary("add", total, term)
    return total


def check_oracle_consistency(pairs: Sequence[tuple], index_set: IndexSet, sched: SamplingSchedule) -> Verdict:
    """
    The symbolic big-O verdict never contradicts a decisive sampled verdict

    Pairs outside the fragment are skipped and counted.
    """
    counts = {"pairs": len(pairs), "compared": 0, "sampled_inconclusive": 0, "outside_fragment": 0}
    for x, y in pairs:
        kx, ky = growth_key(x), growth_key(y)
        if not (kx.in_fragment and ky.in_fragment):
            counts["outside_fragment"] += 1
            continue
        symbolic = _big_o_symbolic(x, y, kx, ky, index_set, sched)
        sampled = _big_o_sampled(x, y, index_set, sched)
        if sampled.inconclusive:
            counts["sampled_inconclusive"] += 1
            continue
        counts["compared"] += 1
        if sampled.tag is not symbolic.tag:
            evidence = dict(counts, witness={"x": print_expr(x), "y": print_expr(y),
                                             "symbolic": symbolic.tag.value, "sampled": sampled.tag.value})
            return Verdict.fails_(evidence)
    return Verdict.holds_(counts)


# ---------------------------------------------------------------------------
# Limits
# ---------------------------------------------------------------------------

@dataclass
class Limit:
    """Limit of a net: finite value, +inf, -inf or undetermined"""
    kind: str
    value: Any = None
    approach: Optional[str] = None
    source: str = "symbolic"

    @property
    def is_zero(self) -> bool:
        return self.kind == "finite" and self.value == 0

    @property
    def is_plus_infinity(self) -> bool:
        return self.kind == "+inf"

    @property
    def determined(self) -> bool:
        return self.kind != "undetermined"

    def describe(self) -> str:
        if self.kind == "finite":
            text = format_number(self.value)
            return text + (self.approach or "") if self.value == 0 else text
        return self.kind

    def to_dict(self) -> Dict[str, str]:
        return {
            "kind": self.kind,
            "value": format_number(self.value),
            "approach": self.approach or "",
            "source": self.source,
        }


UNDETERMINED = Limit("undetermined", source="sampled")


def _sign(q) -> str:
    return "+" if q > 0 else "-"


def _symbolic_limit(e: NetExpr) -> Optional[Limit]:
    form = fragment_form(e)
    if form is None:
        return None
    if form.is_zero:
        return Limit("finite", Fraction(0))
    (a, b, c), q = form.dominant()
    key = (c, -a, b)
    zero = (0, 0, 0)
    if key > zero:
        return Limit("+inf" if q > 0 else "-inf")
    if key < zero:
        return Limit("finite", Fraction(0), _sign(q))
    approach = _sign(form.terms[1][1]) if len(form.terms) > 1 else None
    return Limit("finite", q, approach)


def limit(f, index_set: IndexSet, sched: SamplingSchedule) -> Limit:
    """
    Limit of a net along the index set (eps -> 0+, or n -> infinity)

    Order of attempts: growth key of the flattened net, the composite rule
    for Compose nodes, then a sampled Cauchy-tail / monotone-growth test.
    """
    ef = as_eps_net(f, index_set)
    if ef is not None:
        result = _symbolic_limit(ef)
        if result is not None:
            return result
    if isinstance(f, Compose):
        result = _compose_limit(f, index_set, sched)
        if result is not None:
            return result
    return _sampled_limit(f, index_set, sched)


def _compose_limit(f: Compose, index_set: IndexSet, sched: SamplingSchedule) -> Optional[Limit]:
    inner = limit(f.inner, index_set, sched)
    if not inner.determined:
        return None
    if f.var == "eps" and inner.is_zero and inner.approach == "+":
        outer = limit(f.outer, IS_S, sched)
        return outer if outer.determined else None
    if f.var == "n" and inner.is_plus_infinity:
        outer = limit(f.outer, NBAR, sched)
        return outer if outer.determined else None
    if inner.kind == "finite" and inner.value > 0 and fragment_form(eliminate_compose(f.outer)) is not None:
        try:
            value = evaluate(f.outer, {f.var: inner.value}, sched.precision)
        except NetDomainError:
            return None
        return Limit("finite", value, source=inner.source)
    return None


def _sampled_limit(f, index_set: IndexSet, sched: SamplingSchedule) -> Limit:
    values = []
    with mpmath.workdps(sched.precision):
        for p in index_set.sample_points(sched):
            try:
                values.append(net_value(f, index_set, p, sched.precision))
            except NetDomainError:
                continue
        if len(values) < 4:
            return UNDETERMINED
        last = values[-3:]
        if max(last) - min(last) < CAUCHY_TOLERANCE:
            value = values[-1]
            if abs(value) < CAUCHY_TOLERANCE:
                positive = all(v > 0 for v in last)
                negative = all(v < 0 for v in last)
                approach = "+" if positive else ("-" if negative else None)
                return Limit("finite", Fraction(0), approach, source="sampled")
            return Limit("finite", value, source="sampled")
        tail = values[len(values) // 2:]
        increasing = all(b > a for a, b in zip(tail, tail[1:]))
        decreasing = all(b < a for a, b in zip(tail, tail[1:]))
        if increasing and tail[-1] > 10 * max(1, abs(tail[0])):
            return Limit("+inf", source="sampled")
        if decreasing and tail[-1] < -10 * max(1, abs(tail[0])):
            return Limit("-inf", source="sampled")
    return UNDETERMINED


# ---------------------------------------------------------------------------
# Morphisms of index sets
# ---------------------------------------------------------------------------

@dataclass
class IndexMorphism:
    """
    Morphism source -> target; its underlying map runs target -> source and
    is an expression in target.variable.
    """
    source: SegmentedIndexSet
    target: SegmentedIndexSet
    map: NetExpr
    name: str = ""
    verdict: Optional[Verdict] = None

    @property
    def verified(self) -> bool:
        return self.verdict is not None and self.verdict.holds

    def __call__(self, point, precision: int = 50):
        return net_value(self.map, self.target, point, precision)

    def pull(self, net: NetExpr) -> NetExpr:
        """net o f: a net on the source moved to the target"""
        return substitute(net, self.map, self.source.variable)

    def label(self) -> str:
        return self.name or print_expr(self.map)


def check_morphism(f_map: NetExpr, source: IndexSet, target: IndexSet, sched: SamplingSchedule) -> Verdict:
    """
    Check that f_map (target -> source) underlies a morphism source -> target

    Uses the downward-directed criterion: every down-segment of the source
    contains the image of some down-segment of the target. For (0,1] and the
    naturals this is a range check plus limit 0 (resp. +infinity).
    """
    _require_segmented(source, target)
    precision = sched.precision

    out_of_range = []
    for p in target.sample_points(sched):
        try:
            value = net_value(f_map, target, p, precision)
        except NetDomainError as e:
            out_of_range.append({"point": p, "error": str(e)})
            continue
        if source is NBAR and mpmath.isint(value):
            value = int(value)
        if not source.contains(value):
            out_of_range.append({"point": p, "value": value})
    if out_of_range:
        return Verdict.fails_({"reason": f"values leave {source.domain}", "witness": out_of_range[0]})

    lim = limit(f_map, target, sched)
    evidence: Dict[str, Any] = {"limit": lim}
    if lim.source == "symbolic" and lim.determined:
        if source is IS_S:
            if lim.is_zero:
                return Verdict.holds_(evidence, source="symbolic")
            if lim.kind == "finite":
                evidence["witness_a"] = lim.value / 2
            return Verdict.fails_(evidence, source="symbolic")
        if source is NBAR:
            if lim.is_plus_infinity:
                return Verdict.holds_(evidence, source="symbolic")
            if lim.kind == "finite":
                evidence["witness_a"] = int(mpmath.floor(to_mpf(lim.value))) + 1
            return Verdict.fails_(evidence, source="symbolic")
    return _criterion_on_cuts(f_map, source, target, sched, evidence)


def _criterion_on_cuts(f_map, source, target, sched, evidence) -> Verdict:
    """For sampled cuts a of the source, the map eventually stays below a"""
    precision = sched.precision
    cuts = source.sample_points(sched)[: sched.count // 3]
    verdicts = []
    for a in cuts:
        def below(p, a=a):
            value = net_value(f_map, target, p, precision)
            return source.leq(value, to_mpf(a) if isinstance(a, Fraction) else a)
        verdict = eventually(below, target, sched)
        verdict.evidence["a"] = a
        verdicts.append(verdict)
    return all_of(verdicts, evidence)


def morphism(f_map: NetExpr, source: IndexSet, target: IndexSet, sched: SamplingSchedule, name: str = "") -> IndexMorphism:
    """Build a morphism and attach its verification verdict"""
    verdict = check_morphism(f_map, source, target, sched)
    logger.debug(f"morphism {name or print_expr(f_map)}: {verdict.tag.value}")
    return IndexMorphism(source, target, f_map, name, verdict)


def identity_morphism(index_set: SegmentedIndexSet) -> IndexMorphism:
    evidence = {"identity": True}
    return IndexMorphism(index_set, index_set, Var(index_set.variable), "identity",
                         Verdict.holds_(evidence, source="symbolic"))


def compose_morphisms(f: IndexMorphism, g: IndexMorphism, sched: SamplingSchedule) -> IndexMorphism:
    """
    g o f for f: I1 -> I2 and g: I2 -> I3

    The underlying maps compose the other way round: I3 -> I2 -> I1.
    """
    if f.target != g.source:
        raise MorphismMismatchError(f"target {f.target!r} of {f.label()} differs from source {g.source!r} of {g.label()}")
    for m in (f, g):
        if not m.verified:
            raise UnverifiedMorphismError(f"morphism {m.label()} is not verified")
    if f.map == Var(f.target.variable):
        composite = g.map
    elif g.map == Var(g.target.variable):
        composite = f.map
    else:
        composite = Compose(f.map, g.map, f.target.variable)
        flat = eliminate_compose(composite)
        if free_vars(flat) <= {"eps"} and fragment_form(flat) is not None:
            composite = normalize(flat)
    name = f"{g.label()} o {f.label()}" if (f.name or g.name) else ""
    return morphism(composite, f.source, g.target, sched, name)


# ---------------------------------------------------------------------------
# Preservation along morphisms
# ---------------------------------------------------------------------------

@dataclass
class PreservationCase:
    """A statement about nets on the source: 'order' (i > j), 'big_o' (x = O(y)) or 'limit'"""
    kind: str
    nets: tuple
    label: str = ""


@dataclass
class PreservationResult:
    case: PreservationCase
    original: Verdict
    transported: Verdict

    @property
    def preserved(self) -> bool:
        return not self.original.holds or self.transported.holds

    def to_dict(self) -> Dict[str, Any]:
        return {
            "case": self.case.label or self.case.kind,
            "kind": self.case.kind,
            "original": self.original.to_dict(),
            "transported": self.transported.to_dict(),
            "preserved": str(self.preserved),
        }


def _run_case(kind: str, nets: Sequence[NetExpr], index_set, sched) -> Verdict:
    if kind == "order":
        return order_gt(nets[0], nets[1], index_set, sched)
    if kind == "big_o":
        return big_o(nets[0], nets[1], index_set, sched)
    if kind == "limit":
        lim = limit(nets[0], index_set, sched)
        evidence = {"limit": lim}
        if lim.determined:
            return Verdict.holds_(evidence, source=lim.source)
        return Verdict.inconclusive_(evidence)
    raise ValueError(f"unknown preservation case kind '{kind}'")


def preservation_suite(f: IndexMorphism, cases: Sequence[PreservationCase], sched: SamplingSchedule) -> List[PreservationResult]:
    """
    Re-run each statement composed with f on the target of f

    A limit statement is preserved when the transported limit equals the
    original one.
    """
    if not f.verified:
        raise UnverifiedMorphismError(f"morphism {f.label()} is not verified")
    results = []
    for case in cases:
        for net in case.nets:
            if isinstance(net, NetExpr) and not free_vars(net) <= {f.source.variable}:
                raise IndexSetMismatchError(f"{print_expr(net)} is not a net on {f.source!r}")
        original = _run_case(case.kind, case.nets, f.source, sched)
        pulled = [f.pull(net) for net in case.nets]
        transported = _run_case(case.kind, pulled, f.target, sched)
        if case.kind == "limit" and original.holds and transported.holds:
            before = original.evidence["limit"]
            after = transported.evidence["limit"]
            if before.kind != after.kind or (before.kind == "finite" and to_mpf(before.value) != to_mpf(after.value)):
                transported = Verdict.fails_({"limit": after, "expected": before}, transported.source)
        results.append(PreservationResult(case, original, transported))
        logger.debug(f"preservation {case.label or case.kind}: {transported.tag.value}")
    return results


def standard_cases(variable: str = "eps") -> List[PreservationCase]:
    """Statements that Hold on (0,1]: orders, big-O relations and a limit"""
    v = Var(variable)
    inverse, inverse_square = Pow(v, Const(-1)), Pow(v, Const(-2))
    return [
        PreservationCase("order", (inverse_square, inverse), "eps^-2 > eps^-1"),
        PreservationCase("big_o", (inverse, inverse_square), "eps^-1 = O(eps^-2)"),
        PreservationCase("big_o", (Unary("neg", Unary("log", v)), inverse), "-log(eps) = O(eps^-1)"),
        PreservationCase("limit", (v,), "eps -> 0"),
    ]
