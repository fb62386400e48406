"""
Built-in gauges and index-set morphisms
"""

from fractions import Fraction
from typing import Callable, Dict, Optional, Tuple

from errors import ConfigError, GaugeForgeError
from gauge import DEFAULT_PARAM_RANGE, Gauge, GaugeMorphism, check_ag_morphism, finite_family, parametric, principal
from index import IS_S, NBAR, IndexMorphism, SegmentedIndexSet, identity_morphism, morphism
from netlang import Const, SamplingSchedule, parse, print_expr


def _template(text: str, parameter: str) -> object:
    return parse(text, variables=("eps", parameter), extended=True)


def b_pol(param_range: int = DEFAULT_PARAM_RANGE) -> Gauge:
    """{eps^-n | n in N}"""
    return parametric("B_pol", _template("pow(eps, -n)", "n"), "n", range(1, param_range + 1))


def b_exp(param_range: int = DEFAULT_PARAM_RANGE) -> Gauge:
    """{exp(n/eps) | n in N}"""
    return parametric("B_exp", _template("exp(n/eps)", "n"), "n", range(1, param_range + 1))


def b_s(param_range: int = DEFAULT_PARAM_RANGE) -> Gauge:
    """{eps^-a | a > 0}, tested on half-integers"""
    values = [Fraction(j, 2) for j in range(1, param_range + 1)]
    return parametric("B^s", _template("pow(eps, -a)", "a"), "a", values)


def b_pol2(param_range: int = DEFAULT_PARAM_RANGE) -> Gauge:
    """{eps^-2n | n in N}"""
    return parametric("B_pol2", _template("pow(eps, -2*n)", "n"), "n", range(1, param_range + 1))


def nbar_gauge(param_range: int = DEFAULT_PARAM_RANGE) -> Gauge:
    """{(n^m)_n | m in N} on the reversed naturals"""
    template = parse("pow(n, m)", variables=("n", "m"), extended=True)
    return parametric("nbar", template, "m", range(1, param_range + 1), NBAR)


def const1(param_range: int = DEFAULT_PARAM_RANGE) -> Gauge:
    return finite_family("const1", [Const(1)])


GAUGES: Dict[str, Callable[[int], Gauge]] = {
    "B_pol": b_pol,
    "B_exp": b_exp,
    "B^s": b_s,
    "B_s": b_s,
    "B_pol2": b_pol2,
    "nbar": nbar_gauge,
    "const1": const1,
}

ALIASES = {"pol": "B_pol", "exp": "B_exp", "s": "B^s", "pol2": "B_pol2"}


# name -> (underlying map, source, target); the map runs target -> source
MORPHISMS: Dict[str, Tuple[str, SegmentedIndexSet, SegmentedIndexSet]] = {
    "lambda": ("-1/log(eps)", IS_S, IS_S),
    "eta": ("exp(-1/eps)", IS_S, IS_S),
    "square": ("pow(eps, 2)", IS_S, IS_S),
    "sqrt": ("pow(eps, 1/2)", IS_S, IS_S),
    "cube": ("pow(eps, 3)", IS_S, IS_S),
    "nbar_in": ("1 / (n + 1)", IS_S, NBAR),
    "nbar_out": ("floor(1 / eps)", NBAR, IS_S),
    "wobble": ("eps + pow(eps, 2) * sin(1 / eps)", IS_S, IS_S),
}


def gauge_by_name(name: str, param_range: int = DEFAULT_PARAM_RANGE) -> Gauge:
    """Zoo gauge by name or alias; any other text is read as the generator of a principal gauge"""
    name = ALIASES.get(name, name)
    if name in GAUGES:
        return GAUGES[name](param_range)
    try:
        generator = parse(name, extended=True)
    except GaugeForgeError:
        raise ConfigError(f"unknown gauge '{name}' (known: {', '.join(sorted(GAUGES))}, or a generator in eps)")
    return principal(f"AG({print_expr(generator)})", generator, IS_S, param_range)


def morphism_by_name(name: str, sched: SamplingSchedule) -> IndexMorphism:
    """Named morphism with its verification verdict attached"""
    if name == "identity":
        return identity_morphism(IS_S)
    try:
        text, source, target = MORPHISMS[name]
    except KeyError:
        raise ConfigError(f"unknown morphism '{name}' (known: identity, {', '.join(sorted(MORPHISMS))})")
    f_map = parse(text, variables=(target.variable,), extended=True)
    return morphism(f_map, source, target, sched, name)


# morphism name -> (source gauge, target gauge) of its standard Ag1 reading
MORPHISM_GAUGES: Dict[str, Tuple[str, str]] = {
    "identity": ("B_pol", "B_pol"),
    "lambda": ("B_exp", "B_pol"),
    "eta": ("B_pol", "B_exp"),
    "square": ("B_pol", "B_pol2"),
    "sqrt": ("B_pol2", "B_pol"),
}


def gauge_morphism_by_name(name: str, sched: SamplingSchedule, source: str = "", target: str = "",
                           param_range: int = DEFAULT_PARAM_RANGE) -> GaugeMorphism:
    """
    Named morphism checked as an Ag1 arrow between the given (or standard) gauges

    Raises:
        ConfigError: No gauges given and no standard pair known for the morphism
        InclusionFailure: The arrow does not verify
    """
    if not (source and target):
        if name not in MORPHISM_GAUGES:
            raise ConfigError(f"morphism '{name}' needs explicit gauges (standard pairs: {', '.join(sorted(MORPHISM_GAUGES))})")
        source, target = MORPHISM_GAUGES[name]
    f = morphism_by_name(name, sched)
    return check_ag_morphism(f, gauge_by_name(source, param_range), gauge_by_name(target, param_range), sched)


# (first, second) -> (forward, backward) morphism names of a zoo isomorphism
ISOMORPHISMS: Dict[Tuple[str, str], Tuple[str, str]] = {
    ("B_pol", "B_exp"): ("eta", "lambda"),
    ("B_pol", "B_pol2"): ("square", "sqrt"),
}


def isomorphism_for(first: str, second: str) -> Optional[Tuple[str, str]]:
    """Zoo isomorphism between two gauges, in either order"""
    first, second = ALIASES.get(first, first), ALIASES.get(second, second)
    if (first, second) in ISOMORPHISMS:
        return ISOMORPHISMS[(first, second)]
    if (second, first) in ISOMORPHISMS:
        forward, backward = ISOMORPHISMS[(second, first)]
        return backward, forward
    return None
