"""Generalized-function representatives: domains, sup-nets, the algebra and the functor"""

from fractions import Fraction

import mpmath
import pytest

from cgf import (
    REAL_LINE,
    Compact,
    FunctionNet,
    Interval,
    SupNet,
    check_functor_composition,
    check_functor_identity,
    check_restriction_derivation,
    function_net,
    functor_action,
    gf_add,
    gf_derive,
    gf_equal,
    gf_mul,
    gf_restrict,
    gf_scale,
    identity_gauge_morphism,
    is_moderate_fn,
    is_negligible_fn,
    make_rep,
    parse_compact,
    parse_interval,
    sup_net,
)
from errors import ConfigError, IndexSetMismatchError, PreconditionError
from netlang import Var, normalize, parse
from zoo import gauge_morphism_by_name

GRID = 21
K = Compact(-1, 1)


@pytest.fixture
def rep(pol, sched):
    def build(text, gauge=None, domain=REAL_LINE, compacts=(K,)):
        gauge = gauge or pol
        return make_rep(function_net(text, domain), gauge, gauge, list(compacts), sched, max_order=1, grid=GRID)
    return build


# ---------------------------------------------------------------------------
# Domains
# ---------------------------------------------------------------------------

def test_parse_interval():
    assert parse_interval("(0, 1)") == Interval(Fraction(0), Fraction(1))
    assert parse_interval("(-inf, 2)") == Interval(None, Fraction(2))
    assert parse_interval("(-1/2, inf)") == Interval(Fraction(-1, 2), None)


@pytest.mark.parametrize("text", ["[0, 1)", "(1, 0)", "(a, 1)", "(0, 1, 2)", "0, 1"])
def test_malformed_intervals(text):
    with pytest.raises(ConfigError):
        parse_interval(text)


def test_parse_compact():
    assert parse_compact("[-1, 1/2]") == Compact(-1, Fraction(1, 2))
    with pytest.raises(ConfigError):
        parse_compact("[2, 1]")
    with pytest.raises(ConfigError):
        parse_compact("(0, 1)")


def test_compact_grid_and_containment():
    assert Compact(0, 1).grid(3) == [0, Fraction(1, 2), 1]
    assert Interval(Fraction(-2), Fraction(2)).contains_compact(K)
    assert not Interval(Fraction(0), Fraction(2)).contains_compact(K)
    with pytest.raises(PreconditionError):
        Compact(2, 1)


def test_function_nets_use_eps_and_x_only():
    with pytest.raises(PreconditionError):
        FunctionNet(parse("t", variables=("t",)))


# ---------------------------------------------------------------------------
# Sup-nets, moderateness and negligibility
# ---------------------------------------------------------------------------

def test_sup_net_is_exact_without_x():
    assert sup_net(function_net("pow(eps, -2)"), K) == normalize(parse("pow(eps, -2)"))


def test_sup_net_sampled():
    s = sup_net(function_net("x / eps"), Compact(-1, 2), grid=51)
    assert isinstance(s, SupNet)
    assert abs(s.evaluate_at(Fraction(1, 10)) - 20) < mpmath.mpf(10) ** -40
    assert list(s.sampled()) == ["1/10"]


def test_moderate_function_net(pol, sched):
    verdict = is_moderate_fn(function_net("sin(x) / eps"), pol, [K], sched, max_order=2, grid=GRID)
    assert verdict.holds


def test_exponential_in_x_over_eps_is_not_moderate(pol, sched):
    verdict = is_moderate_fn(function_net("exp(x / eps)"), pol, [Compact(0, 1)], sched, max_order=0, grid=GRID)
    assert verdict.fails


def test_negligible_function_net(pol, sched):
    assert is_negligible_fn(function_net("exp(-1/eps) * x"), pol, [K], sched, max_order=1, grid=GRID).holds
    assert is_negligible_fn(function_net("eps * x"), pol, [K], sched, max_order=1, grid=GRID).fails


def test_compacts_must_lie_in_the_domain(pol, sched):
    net = function_net("x", Interval(Fraction(0), Fraction(1)))
    with pytest.raises(PreconditionError):
        is_moderate_fn(net, pol, [K], sched)
    with pytest.raises(PreconditionError):
        is_moderate_fn(net, pol, [], sched)


# ---------------------------------------------------------------------------
# Algebra
# ---------------------------------------------------------------------------

def test_ring_operations_stay_moderate(rep, sched):
    u, v = rep("x / eps"), rep("pow(x, 2)")
    assert u.verdict.holds and v.verdict.holds
    assert gf_add(u, v, sched).verdict.holds
    assert gf_mul(u, v, sched).verdict.holds
    assert gf_scale(u, 3, sched).verdict.holds
    derived = gf_derive(u, sched)
    assert derived.verdict.holds
    assert derived.net.value(Fraction(1, 4), 0) == 4


def test_equality_up_to_negligible_nets(rep, sched):
    u = rep("x / eps")
    assert gf_equal(u, u, sched).holds
    assert gf_equal(u, rep("x / eps + exp(-1/eps)"), sched).holds
    assert gf_equal(u, rep("pow(x, 2)"), sched).fails


def test_operations_need_one_algebra(rep, exp_gauge, sched):
    with pytest.raises(IndexSetMismatchError):
        gf_add(rep("x"), rep("x", gauge=exp_gauge), sched)


def test_operations_need_moderate_operands(pol, sched):
    u = make_rep(function_net("exp(x / eps)"), pol, pol, [Compact(0, 1)], sched, max_order=0, grid=GRID)
    assert u.verdict.fails
    with pytest.raises(PreconditionError):
        gf_add(u, u, sched)


def test_gauge_pair_must_be_ordered(pol, exp_gauge, sched):
    with pytest.raises(PreconditionError):
        make_rep(function_net("x"), exp_gauge, pol, [K], sched, max_order=0, grid=GRID)


# ---------------------------------------------------------------------------
# Functorial action and restriction
# ---------------------------------------------------------------------------

def test_lambda_moves_exponential_nets_to_powers(rep, exp_gauge, sched):
    u = rep("exp(1/eps) * x", gauge=exp_gauge)
    image = functor_action(gauge_morphism_by_name("lambda", sched), Var("x"), u, REAL_LINE, sched)
    assert image.b.name == "B_pol"
    assert image.verdict.holds
    with mpmath.workdps(30):
        assert abs(image.net.value(Fraction(1, 10), 1) - 10) < mpmath.mpf(10) ** -25


def test_h_must_map_into_the_source_domain(rep, pol, sched):
    u = rep("x", domain=Interval(Fraction(0), Fraction(1)), compacts=[Compact(Fraction(1, 4), Fraction(3, 4))])
    shift = parse("x + 1", variables=("x",))
    with pytest.raises(PreconditionError):
        functor_action(identity_gauge_morphism(pol), shift, u, REAL_LINE, sched)


def test_restriction(rep, sched):
    u = rep("sin(x) / eps")
    restricted = gf_restrict(u, Interval(Fraction(-2), Fraction(2)), sched)
    assert restricted.domain == Interval(Fraction(-2), Fraction(2))
    with pytest.raises(PreconditionError):
        gf_restrict(u, Interval(Fraction(0), Fraction(1)), sched)
    narrow = rep("x", domain=Interval(Fraction(0), Fraction(1)), compacts=[Compact(Fraction(1, 4), Fraction(3, 4))])
    with pytest.raises(PreconditionError):
        gf_restrict(narrow, Interval(Fraction(-1), Fraction(2)), sched)


# ---------------------------------------------------------------------------
# Functor laws
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("text", ["x", "x / eps", "sin(x) / eps"])
def test_identity_law(text, rep, sched):
    verdict = check_functor_identity(rep(text), sched)
    assert verdict.holds and verdict.source == "symbolic"


@pytest.mark.parametrize("first,second", [("square", "sqrt"), ("eta", "lambda"), ("identity", "square")])
def test_composition_law(first, second, rep, sched):
    f, g = gauge_morphism_by_name(first, sched), gauge_morphism_by_name(second, sched)
    assert check_functor_composition(f, g, rep("x / eps"), sched).holds


@pytest.mark.parametrize("first,second", [("square", "sqrt"), ("identity", "square")])
def test_composition_law_with_space_maps(first, second, rep, sched):
    f, g = gauge_morphism_by_name(first, sched), gauge_morphism_by_name(second, sched)
    u = rep("sin(x) / eps", domain=Interval(Fraction(-2), Fraction(2)))
    verdict = check_functor_composition(
        f, g, u, sched,
        h1=parse("x / 2", variables=("x",)), h2=parse("x + 1/4", variables=("x",)),
        middle=Interval(Fraction(-1), Fraction(3)), target=Interval(Fraction(-1), Fraction(1)),
        middle_compacts=[Compact(Fraction(-1, 2), Fraction(5, 2))],
        target_compacts=[Compact(Fraction(-1, 2), Fraction(1, 2))],
    )
    assert verdict.holds
    with pytest.raises(PreconditionError):
        check_functor_composition(
            f, g, u, sched,
            h1=parse("x / 2", variables=("x",)), h2=parse("x + 3", variables=("x",)),
            middle=Interval(Fraction(-1), Fraction(3)), target=Interval(Fraction(-1), Fraction(1)),
            middle_compacts=[Compact(Fraction(-1, 2), Fraction(5, 2))],
            target_compacts=[Compact(Fraction(-1, 2), Fraction(1, 2))],
        )


def test_restriction_commutes_with_derivation(rep, sched):
    assert check_restriction_derivation(rep("sin(x) / eps"), Interval(Fraction(-2), Fraction(2)), sched).holds
