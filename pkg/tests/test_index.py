"""Index sets, the eventual quantifier, big-O, limits and morphisms"""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from errors import IndexSetMismatchError, MorphismMismatchError, UnsupportedIndexSetError, UnverifiedMorphismError
from index import (
    IS_S,
    NBAR,
    PreservationCase,
    Verdict,
    VerdictTag,
    all_of,
    big_o,
    check_morphism,
    check_oracle_consistency,
    compose_morphisms,
    eventually,
    identity_morphism,
    index_set_by_name,
    limit,
    morphism,
    order_gt,
    preservation_suite,
    random_fragment_net,
    standard_cases,
)
from netlang import EPS, Compose, growth_key, parse
from zoo import morphism_by_name


def net(text):
    return parse(text, extended=True)


# ---------------------------------------------------------------------------
# Verdicts and index sets
# ---------------------------------------------------------------------------

def test_all_of_fails_dominates_inconclusive():
    parts = [Verdict.holds_(), Verdict.inconclusive_(), Verdict.fails_()]
    assert all_of(parts).fails
    assert all_of(parts[:2]).inconclusive
    assert all_of(parts[:1]).holds


def test_all_of_is_symbolic_only_when_every_part_is():
    assert all_of([Verdict.holds_(source="symbolic")]).source == "symbolic"
    assert all_of([Verdict.holds_(source="symbolic"), Verdict.holds_()]).source == "sampled"


def test_verdict_to_dict_serializes_expressions():
    data = Verdict.holds_({"net": EPS, "value": Fraction(1, 2)}).to_dict()
    assert data == {"verdict": "Holds", "source": "sampled", "evidence": {"net": "eps", "value": "1/2"}}


@pytest.mark.parametrize("index_set", [IS_S, NBAR])
def test_canonical_index_sets_satisfy_the_axioms(index_set, short_sched):
    assert index_set.check_axioms(short_sched).holds


def test_index_set_by_name():
    assert index_set_by_name("Is") is IS_S
    assert index_set_by_name("nbar") is NBAR
    with pytest.raises(UnsupportedIndexSetError):
        index_set_by_name("reals")


def test_eventually_finds_the_cut(sched):
    verdict = eventually(lambda p: p < Fraction(1, 1000), IS_S, sched)
    assert verdict.holds
    assert verdict.evidence["cut_index"] == 3


def test_eventually_fails_on_a_false_tail(sched):
    assert eventually(lambda p: p > Fraction(1, 1000), IS_S, sched).fails


def test_eventually_is_inconclusive_on_alternation(sched):
    points = sched.points()
    verdict = eventually(lambda p: points.index(p) % 2 == 1, IS_S, sched)
    assert verdict.inconclusive


# ---------------------------------------------------------------------------
# Strict order and big-O
# ---------------------------------------------------------------------------

def test_order_gt_symbolic(sched):
    verdict = order_gt(net("pow(eps, -2)"), net("pow(eps, -1)"), IS_S, sched)
    assert verdict.holds and verdict.source == "symbolic"
    assert order_gt(net("pow(eps, -1)"), net("pow(eps, -2)"), IS_S, sched).fails
    assert order_gt(EPS, EPS, IS_S, sched).fails


def test_order_gt_sampled(sched):
    verdict = order_gt(net("floor(1/eps) + 1"), net("floor(1/eps)"), IS_S, sched)
    assert verdict.holds and verdict.source == "sampled"


def test_big_o_symbolic(sched):
    verdict = big_o(net("pow(eps, -1)"), net("pow(eps, -2)"), IS_S, sched)
    assert verdict.holds and verdict.source == "symbolic"
    assert "H" in verdict.evidence
    failing = big_o(net("pow(eps, -2)"), net("pow(eps, -1)"), IS_S, sched)
    assert failing.fails and "witness" in failing.evidence


def test_big_o_log_against_power(sched):
    assert big_o(net("-log(eps)"), net("pow(eps, -1)"), IS_S, sched).holds
    assert big_o(net("pow(eps, -1)"), net("-log(eps)"), IS_S, sched).fails


def test_big_o_tie_holds(sched):
    assert big_o(net("3 * pow(eps, -1)"), net("pow(eps, -1) + 1"), IS_S, sched).holds


def test_big_o_sampled(sched):
    bounded = big_o(net("floor(1/eps)"), net("2 * floor(1/eps)"), IS_S, sched)
    assert bounded.holds and bounded.source == "sampled"
    growing = big_o(net("floor(1/eps) * floor(1/eps)"), net("floor(1/eps)"), IS_S, sched)
    assert growing.fails and growing.source == "sampled"


def test_big_o_oscillating_growth_fails(sched):
    verdict = big_o(net("(2 + sin(1/eps)) * pow(eps, -1)"), net("1"), IS_S, sched)
    assert verdict.fails and verdict.source == "sampled"
    assert verdict.evidence["slope"] > 0.05


def test_big_o_growth_without_a_monotone_tail_fails(sched):
    decade = "floor(-log(eps) / log(10) + 1/2)"
    parity = f"{decade} - 2 * floor({decade} / 2)"
    verdict = big_o(net(f"(1 + 9 * ({parity})) * pow(eps, -1/5)"), net("1"), IS_S, sched)
    assert verdict.fails
    assert verdict.evidence["monotone"] is False
    assert "witness" in verdict.evidence


def test_big_o_compares_exponentials_through_their_exponents(sched):
    single = big_o(net("exp(1/eps)"), net("exp(pow(eps, -2))"), IS_S, sched)
    assert single.holds and single.source == "symbolic"
    tower, bigger = net("exp(exp(1/eps))"), net("exp(2 * exp(1/eps))")
    assert big_o(tower, bigger, IS_S, sched).holds
    assert big_o(bigger, tower, IS_S, sched).fails
    assert big_o(bigger, net("pow(exp(exp(1/eps)), 3)"), IS_S, sched).holds


def test_order_gt_on_exponential_towers(sched):
    verdict = order_gt(net("exp(exp(2/eps))"), net("exp(exp(1/eps))"), IS_S, sched)
    assert verdict.holds and verdict.evidence["compared"] == "exponents"
    assert order_gt(net("exp(exp(1/eps))"), net("exp(exp(2/eps))"), IS_S, sched).fails


@given(st.integers(min_value=0, max_value=10 ** 6))
@settings(max_examples=50, deadline=None)
def test_random_fragment_nets_stay_in_the_fragment(seed):
    assert growth_key(random_fragment_net(np.random.default_rng(seed))).in_fragment


def test_symbolic_and_sampled_big_o_agree(sched):
    rng = np.random.default_rng(7)
    pairs = [(random_fragment_net(rng), random_fragment_net(rng)) for _ in range(40)]
    verdict = check_oracle_consistency(pairs, IS_S, sched)
    assert verdict.holds
    assert verdict.evidence["pairs"] == 40
    assert verdict.evidence["outside_fragment"] == 0


# ---------------------------------------------------------------------------
# Limits
# ---------------------------------------------------------------------------

def test_symbolic_limits(sched):
    zero = limit(EPS, IS_S, sched)
    assert zero.is_zero and zero.approach == "+"
    assert limit(net("pow(eps, -1)"), IS_S, sched).kind == "+inf"
    assert limit(net("-exp(1/eps)"), IS_S, sched).kind == "-inf"
    one = limit(net("1 + eps"), IS_S, sched)
    assert one.kind == "finite" and one.value == 1 and one.approach == "+"


def test_limit_of_a_composite_map(sched):
    lam = net("-1/log(eps)")
    result = limit(Compose(lam, lam, "eps"), IS_S, sched)
    assert result.is_zero and result.approach == "+"
    assert result.source == "symbolic"


def test_sampled_limit(sched):
    result = limit(net("floor(1/eps)"), IS_S, sched)
    assert result.kind == "+inf" and result.source == "sampled"


# ---------------------------------------------------------------------------
# Morphisms
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["lambda", "eta", "square", "sqrt", "cube", "nbar_in", "nbar_out"])
def test_zoo_morphisms_verify(name, sched):
    assert morphism_by_name(name, sched).verified


def test_map_with_nonzero_limit_is_rejected(sched):
    verdict = check_morphism(net("1/2 + eps"), IS_S, IS_S, sched)
    assert verdict.fails
    assert verdict.evidence["witness_a"] == Fraction(1, 4)


def test_map_leaving_the_unit_interval_is_rejected(sched):
    verdict = check_morphism(net("2 + eps"), IS_S, IS_S, sched)
    assert verdict.fails and "witness" in verdict.evidence


def test_eta_after_lambda_is_the_identity(sched):
    eta, lam = morphism_by_name("eta", sched), morphism_by_name("lambda", sched)
    assert compose_morphisms(eta, lam, sched).map == EPS
    assert compose_morphisms(lam, eta, sched).map == EPS


def test_identity_is_neutral(sched):
    square = morphism_by_name("square", sched)
    assert compose_morphisms(identity_morphism(IS_S), square, sched).map == square.map


def test_compose_checks_endpoints(sched):
    with pytest.raises(MorphismMismatchError):
        compose_morphisms(morphism_by_name("nbar_in", sched), morphism_by_name("lambda", sched), sched)
    bad = morphism(net("2 + eps"), IS_S, IS_S, sched)
    with pytest.raises(UnverifiedMorphismError):
        compose_morphisms(bad, morphism_by_name("lambda", sched), sched)


def test_statements_survive_lambda(sched):
    results = preservation_suite(morphism_by_name("lambda", sched), standard_cases(), sched)
    assert len(results) == 4
    assert all(r.original.holds for r in results)
    assert all(r.preserved and r.transported.holds for r in results)


def test_preservation_needs_nets_on_the_source(sched):
    case = PreservationCase("limit", (parse("n", variables=("n",)),))
    with pytest.raises(IndexSetMismatchError):
        preservation_suite(morphism_by_name("lambda", sched), [case], sched)
    bad = morphism(net("2 + eps"), IS_S, IS_S, sched)
    with pytest.raises(UnverifiedMorphismError):
        preservation_suite(bad, standard_cases(), sched)


def test_verdict_tags_are_strings():
    assert [t.value for t in VerdictTag] == ["Holds", "Fails", "Inconclusive"]
