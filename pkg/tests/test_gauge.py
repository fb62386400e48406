"""Gauges: axioms, moderate classes, pullback, Ag1 arrows, mu-images and interleaving"""

from fractions import Fraction

import pytest

from errors import (
    GaugeConditionError,
    InclusionFailure,
    IndexSetMismatchError,
    InterleaveDepthError,
    PreconditionError,
    UnverifiedMorphismError,
)
from gauge import (
    EXP_MU,
    HybridNet,
    InterleaveWitness,
    check_ag_morphism,
    check_agle_morphism,
    exp_gauge,
    finite_family,
    functor_E_mu,
    gauges_equivalent,
    inclusion,
    interleave,
    interleave_chain,
    isomorphic_via,
    moderate_class_gauge,
    moderate_in,
    monotone_transport,
    mu_gauge,
    principal,
    pullback,
    verify_gauge_axioms,
    verify_interleaving,
)
from index import IS_S, identity_morphism, morphism
from netlang import Const, EPS, Pow, normalize, parse, print_expr
from zoo import b_exp, b_pol, b_pol2, gauge_by_name, isomorphism_for, morphism_by_name, nbar_gauge


# ---------------------------------------------------------------------------
# Axioms
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["B_pol", "B_exp", "B^s", "nbar"])
def test_zoo_gauges_satisfy_the_axioms(name, sched):
    report = verify_gauge_axioms(gauge_by_name(name), sched)
    assert report.all_hold, {k: v.tag.value for k, v in report.verdicts.items()}


def test_constant_gauge_breaks_unboundedness(sched):
    report = verify_gauge_axioms(gauge_by_name("const1"), sched)
    assert report.verdicts["ii"].fails
    assert report.verdicts["i"].holds
    assert not report.all_hold


def test_gauge_by_name_reads_generators():
    gauge = gauge_by_name("exp(1/eps)", param_range=3)
    assert gauge.kind == "principal"
    assert len(gauge.generators()) == 3
    assert gauge_by_name("pol").name == "B_pol"


# ---------------------------------------------------------------------------
# Moderate classes
# ---------------------------------------------------------------------------

def test_moderate_in_finds_a_generator(pol, sched):
    verdict = moderate_in(parse("pow(eps, -3) * -log(eps)"), pol, sched)
    assert verdict.holds
    assert verdict.evidence["generator"] == print_expr(normalize(parse("pow(eps, -4)")))


def test_exponential_dominates_every_power(pol, sched):
    verdict = moderate_in(parse("exp(1/eps)"), pol, sched)
    assert verdict.fails
    assert verdict.evidence["dominates_family"] is True


def test_moderate_in_reaches_past_the_presented_values(pol, sched):
    verdict = moderate_in(parse("pow(eps, -7)"), pol, sched)
    assert verdict.holds
    assert verdict.evidence["generator"] == print_expr(normalize(parse("pow(eps, -7)")))


def test_moderate_in_stays_open_past_the_tested_generators(pol, sched):
    verdict = moderate_in(parse("pow(eps, -13)"), pol, sched)
    assert verdict.inconclusive
    assert verdict.evidence["dominates_family"] is False
    powers = principal("AG(1/eps)", parse("pow(eps, -1)"), param_range=2)
    assert moderate_in(parse("pow(eps, -5)"), powers, sched).inconclusive
    assert inclusion(pol, powers, sched).inconclusive
    assert not gauges_equivalent(pol, powers, sched).fails


def test_principal_gauge_refutes_by_outgrowth(sched):
    gauge = principal("AG(exp(1/eps))", parse("exp(1/eps)"))
    verdict = moderate_in(parse("exp(pow(eps, -2))"), gauge, sched)
    assert verdict.fails
    assert verdict.evidence["dominates_family"] is False
    assert verdict.evidence["outgrowth"]["log_quotient"] > 12


def test_b_pol_and_b_exp_are_not_equivalent(pol, exp_gauge, sched):
    assert inclusion(pol, exp_gauge, sched).holds
    backwards = inclusion(exp_gauge, pol, sched)
    assert backwards.fails
    assert backwards.evidence["witness"] == print_expr(normalize(parse("exp(1/eps)")))
    assert gauges_equivalent(pol, exp_gauge, sched).fails


def test_moderate_class_gauge_is_equivalent(sched):
    gauge = b_pol(3)
    assert gauges_equivalent(moderate_class_gauge(gauge), gauge, sched).holds


def test_inclusion_needs_a_common_index_set(pol, sched):
    with pytest.raises(IndexSetMismatchError):
        inclusion(pol, nbar_gauge(), sched)


# ---------------------------------------------------------------------------
# Pullback and gauge morphisms
# ---------------------------------------------------------------------------

def test_pullback_of_b_exp_along_lambda_is_b_pol(exp_gauge, sched):
    pulled = pullback(exp_gauge, morphism_by_name("lambda", sched))
    expected = [normalize(Pow(EPS, Const(-n))) for n in range(1, 7)]
    assert [normalize(g) for g in pulled.generators()] == expected


def test_pullback_preconditions(pol, sched):
    bad = morphism(parse("2 + eps"), IS_S, IS_S, sched)
    with pytest.raises(UnverifiedMorphismError):
        pullback(pol, bad)
    with pytest.raises(IndexSetMismatchError):
        pullback(nbar_gauge(), morphism_by_name("lambda", sched))


def test_square_is_an_arrow_into_b_pol2(pol, sched):
    arrow = check_ag_morphism(morphism_by_name("square", sched), pol, b_pol2(), sched)
    assert arrow.verified
    assert arrow.to_dict()["kind"] == "Ag1"


def test_failed_inclusion_carries_the_witness(pol, sched):
    with pytest.raises(InclusionFailure) as info:
        check_ag_morphism(morphism_by_name("lambda", sched), pol, pol, sched)
    assert info.value.witness is not None


def test_unknown_arrow_kind(pol, sched):
    with pytest.raises(PreconditionError):
        check_ag_morphism(morphism_by_name("square", sched), pol, b_pol2(), sched, kind="Ag7")


def test_b_pol_and_b_exp_are_isomorphic(pol, exp_gauge, sched):
    assert isomorphism_for("pol", "exp") == ("eta", "lambda")
    assert isomorphism_for("B_exp", "B_pol") == ("lambda", "eta")
    assert isomorphism_for("B_pol", "nbar") is None
    eta, lam = morphism_by_name("eta", sched), morphism_by_name("lambda", sched)
    assert isomorphic_via(eta, lam, pol, exp_gauge, sched).holds


# ---------------------------------------------------------------------------
# mu-images
# ---------------------------------------------------------------------------

def test_exponential_of_b_pol(sched):
    gauge = exp_gauge(b_pol(3), sched)
    assert gauge.name == "e^B_pol"
    assert len(gauge.generators()) == 9


def test_mu_must_be_non_decreasing(sched):
    with pytest.raises(PreconditionError):
        mu_gauge(b_pol(2), parse("sin(x)", variables=("x",), extended=True), sched)


def test_mu_gauge_of_the_positive_part(sched):
    gauge = mu_gauge(b_pol(), parse("max(x, 0)", variables=("x",)), sched)
    assert gauge.kind == "family"
    assert len(gauge.generators()) == 18


def test_mu_square_condition(sched):
    with pytest.raises(GaugeConditionError):
        mu_gauge(finite_family("two", [Const(2)]), parse("x", variables=("x",)), sched)


def test_e_mu_of_the_logarithmic_arrow(sched):
    lam = check_agle_morphism(morphism_by_name("lambda", sched), b_exp(2), b_pol(2), sched)
    arrow = functor_E_mu(EXP_MU, lam, sched)
    assert arrow.verified
    assert arrow.kind == "Agle"
    assert arrow.source.name == "exp(x)(B_exp)"
    assert arrow.target.name == "exp(x)(B_pol)"


def test_e_mu_keeps_identities(sched):
    pol = b_pol(2)
    identity = check_agle_morphism(identity_morphism(IS_S), pol, pol, sched)
    arrow = functor_E_mu(EXP_MU, identity, sched)
    assert arrow.verified
    assert arrow.source is arrow.target
    assert arrow.morphism.map == EPS


def test_monotone_transport(sched):
    small, large = parse("pow(eps, -1)"), parse("pow(eps, -2)")
    assert monotone_transport(EXP_MU, small, large, IS_S, sched).holds
    assert monotone_transport(EXP_MU, large, small, IS_S, sched).fails
    assert monotone_transport(parse("max(x, 0)", variables=("x",)), small, large, IS_S, sched).holds


# ---------------------------------------------------------------------------
# Interleaving
# ---------------------------------------------------------------------------

def test_interleave_powers_and_exponentials(sched):
    b1, b2 = parse("pow(eps, -1)"), parse("exp(1/eps)")
    hybrid, witnesses = interleave(b1, b2, 4, sched)
    assert [w.n for w in witnesses] == [2, 3, 4]
    assert witnesses[0].eps_bar == Fraction(1, 10)
    assert all(w.verified for w in witnesses)
    assert hybrid.switches[0] == 1
    assert verify_interleaving(hybrid, witnesses, sched).holds


def test_interleave_preconditions(sched):
    b1, b2 = parse("pow(eps, -1)"), parse("exp(1/eps)")
    with pytest.raises(PreconditionError):
        interleave(b2, b1, 4, sched)
    with pytest.raises(PreconditionError):
        interleave(b1, b2, 1, sched)
    with pytest.raises(InterleaveDepthError):
        interleave(b1, b2, 6, sched, max_exponent=1)


def test_interleave_chain(sched):
    b1, b2 = parse("pow(eps, -1)"), parse("exp(1/eps)")
    nets, verdicts = interleave_chain(b1, b2, 2, 4, sched)
    assert nets[0] == b1 and nets[-1] == b2
    assert len(nets) == 4
    assert list(nets[1].switches[:4]) == [Fraction(1), Fraction(1, 10), Fraction(1, 10 ** 3), Fraction(1, 10 ** 5)]
    assert all(v.holds for v in verdicts)


def test_hybrid_switches_are_found_on_demand(sched):
    b1, b2 = parse("pow(eps, -1)"), parse("exp(1/eps)")
    hybrid, _ = interleave(b1, b2, 3, sched)
    assert hybrid.switch(6) == Fraction(1, 10 ** 5)
    assert hybrid.branch(Fraction(1, 10 ** 5)) == b2
    assert hybrid.branch(Fraction(1, 10 ** 4)) == b1
    assert hybrid.witness_points(Fraction(1, 10 ** 4)) == [Fraction(1, 10 ** k) for k in range(1, 5)]


def test_hybrid_lies_strictly_between(sched):
    b1, b2 = parse("pow(eps, -1)"), parse("exp(1/eps)")
    hybrid, _ = interleave(b1, b2, 4, sched)
    assert moderate_in(hybrid, principal("AG(b1)", b1), sched).fails
    assert moderate_in(b2, principal("AG(hybrid)", hybrid), sched).fails


def test_interleaving_without_strictness_fails(sched):
    hybrid = HybridNet(parse("pow(eps, -1)"), parse("pow(eps, -4)"), sched.precision)
    assert hybrid.switch(3) == Fraction(1, 100)
    assert hybrid.switch(4) is None
    witnesses = [InterleaveWitness(n, hybrid.switch(n), None, hybrid.evaluate_at(hybrid.switch(n)), True) for n in (2, 3)]
    verdict = verify_interleaving(hybrid, witnesses, sched)
    assert verdict.fails
    assert verdict.evidence["strictness"]["hybrid outside AG(b1)"].holds
