"""Mollifiers, embeddings of distributions and the embedding diagrams"""

from fractions import Fraction

import mpmath
import pytest

import embed as embed_module
from cgf import Compact
from embed import (
    EMBED_SCHEDULE,
    Combination,
    Delta,
    DeltaPrime,
    Heaviside,
    Mollifier,
    Smooth,
    approximation_order,
    check_embedding_diagrams,
    check_linearity_and_injectivity,
    check_mollifier,
    distribution_derivative,
    distribution_from_text,
    embed,
    embed_net,
    gaussian_moment,
    gaussian_mollifier,
    generator_rate,
    hermite_mollifier,
    mollifier_from_text,
    polynomial_degree,
)
from errors import ConfigError, PreconditionError, UnsupportedDistributionError
from netlang import ZERO, parse, print_expr, substitute
from zoo import morphism_by_name

B = parse("pow(eps, -1)")


def fx(text):
    return parse(text, variables=("x",), extended=True)


@pytest.fixture(scope="module")
def rho():
    return hermite_mollifier(3)


# ---------------------------------------------------------------------------
# Mollifiers
# ---------------------------------------------------------------------------

def test_gaussian_moments():
    assert [gaussian_moment(n) for n in range(5)] == [1, 0, Fraction(1, 2), 0, Fraction(3, 4)]


def test_hermite_mollifier_has_exact_order_three(rho):
    assert rho.poly == (Fraction(3, 2), Fraction(0), Fraction(-1))
    assert rho.exact_moment(0) == 1
    assert rho.exact_order() == 3
    assert rho.exact_moment(4) == Fraction(-3, 4)
    assert gaussian_mollifier().exact_order() == 1


def test_moments_by_quadrature(rho):
    report = check_mollifier(rho, 3)
    assert report.order == 3
    assert report.mass == pytest.approx(1.0, abs=1e-8)
    assert all(abs(value) <= 1e-8 for k, value, _ in report.moments if k > 0)
    assert report.decay_verified
    assert report.to_dict()["order"] == "3"


def test_mollifier_from_text():
    assert mollifier_from_text("hermite(5)").name == "hermite(5)"
    assert mollifier_from_text(" gaussian ").name == "gaussian"
    for text in ("box", "hermite(x)"):
        with pytest.raises(ConfigError):
            mollifier_from_text(text)
    with pytest.raises(PreconditionError):
        hermite_mollifier(0)


# ---------------------------------------------------------------------------
# Distributions
# ---------------------------------------------------------------------------

def test_distribution_from_text():
    assert distribution_from_text("delta") == Delta()
    assert distribution_from_text("smooth(pow(x, 2))") == Smooth(fx("pow(x, 2)"))
    with pytest.raises(UnsupportedDistributionError):
        distribution_from_text("gamma")
    with pytest.raises(UnsupportedDistributionError):
        Smooth(parse("eps"))


def test_distribution_derivatives():
    assert distribution_derivative(Heaviside()) == Delta()
    assert distribution_derivative(Delta()) == DeltaPrime()
    assert distribution_derivative(DeltaPrime()) is None
    combined = Combination(((Fraction(2), Heaviside()),))
    assert distribution_derivative(combined) == Combination(((Fraction(2), Delta()),))


def test_polynomial_degree():
    assert polynomial_degree(fx("pow(x, 4)")) == 4
    assert polynomial_degree(fx("3")) == 0
    assert polynomial_degree(ZERO) == -1
    assert polynomial_degree(fx("sin(x)")) is None


# ---------------------------------------------------------------------------
# Embeddings
# ---------------------------------------------------------------------------

def test_low_degree_polynomials_are_reproduced(rho):
    net = embed_net(Smooth(fx("pow(x, 2)")), B, rho)
    assert net.expr == fx("pow(x, 2)")


def test_quartic_picks_up_the_fourth_moment(rho):
    net = embed_net(Smooth(fx("pow(x, 4)")), B, rho)
    with mpmath.workdps(30):
        value = net.value(Fraction(1, 10), 0, 30)
        assert abs(value + mpmath.mpf(3) / 4 * mpmath.mpf(10) ** -4) < mpmath.mpf(10) ** -25


def test_quartic_convergence_exponent(rho):
    exponent = approximation_order(fx("pow(x, 4)"), B, rho, Compact(-1, 1))
    assert exponent == pytest.approx(4.0, abs=1e-6)
    assert approximation_order(fx("pow(x, 2)"), B, rho, Compact(-1, 1)) is None


def test_heaviside_closed_form(rho):
    net = embed_net(Heaviside(), B, rho)
    with mpmath.workdps(30):
        for eps in EMBED_SCHEDULE.points():
            assert abs(net.value(eps, Fraction(0), 30) - mpmath.mpf(1) / 2) < mpmath.mpf(10) ** -25
        assert abs(net.value(Fraction(1, 10), 1, 30) - 1) < mpmath.mpf(10) ** -20


def test_heaviside_needs_a_hermite_mollifier():
    custom = Mollifier("custom", fx("exp(-pow(x, 2)) * pow(pi, -1/2)"))
    with pytest.raises(UnsupportedDistributionError):
        embed_net(Heaviside(), B, custom)


def test_embedded_delta_is_moderate(rho):
    rep = embed(Delta(), B, rho, max_order=1)
    assert rep.verdict.holds
    assert rep.b.name == "AG(pow(eps, -1))"


def test_generator_must_be_unbounded(rho):
    with pytest.raises(PreconditionError):
        embed(Delta(), parse("eps"), rho)


# ---------------------------------------------------------------------------
# Diagrams
# ---------------------------------------------------------------------------

def test_embedding_diagrams(rho):
    samples = [Smooth(fx("pow(x, 2)")), Smooth(fx("pow(x, 4)")), Delta(), Heaviside()]
    square = morphism_by_name("square", EMBED_SCHEDULE)
    report = check_embedding_diagrams(samples, B, rho, triangles=[(square, B)])
    labels = [label for label, _ in report.checks]
    assert "derivation[heaviside]" in labels
    assert "reproduction[smooth(pow(x, 4))]" in labels
    assert "triangle[square]" in labels
    verdicts = dict(report.checks)
    assert not any(v.fails for v in verdicts.values()), {k: v.tag.value for k, v in verdicts.items()}
    assert all(v.holds for k, v in verdicts.items() if not k.startswith("reproduction"))
    assert verdicts["reproduction[smooth(pow(x, 2))]"].source == "symbolic"
    assert verdicts["reproduction[smooth(pow(x, 4))]"].evidence["meets_order"] is True


def test_triangle_along_a_logarithmic_morphism(rho):
    lam = morphism_by_name("lambda", EMBED_SCHEDULE)
    report = check_embedding_diagrams([Delta(), Heaviside()], B, rho, triangles=[(lam, B)])
    verdict = dict(report.checks)["triangle[lambda]"]
    assert verdict.holds
    assert verdict.evidence["b2"] == print_expr(substitute(B, lam.map))


def test_reproduction_requires_the_mollifier_order(rho, monkeypatch):
    monkeypatch.setattr(embed_module, "approximation_order", lambda *args, **kwargs: 2.0)
    report = check_embedding_diagrams([Smooth(fx("pow(x, 4)"))], B, rho)
    verdict = dict(report.checks)["reproduction[smooth(pow(x, 4))]"]
    assert verdict.fails
    assert verdict.evidence["meets_order"] is False
    assert verdict.evidence["required_exponent"] == pytest.approx(3.75, abs=1e-6)


@pytest.mark.parametrize("text,rate", [("pow(eps, -1)", 1.0), ("pow(eps, -2)", 2.0), ("pow(eps, -1/2)", 0.5)])
def test_generator_rate(text, rate):
    assert generator_rate(parse(text), EMBED_SCHEDULE) == pytest.approx(rate, abs=1e-9)


def test_linearity_and_injectivity(rho):
    report = check_linearity_and_injectivity([Delta(), Heaviside()], B, rho)
    labels = [label for label, _ in report.checks]
    assert labels[0] == "zero"
    assert "linearity[2*delta + heaviside]" in labels
    assert report.all_hold
