"""Net DSL: parser, printer, evaluation, derivatives and growth keys"""

from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from errors import ExpressionSyntaxError, NetDomainError, NotDifferentiableError, UnknownIdentifierError
from netlang import (
    EPS,
    Binary,
    Const,
    Pow,
    SamplingSchedule,
    Unary,
    Var,
    derivative,
    differentiate,
    eval_net,
    evaluate,
    fragment_form,
    growth_key,
    normalize,
    parse,
    print_expr,
    simplify,
    substitute,
    substitute_vars,
)


# ---------------------------------------------------------------------------
# Random fragment trees
# ---------------------------------------------------------------------------

fractions = st.fractions(min_value=-20, max_value=20, max_denominator=12)
leaves = st.one_of(st.just(EPS), fractions.map(Const))


def _extend(children):
    unary = st.tuples(st.sampled_from(["neg", "abs", "exp", "log"]), children).map(lambda p: Unary(*p))
    binary = st.tuples(
        st.sampled_from(["add", "sub", "mul", "div", "min", "max"]), children, children
    ).map(lambda p: Binary(*p))
    power = st.tuples(children, fractions).map(lambda p: Pow(p[0], Const(p[1])))
    return st.one_of(unary, binary, power)


trees = st.recursive(leaves, _extend, max_leaves=12)


@given(trees)
@settings(max_examples=200, deadline=None)
def test_parse_print_round_trip(tree):
    assert parse(print_expr(tree)) == tree


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def test_rational_literal_is_a_constant():
    assert parse("1/2") == Const(Fraction(1, 2))
    assert parse("1 / 2") == Binary("div", Const(1), Const(2))


def test_negative_literal_and_negation():
    assert parse("-3") == Const(-3)
    assert parse("-(eps)") == Unary("neg", EPS)


def test_precedence():
    assert parse("1 + 2 * eps") == Binary("add", Const(1), Binary("mul", Const(2), EPS))


@pytest.mark.parametrize("text,position", [("eps +", 5), ("pow(eps 2)", 8), ("exp(eps))", 8), ("eps $ 1", 4)])
def test_syntax_error_reports_position(text, position):
    with pytest.raises(ExpressionSyntaxError) as info:
        parse(text)
    assert info.value.position == position


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError):
        parse("gamma(eps)")


def test_extended_functions_need_the_flag():
    with pytest.raises(UnknownIdentifierError):
        parse("sin(eps)")
    assert parse("sin(x)", variables=("x",), extended=True) == Unary("sin", Var("x"))


def test_pow_exponent_must_be_rational():
    with pytest.raises(ExpressionSyntaxError):
        parse("pow(eps, eps)")


def test_variables_are_scoped():
    with pytest.raises(UnknownIdentifierError):
        parse("x * eps")
    assert parse("x * eps", variables=("eps", "x")) == Binary("mul", Var("x"), EPS)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def test_evaluate_exp_of_reciprocal_does_not_overflow():
    value = eval_net(parse("exp(1/eps)"), Fraction(1, 10 ** 6))
    assert mpmath.isfinite(value)
    assert mpmath.log10(value) > 400000


def test_evaluate_is_exact_on_rationals():
    value = evaluate(parse("pow(eps, -2) + 1/3"), {"eps": Fraction(1, 10)}, precision=40)
    with mpmath.workdps(40):
        assert abs(value - (100 + mpmath.mpf(1) / 3)) < mpmath.mpf(10) ** -35


def test_domain_errors():
    with pytest.raises(NetDomainError):
        evaluate(parse("log(eps - 1)"), {"eps": Fraction(1, 2)})
    with pytest.raises(NetDomainError):
        evaluate(parse("1 / (eps - eps)"), {"eps": Fraction(1, 2)})


def test_eval_net_rejects_points_outside_the_unit_interval():
    with pytest.raises(NetDomainError):
        eval_net(EPS, 2)


# ---------------------------------------------------------------------------
# Rewriting
# ---------------------------------------------------------------------------

def test_simplify_folds_constants_and_neutral_elements():
    assert simplify(parse("(1 + 2) * eps")) == Binary("mul", Const(3), EPS)
    assert simplify(parse("0 + eps * 1")) == EPS
    assert simplify(parse("pow(eps, 0)")) == Const(1)


def test_substitute_composes():
    assert substitute(parse("pow(eps, 2)"), parse("pow(eps, 3)")) == Pow(EPS, Const(6))
    assert substitute(parse("exp(1/eps)"), EPS) == parse("exp(1/eps)")


def test_substitute_vars_is_simultaneous():
    e = parse("x - t", variables=("x", "t"))
    swapped = substitute_vars(e, {"x": Var("t"), "t": Var("x")})
    assert swapped == parse("t - x", variables=("x", "t"))


def test_normalize_gives_one_tree_per_net():
    assert normalize(parse("eps * eps")) == normalize(parse("pow(eps, 2)"))
    assert normalize(parse("exp(-log(eps))")) == normalize(parse("pow(eps, -1)"))


def test_differentiate_polynomial():
    x = ("x",)
    d = differentiate(parse("pow(x, 3)", variables=x), "x")
    assert evaluate(d, {"x": 2}) == 12


def test_differentiate_chain_rule():
    e = parse("exp(x / eps)", variables=("x", "eps"))
    d = differentiate(e, "x")
    value = evaluate(d, {"x": 0, "eps": Fraction(1, 4)})
    assert value == 4


def test_second_derivative_of_sin_is_minus_sin():
    e = parse("sin(x)", variables=("x",), extended=True)
    d2 = derivative(e, "x", order=2)
    point = {"x": Fraction(1, 3)}
    assert abs(evaluate(d2, point) + evaluate(e, point)) < mpmath.mpf(10) ** -40


def test_min_is_not_differentiable():
    with pytest.raises(NotDifferentiableError):
        differentiate(parse("min(x, 1)", variables=("x",)), "x")


# ---------------------------------------------------------------------------
# Growth keys
# ---------------------------------------------------------------------------

def test_growth_key_orders_by_exponential_then_power_then_log():
    keys = [growth_key(parse(text)) for text in (
        "pow(eps, 2)",
        "-log(eps)",
        "pow(eps, -1)",
        "pow(eps, -1) * -log(eps)",
        "exp(1/eps)",
    )]
    assert keys == sorted(keys)
    assert all(k.in_fragment for k in keys)


def test_growth_key_description():
    assert growth_key(parse("3 * pow(eps, -2) + eps")).describe() == "(0, 2, 0)"
    assert growth_key(parse("eps - eps")).is_zero
    assert growth_key(parse("eps - eps")).describe() == "zero"


def test_out_of_fragment():
    assert not growth_key(parse("floor(1/eps)")).in_fragment
    assert growth_key(parse("exp(2)")).describe() == "OutOfFragment"
    with pytest.raises(ValueError):
        growth_key(parse("floor(eps)")).compare(growth_key(EPS))


def test_fragment_form_expands_small_powers():
    form = fragment_form(parse("pow(1 + eps, 2)"))
    assert form is not None
    assert len(form.terms) == 3


def test_schedule_rejects_short_or_bad_input():
    with pytest.raises(ValueError):
        SamplingSchedule(count=4)
    with pytest.raises(ValueError):
        SamplingSchedule(ratio=Fraction(3, 2))
    assert SamplingSchedule().points()[0] == Fraction(1, 10)
    assert SamplingSchedule().decades() == pytest.approx(11)
