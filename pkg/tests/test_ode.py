"""Linear ODEs with net data: closed forms, RK4, transformation and transfer"""

import json
from fractions import Fraction

import mpmath
import pytest

from cgf import Compact
from errors import BlowUpError, ConfigError, PreconditionError, UnverifiedMorphismError
from index import IS_S, morphism
from netlang import Const, EPS, evaluate, parse
from ode import (
    OdeProblem,
    classify,
    compare_numeric,
    exponential_problem,
    load_problem,
    load_solution,
    log_problem,
    residual,
    rk4_integrate,
    rk4_solve,
    save_problem,
    save_solution,
    solve,
    solve_closed_form,
    transfer_solution,
    transform,
)
from zoo import b_pol, gauge_morphism_by_name, morphism_by_name

ODE_VARS = ("eps", "x", "t")


def close(a, b, digits=20):
    return abs(a - b) <= mpmath.mpf(10) ** -digits * (1 + abs(b))


# ---------------------------------------------------------------------------
# Problems
# ---------------------------------------------------------------------------

def test_problem_variables_are_checked():
    with pytest.raises(PreconditionError):
        OdeProblem(parse("x * y", variables=("x", "y")), Const(0), Const(1))
    with pytest.raises(PreconditionError):
        OdeProblem(parse("x", variables=ODE_VARS), parse("t", variables=ODE_VARS), Const(1))
    with pytest.raises(PreconditionError):
        OdeProblem(parse("x", variables=ODE_VARS), Const(0), Const(1), Fraction(2), Fraction(1))


def test_initial_time_must_lie_in_the_interval(sched):
    assert exponential_problem().check_initial_time(sched).holds
    late = OdeProblem(parse("x", variables=ODE_VARS), parse("1 / eps"), Const(1))
    assert late.check_initial_time(sched).fails


def test_problem_toml_round_trip(tmp_path):
    path = save_problem(log_problem(), tmp_path / "problems" / "log.toml")
    assert path.exists()
    assert load_problem(path) == log_problem()


def test_malformed_problem_files(tmp_path):
    unknown = tmp_path / "unknown.toml"
    unknown.write_text('rhs = "x"\nx0 = "1"\nstiffness = 3\n', encoding="utf-8")
    with pytest.raises(ConfigError):
        load_problem(unknown)
    missing = tmp_path / "missing.toml"
    missing.write_text('x0 = "1"\n', encoding="utf-8")
    with pytest.raises(ConfigError):
        load_problem(missing)
    bad_bound = tmp_path / "bound.toml"
    bad_bound.write_text('rhs = "x"\nx0 = "1"\nt2 = "two"\n', encoding="utf-8")
    with pytest.raises(ConfigError):
        load_problem(bad_bound)
    with pytest.raises(ConfigError):
        load_problem(tmp_path / "absent.toml")


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def test_exponential_closed_form(sched):
    solution = solve_closed_form(exponential_problem())
    with mpmath.workdps(30):
        assert close(solution.value(Fraction(1, 10), 1, 30), mpmath.exp(10))
    verdict = residual(solution, sched)
    assert verdict.holds and verdict.source == "symbolic"


def test_nonlinear_problems_have_no_closed_form(sched):
    problem = OdeProblem(parse("x * x", variables=ODE_VARS), Const(0), Const(1))
    with pytest.raises(PreconditionError):
        solve_closed_form(problem)
    with pytest.raises(PreconditionError):
        solve(exponential_problem(), sched, method="euler")


def test_classification_by_gauge(sched):
    k = Compact(0, 1)
    exponential = solve_closed_form(exponential_problem())
    logarithmic = solve_closed_form(log_problem())
    assert classify(exponential, b_pol(), k, sched, grid=21).fails
    assert classify(logarithmic, b_pol(), k, sched, grid=21).holds
    with pytest.raises(PreconditionError):
        classify(logarithmic, b_pol(), Compact(0, 3), sched)


def test_solution_json_round_trip(tmp_path):
    solution = solve_closed_form(log_problem())
    path = save_solution(solution, tmp_path / "log.json")
    loaded = load_solution(path)
    assert loaded.problem == log_problem()
    with mpmath.workdps(30):
        assert close(loaded.value(Fraction(1, 10), 1, 30), solution.value(Fraction(1, 10), 1, 30))


def test_load_solution_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_solution(tmp_path / "absent.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_solution(broken)
    numeric = tmp_path / "numeric.json"
    numeric.write_text(json.dumps({"kind": "numeric", "problem": log_problem().to_dict()}), encoding="utf-8")
    with pytest.raises(ConfigError):
        load_solution(numeric)


# ---------------------------------------------------------------------------
# RK4
# ---------------------------------------------------------------------------

def test_rk4_matches_the_exact_solution():
    trajectory = rk4_integrate(log_problem(), Fraction(1, 10), 1.0)
    assert trajectory.value_at(1.0) == pytest.approx(10.0, rel=1e-8)
    assert trajectory.step == pytest.approx(1e-3, rel=1e-2)


def test_rk4_solve_skips_small_eps(short_sched):
    numeric = solve(log_problem(), short_sched, method="rk4")
    assert sorted(numeric.trajectories) == [Fraction(1, 100), Fraction(1, 10)]
    closed = solve_closed_form(log_problem())
    assert compare_numeric(closed, numeric, [0.5, 1.0]).holds
    assert classify(numeric, b_pol(), Compact(0, 1), short_sched).inconclusive


def test_blow_up_is_reported():
    riccati = OdeProblem(parse("x * x", variables=ODE_VARS), Const(0), Const(1))
    with pytest.raises(BlowUpError) as info:
        rk4_integrate(riccati, Fraction(1, 2), 1.5)
    assert 0.9 < info.value.time <= 1.5


def test_rk4_solve_records_blow_ups(short_sched):
    riccati = OdeProblem(parse("x * x", variables=ODE_VARS), Const(0), Const(1))
    numeric = rk4_solve(riccati, short_sched, t_end=1.5)
    assert set(numeric.blowups) == {Fraction(1, 10), Fraction(1, 100)}
    assert "blowups" in numeric.to_dict()


# ---------------------------------------------------------------------------
# Transformation and transfer
# ---------------------------------------------------------------------------

def test_lambda_turns_the_exponential_problem_into_the_log_problem(sched):
    transformed = transform(exponential_problem(), morphism_by_name("lambda", sched))
    assert transformed.name == "exponential@lambda"
    point = {"eps": Fraction(1, 10), "x": Fraction(2), "t": Fraction(0)}
    with mpmath.workdps(30):
        assert close(evaluate(transformed.rhs, point, 30), evaluate(log_problem().rhs, point, 30))


def test_identity_transform_is_a_no_op(sched):
    problem = exponential_problem()
    same = morphism(EPS, IS_S, IS_S, sched)
    assert transform(problem, same) is problem


def test_transform_needs_a_verified_morphism(sched):
    with pytest.raises(UnverifiedMorphismError):
        transform(exponential_problem(), morphism(parse("2 + eps"), IS_S, IS_S, sched))


def test_transfer_along_lambda(sched):
    solution = solve_closed_form(exponential_problem())
    transferred, verdicts = transfer_solution(solution, morphism_by_name("lambda", sched), sched)
    assert verdicts["residual"].holds
    with mpmath.workdps(30):
        assert close(transferred.value(Fraction(1, 10), 1, 30), mpmath.mpf(10))


def test_transfer_checks_both_gauges(sched):
    solution = solve_closed_form(exponential_problem())
    m = gauge_morphism_by_name("lambda", sched)
    _, verdicts = transfer_solution(solution, m, sched, Compact(0, 1), grid=21)
    assert set(verdicts) == {"residual", "source", "target"}
    assert verdicts["source"].holds and verdicts["target"].holds
