"""Command-line front-end, run in-process"""

import io
import json
from fractions import Fraction

import mpmath
import pytest

from gaugeforge import main
from netlang import evaluate
from ode import load_problem, log_problem


def run(argv):
    stream = io.StringIO()
    code = main(argv, stream)
    return code, stream.getvalue()


def test_check_gauge_holds():
    code, out = run(["check-gauge", "--gauge", "pol"])
    assert code == 0
    data = json.loads(out)
    assert [r["name"] for r in data["records"]] == [f"axiom {k}" for k in ("i", "ii", "iii", "iv", "v")]
    assert data["config"]["gauge"] == {"name": "pol"}
    assert data["exit_code"] == "0"


def test_check_gauge_reports_a_failing_axiom():
    code, out = run(["check-gauge", "--gauge", "const1"])
    assert code == 1
    records = {r["name"]: r for r in json.loads(out)["records"]}
    assert records["axiom ii"]["verdict"] == "Fails"


def test_output_is_deterministic():
    assert run(["check-gauge", "--gauge", "pol"]) == run(["check-gauge", "--gauge", "pol"])


def test_text_format():
    code, out = run(["check-gauge", "--gauge", "pol", "--format", "text"])
    assert code == 0
    assert "axiom iii" in out and "(exit 0)" in out


def test_malformed_config_exits_with_2(tmp_path):
    config = tmp_path / "bad.toml"
    config.write_text("[run\nprecision = ", encoding="utf-8")
    assert run(["check-gauge", "--config", str(config)]) == (2, "")


def test_unknown_config_section_exits_with_2(tmp_path):
    config = tmp_path / "unknown.toml"
    config.write_text("[plot]\ncolour = \"red\"\n", encoding="utf-8")
    assert run(["check-gauge", "--config", str(config)])[0] == 2


def test_bad_schedule_flag_exits_with_2():
    assert run(["check-gauge", "--schedule", "0.1,0.1"])[0] == 2
    assert run(["check-gauge", "--schedule", "0.1,1.5,9"])[0] == 2


def test_config_file_feeds_the_command(tmp_path):
    config = tmp_path / "gauge.toml"
    config.write_text('[gauge]\nname = "const1"\n', encoding="utf-8")
    assert run(["check-gauge", "--config", str(config)])[0] == 1
    assert run(["check-gauge", "--config", str(config), "--gauge", "pol"])[0] == 0


def test_morphism_from_a_map():
    code, out = run(["morphism", "--map", "pow(eps,2)", "--from", "Is", "--to", "Is"])
    assert code == 0
    names = [r["name"] for r in json.loads(out)["records"]]
    assert names[0] == "morphism"
    assert "preserve eps -> 0" in names


def test_rejected_morphism_exits_with_1():
    code, out = run(["morphism", "--map", "2 + eps"])
    assert code == 1
    assert len(json.loads(out)["records"]) == 1


def test_morphism_needs_a_map_or_a_name():
    assert run(["morphism"])[0] == 2


def test_syntax_errors_exit_with_2():
    assert run(["morphism", "--map", "pow(eps 2)"])[0] == 2


def test_ode_transform_emits_the_problem(tmp_path):
    emitted = tmp_path / "transformed.toml"
    report = tmp_path / "report.json"
    code, out = run(["ode", "transform", "--problem", "exponential", "--morphism", "lambda",
                     "--emit", str(emitted), "--out", str(report)])
    assert code == 0
    assert out == ""
    assert json.loads(report.read_text(encoding="utf-8"))["config"]["action"] == "transform"
    problem = load_problem(emitted)
    point = {"eps": Fraction(1, 10), "x": Fraction(2), "t": Fraction(0)}
    with mpmath.workdps(30):
        gap = evaluate(problem.rhs, point, 30) - evaluate(log_problem().rhs, point, 30)
        assert abs(gap) < mpmath.mpf(10) ** -20


def test_ode_solve_then_classify(tmp_path):
    solution = tmp_path / "solution.json"
    code, out = run(["ode", "solve", "--problem", "logarithmic", "--emit", str(solution)])
    assert code == 0
    names = [r["name"] for r in json.loads(out)["records"]]
    assert names == ["initial time", "residual", "rk4 cross-check"]
    assert solution.exists()

    code, out = run(["ode", "classify", "--solution", str(solution), "--gauge", "pol", "--compact", "[0, 1]"])
    assert code == 0
    assert json.loads(out)["records"][0]["name"] == "moderate in B_pol"


def test_ode_missing_problem_file_exits_with_2(tmp_path):
    assert run(["ode", "solve", "--problem", str(tmp_path / "absent.toml")])[0] == 2


def test_unknown_subcommand_is_an_argparse_error():
    with pytest.raises(SystemExit) as info:
        main(["plot"])
    assert info.value.code == 2
