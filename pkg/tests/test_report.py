"""Run configuration, environment settings and report serialization"""

import json
from fractions import Fraction

import pytest

from config import Config, get_config, parse_schedule
from errors import ConfigError
from index import Verdict
from report import EXIT_FAILS, EXIT_INCONCLUSIVE, EXIT_OK, Report, RunConfig, validate_sections


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


# ---------------------------------------------------------------------------
# Environment
# ---------------------------------------------------------------------------

def test_environment_defaults():
    config = get_config()
    assert config.PRECISION == 50
    assert config.default_schedule().count == 12
    assert config.validate()


def test_precision_from_the_environment(monkeypatch):
    monkeypatch.setenv("GAUGEFORGE_PRECISION", "80")
    assert Config().PRECISION == 80
    monkeypatch.setenv("GAUGEFORGE_PRECISION", "10")
    with pytest.raises(ConfigError):
        Config()
    monkeypatch.setenv("GAUGEFORGE_PRECISION", "many")
    with pytest.raises(ConfigError):
        Config()


def test_env_file_is_loaded(tmp_path, monkeypatch):
    monkeypatch.setenv("GAUGEFORGE_MOLLIFIER", "unset")
    monkeypatch.delenv("GAUGEFORGE_MOLLIFIER")
    env = write(tmp_path / ".env", "GAUGEFORGE_MOLLIFIER=gaussian\n")
    config = Config(env)
    assert config.env_file == env
    assert config.MOLLIFIER == "gaussian"


def test_parse_schedule():
    sched = parse_schedule("1/10, 1/10, 9", 30)
    assert sched.count == 9 and sched.precision == 30
    assert sched.points()[0] == Fraction(1, 10)
    for text in ("0.1,0.1", "0.1,x,9", "0.1,2,9", "0.1,0.1,3"):
        with pytest.raises(ConfigError):
            parse_schedule(text, 30)


# ---------------------------------------------------------------------------
# Run configuration
# ---------------------------------------------------------------------------

def test_validate_sections_rejects_unknown_names():
    with pytest.raises(ConfigError):
        validate_sections({"plot": {}})
    with pytest.raises(ConfigError):
        validate_sections({"run": {"colour": "red"}})
    with pytest.raises(ConfigError):
        validate_sections({"run": 3})


def test_validate_sections_checks_types():
    with pytest.raises(ConfigError):
        validate_sections({"run": {"precision": "50"}})
    with pytest.raises(ConfigError):
        validate_sections({"gauge": {"depth": True}})
    with pytest.raises(ConfigError):
        validate_sections({"embed": {"distributions": ["delta", 3]}})
    assert validate_sections({"schedule": {"start": 0.1, "count": 9}}) == {"schedule": {"start": 0.1, "count": 9}}


def test_flags_override_the_file(tmp_path):
    path = write(tmp_path / "run.toml", '[run]\nprecision = 40\nformat = "text"\n\n[gauge]\nname = "B_exp"\n')
    run_config = RunConfig.build("check-gauge", {"gauge": {"name": "pol", "param_range": None}}, path)
    assert run_config.get("gauge", "name") == "pol"
    assert run_config.precision == 40
    assert run_config.output_format == "text"
    assert run_config.get("gauge", "param_range", 6) == 6


def test_partial_schedule_section_uses_defaults():
    run_config = RunConfig.build("check-gauge", {"schedule": {"count": 9}})
    sched = run_config.schedule
    assert sched.count == 9
    assert sched.points()[0] == Fraction(1, 10)
    assert sched.precision == 50


@pytest.mark.parametrize("overrides", [
    {"run": {"format": "xml"}},
    {"run": {"precision": 12}},
    {"schedule": {"start": "2", "ratio": "0.1", "count": 9}},
    {"gauge": {"colour": "red"}},
])
def test_invalid_run_configurations(overrides):
    with pytest.raises(ConfigError):
        RunConfig.build("check-gauge", overrides)


def test_malformed_config_file(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.build("check-gauge", {}, write(tmp_path / "bad.toml", "[run\nprecision = "))
    with pytest.raises(ConfigError):
        RunConfig.build("check-gauge", {}, str(tmp_path / "absent.toml"))


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@pytest.fixture
def run_config():
    return RunConfig.build("check-gauge", {"gauge": {"name": "B_pol"}})


def test_exit_codes(run_config):
    report = Report(run_config)
    assert report.exit_code() == EXIT_OK
    report.add("first", "anchor", Verdict.holds_())
    assert report.exit_code() == EXIT_OK
    report.add("second", "anchor", Verdict.inconclusive_({"reason": "short tail"}))
    assert report.exit_code() == EXIT_INCONCLUSIVE
    report.add("third", "anchor", Verdict.fails_())
    assert report.exit_code() == EXIT_FAILS
    assert report.summary() == {"Holds": 1, "Fails": 1, "Inconclusive": 1}


def _filled(run_config):
    report = Report(run_config)
    report.add("ratio", "big-O", Verdict.holds_({"H": Fraction(3, 2), "slope": -0.5}), seconds=0.25, detail=[1, 2])
    report.outputs["gauge"] = {"name": "B_pol"}
    return report


def test_json_is_deterministic(run_config):
    first, second = _filled(run_config).to_json(), _filled(run_config).to_json()
    assert first == second
    data = json.loads(first)
    assert data["tool"] == "gaugeforge"
    assert data["config"]["gauge"] == {"name": "B_pol"}
    record = data["records"][0]
    assert record["evidence"] == {"H": "3/2", "slope": "-0.5"}
    assert record["data"] == {"detail": ["1", "2"]}
    assert "seconds" not in record
    assert data["exit_code"] == "0"


def test_timings_on_request():
    run_config = RunConfig.build("check-gauge", {"run": {"timing": True}})
    record = json.loads(_filled(run_config).to_json())["records"][0]
    assert record["seconds"] == "0.25"


def test_text_report(run_config):
    run_config.sections["run"] = {"format": "text"}
    text = _filled(run_config).render()
    assert text.startswith("gaugeforge")
    assert "ratio" in text and "Holds" in text
    assert "(exit 0)" in text


def test_report_written_to_file(tmp_path):
    out = tmp_path / "reports" / "gauge.json"
    run_config = RunConfig.build("check-gauge", {"run": {"out": str(out)}})
    assert _filled(run_config).write() == out
    assert json.loads(out.read_text(encoding="utf-8"))["summary"]["Holds"] == "1"
