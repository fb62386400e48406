"""Shared fixtures: Lib and Commands on the path, schedules and zoo gauges"""

import os
import sys
from fractions import Fraction

import pytest

ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
for sub in ("Lib", "Commands", ""):
    path = os.path.join(ROOT, sub) if sub else ROOT
    if path not in sys.path:
        sys.path.insert(0, path)

from netlang import SamplingSchedule  # noqa: E402
from zoo import b_exp, b_pol  # noqa: E402


@pytest.fixture(autouse=True)
def quiet_environment(monkeypatch):
    """Keep tests independent of a developer's .env and log settings"""
    import config

    monkeypatch.setenv("GAUGEFORGE_LOG_LEVEL", "WARNING")
    monkeypatch.delenv("GAUGEFORGE_LOG_FILE", raising=False)
    monkeypatch.delenv("GAUGEFORGE_PRECISION", raising=False)
    monkeypatch.delenv("GAUGEFORGE_SCHEDULE", raising=False)
    config.reset_config()
    yield
    config.reset_config()


@pytest.fixture
def sched():
    """Default schedule: eps_k = 10^-k, k = 1..12, 50 digits"""
    return SamplingSchedule()


@pytest.fixture
def short_sched():
    return SamplingSchedule(start=Fraction(1, 10), ratio=Fraction(1, 10), count=9, precision=30)


@pytest.fixture
def pol():
    return b_pol()


@pytest.fixture
def exp_gauge():
    return b_exp()
