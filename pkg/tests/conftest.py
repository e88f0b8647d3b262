"""Session fixtures: the shipped scenarios, each simulated once.

The mission runs are the expensive part of the suite, so they are
computed on first use and shared; wall-clock runtime is recorded next
to each report for the performance checks.
"""

import time
from pathlib import Path

import pytest

from uavsearch import load_scenario, monte_carlo_validate, run_mission

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


def _timed_mission(name):
    config = load_scenario(SCENARIO_DIR / name)
    started = time.perf_counter()
    report = run_mission(config)
    return config, report, time.perf_counter() - started


@pytest.fixture(scope="session")
def scenario_dir():
    return SCENARIO_DIR


@pytest.fixture(scope="session")
def mission1_run():
    return _timed_mission("mission1.json")


@pytest.fixture(scope="session")
def mission2_run():
    return _timed_mission("mission2.json")


@pytest.fixture(scope="session")
def mission3_run():
    return _timed_mission("mission3.json")


@pytest.fixture(scope="session")
def mission1_validation():
    config = load_scenario(SCENARIO_DIR / "mission1.json")
    started = time.perf_counter()
    report = monte_carlo_validate(config)
    return report, time.perf_counter() - started
