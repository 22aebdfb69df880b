import os
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent
sys.path.insert(0, str(ROOT))

from planefix.modules.angles import circle_polyline  # noqa: E402
from planefix.modules.builtin_maps import example_4_5  # noqa: E402
from planefix.modules.geom import Tolerances  # noqa: E402

SCENARIOS = ROOT / "scenarios"


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: end-to-end pipeline runs (part of the default run)")


@pytest.fixture
def tolerances() -> Tolerances:
    return Tolerances()


@pytest.fixture
def unit_circle():
    return circle_polyline((0.0, 0.0), 1.0, 64)


@pytest.fixture(scope="session")
def spiral():
    """The 3-step spiral example with beta = 1.9."""
    return example_4_5(n=3, beta=1.9)


@pytest.fixture(scope="session")
def scenarios_dir() -> Path:
    return SCENARIOS


@pytest.fixture(scope="session")
def example_4_5_run():
    """Scenario and report of the full certify run on example_4_5.scn, shared across modules."""
    from planefix.modules.commands import run
    from planefix.modules.scenario import load_scenario

    scn = load_scenario(os.fspath(SCENARIOS / "example_4_5.scn"))
    return scn, run(scn)
