from pathlib import Path

import numpy as np
import pytest

from chebalance.contacts import Contact, ContactLimits, Mode, SlidingSpec
from chebalance.spatial import WrenchTransform, axis_angle


def make_contact(cid, position, rotation=None, mode=Mode.FIXED, limits=None, sliding=None):
    R = np.eye(3) if rotation is None else rotation
    return Contact(cid, WrenchTransform(R, position), mode, limits or ContactLimits(), sliding)


def random_rotation(rng):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


@pytest.fixture
def two_feet():
    """Two point feet at (0, +-0.1, 0), 40 kg robot."""
    lim = ContactLimits(mu=0.6, sigma_x=0.0, sigma_y=0.0, fz_min=0.0, fz_max=1000.0, tz_min=-5.0, tz_max=5.0)
    return [make_contact("L", [0.0, 0.1, 0.0], limits=lim), make_contact("R", [0.0, -0.1, 0.0], limits=lim)]


DATA = Path(__file__).resolve().parents[1] / "src" / "chebalance" / "data"
SCENARIO = DATA / "multicontact_scenario.txt"
FOUR_CONTACT = DATA / "four_contact_stance.txt"


@pytest.fixture(scope="session")
def scenario():
    from chebalance.scenario_io import load

    return load(SCENARIO)


@pytest.fixture(scope="session")
def scenario_run(scenario):
    from chebalance.harness import run

    return run(scenario)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


__all__ = ["make_contact", "random_rotation", "axis_angle", "SlidingSpec"]
