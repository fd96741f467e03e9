import math

import numpy as np
import pytest

from spinfreeze import YSpec, build_bifurcated_y, build_chain, build_y

HALF_PI = math.pi / 2


def all_topologies():
    """Every builder topology used across the suite, keyed by a readable id."""
    return {
        "chain2": build_chain(2),
        "chain7": build_chain(7),
        "y11": build_y(YSpec(1, 1)),
        "y01": build_y(YSpec(0, 1)),
        "y33": build_y(YSpec(3, 3)),
        "y23": build_y(YSpec(2, 3)),
        "bif11": build_bifurcated_y(YSpec(1, 1)),
        "bif33": build_bifurcated_y(YSpec(3, 3)),
    }


@pytest.fixture
def rng():
    return np.random.default_rng(20240615)


def random_state(rng, n):
    c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return c / np.linalg.norm(c)
