import math

import numpy as np
import pytest
from hypothesis import strategies as st

from complementarity.classical import CoherenceSpec, distance_to_singular_angle
from complementarity.distributions import PhiGrid
from complementarity.quantum import BlochVector

TWO_PI = 2 * math.pi


@pytest.fixture
def grid():
    return PhiGrid(256)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def _spec(i1, mu, delta):
    return CoherenceSpec.from_i1(i1, mu, delta)


specs = st.builds(
    _spec,
    st.floats(0.01, 0.99),
    st.floats(0.0, 1.0),
    st.floats(0.0, TWO_PI, exclude_max=True),
)

# polarizer angles away from the kernel singularities at multiples of pi/4
varthetas = st.floats(0.05, math.pi / 2 - 0.05).filter(lambda v: distance_to_singular_angle(v) > 0.05)


@st.composite
def bloch_vectors(draw, max_norm=1.0):
    r = draw(st.floats(0.0, max_norm))
    cos_t = draw(st.floats(-1.0, 1.0))
    phi = draw(st.floats(0.0, TWO_PI))
    sin_t = math.sqrt(max(0.0, 1 - cos_t * cos_t))
    return BlochVector(r * sin_t * math.cos(phi), r * sin_t * math.sin(phi), r * cos_t)


grid_sizes = st.integers(3, 64)


def random_spec(rng) -> CoherenceSpec:
    return CoherenceSpec.from_i1(rng.uniform(0.01, 0.99), rng.uniform(0, 1), rng.uniform(0, TWO_PI))


def random_bloch(rng, max_norm=1.0) -> BlochVector:
    v = rng.normal(size=3)
    v *= max_norm * rng.uniform(0, 1) ** (1 / 3) / np.linalg.norm(v)
    return BlochVector(*v)


def random_vartheta(rng) -> float:
    while True:
        v = rng.uniform(0.05, math.pi / 2 - 0.05)
        if distance_to_singular_angle(v) > 0.05:
            return v


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    setattr(item, f"rep_{rep.when}", rep)
