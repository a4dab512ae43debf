import math

import numpy as np
import pytest
from hypothesis import assume, settings
from hypothesis import strategies as st

from causal_witness.twostate import TwoState

settings.register_profile("default", deadline=None, max_examples=60)
settings.register_profile("thorough", deadline=None, max_examples=1000)
settings.load_profile("default")


def random_ket(rng):
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)


def random_two_state(rng, min_overlap=0.05):
    while True:
        ts = TwoState(random_ket(rng), random_ket(rng))
        if abs(ts.overlap) >= min_overlap:
            return ts


def random_hermitian(rng, dim=2):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (m + m.conj().T) / 2


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


angles = st.floats(0.0, 2 * math.pi, allow_nan=False)
thetas = st.floats(0.0, 1.5, allow_nan=False)
probabilities = st.floats(0.0, 1.0, allow_nan=False)


@st.composite
def kets(draw):
    theta = draw(st.floats(0.0, math.pi / 2))
    phase = draw(angles)
    glob = draw(angles)
    return np.exp(1j * glob) * np.array([math.cos(theta), np.exp(1j * phase) * math.sin(theta)])


@st.composite
def two_states(draw, min_overlap=0.05):
    ts = TwoState(draw(kets()), draw(kets()))
    assume(abs(ts.overlap) >= min_overlap)
    return ts
