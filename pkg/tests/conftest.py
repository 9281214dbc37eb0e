from __future__ import annotations

import random

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from ifspor.figures import fig1, fig4, fig5, fig6
from ifspor.randsys import random_system

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@st.composite
def systems(draw, dense=None):
    """Random valid systems, reproducible from a drawn seed."""
    seed = draw(st.integers(0, 2**32 - 1))
    d = draw(st.booleans()) if dense is None else dense
    return random_system(random.Random(seed), dense=d, name=f"rand{seed}")


@pytest.fixture
def f1():
    return fig1()


@pytest.fixture
def f4():
    return fig4()


@pytest.fixture
def f5():
    return fig5()


@pytest.fixture
def figures():
    return [fig1(), fig4(), fig5(), fig6(3)]
