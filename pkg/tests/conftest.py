"""
Shared fixtures and hypothesis strategies.
"""

from pathlib import Path

import pytest
from hypothesis import strategies as st

from demand.families import DemandSpec, make_demand

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture
def linear_spec() -> DemandSpec:
    """
    φ(A;b) = b + 1 − A/2, with A0 = 4/3 at b = 1.
    """
    return make_demand("linear", c=1.0, m=0.5, b=1.0)


@pytest.fixture
def exp_spec() -> DemandSpec:
    """
    φ(A) = exp(−A), with A0 = 0.5671432904097838 at b = 0.
    """
    return make_demand("exp_convex", c=1.0, alpha=1.0)


@pytest.fixture
def quad_spec() -> DemandSpec:
    return make_demand("quad_concave", c=1.0, m=0.5, kappa=0.5)


@pytest.fixture
def logistic_spec() -> DemandSpec:
    """
    Logistic demand with A0 = 1 at b = 0, on which nearest-point learning
    cycles between 0 and 1.39.
    """
    return make_demand("logistic", c=2.0, alpha=4.0, x0=1.0)


def _spec(family: str, b: float, **params: float) -> tuple[DemandSpec, float]:
    return make_demand(family, b=b, **params), b


_unit = st.floats(min_value=0.0, max_value=1.0)

random_specs = {
    "linear": st.builds(
        lambda c, m, b: _spec("linear", b, c=c, m=m),
        st.floats(0.1, 5.0),
        st.floats(0.0, 3.0),
        _unit,
    ),
    "exp_convex": st.builds(
        lambda c, alpha, b: _spec("exp_convex", b, c=c, alpha=alpha),
        st.floats(0.1, 5.0),
        st.floats(0.1, 3.0),
        _unit,
    ),
    "quad_concave": st.builds(
        lambda c, m, kappa, b: _spec("quad_concave", b, c=c, m=m, kappa=kappa),
        st.floats(0.5, 5.0),
        st.floats(0.1, 2.0),
        st.floats(0.1, 2.0),
        _unit,
    ),
    "logistic": st.builds(
        lambda c, alpha, x0, b: _spec("logistic", b, c=c, alpha=alpha, x0=x0),
        st.floats(0.5, 3.0),
        st.floats(0.5, 4.0),
        st.floats(0.0, 2.0),
        _unit,
    ),
}
