"""
This module contains the one-point supply map of nearest-point learning and
the rules that pick one of its two roots.

An agent who knows φ and φ_A at a single point x supplies the level A solving

    A − φ(x) = φ_A(x)(A − x) − (A − x)²,

whose roots are A = x − h ± √(h² + φ(x) − x) with h = (1 − φ_A(x))/2.
"""

import logging
import math
from utils.compat import StrEnum

import numpy as np

from demand.families import DemandSpec, d_da, evaluate
from utils.errors import ArgError, ComplexRootError, NonFiniteError

logger = logging.getLogger(__name__)


class RootPolicy(StrEnum):
    PLUS = "plus"
    MINUS = "minus"
    ALTERNATE = "alternate"
    RANDOM = "random"

    def sign(self, t: int, rng: np.random.Generator | None = None) -> int:
        """
        Root chosen at step ``t``: +1 for the plus root, −1 for the minus root.

        ``ALTERNATE`` plays the plus root on odd steps, so a trace starts with
        it; ``RANDOM`` draws from ``rng``.
        """
        if self == RootPolicy.PLUS:
            return 1
        if self == RootPolicy.MINUS:
            return -1
        if self == RootPolicy.ALTERNATE:
            return 1 if t % 2 == 1 else -1
        if rng is None:
            raise ArgError("the random root policy needs a seeded generator")
        return 1 if rng.random() < 0.5 else -1


def point_info(spec: DemandSpec, b: float, x: float) -> tuple[float, float]:
    """
    φ(x;b) and φ_A(x;b), extrapolating outside the demand domain.
    """
    return (
        evaluate(spec, x, b, extrapolate=True),
        d_da(spec, x, b, extrapolate=True),
    )


def supply_map(spec: DemandSpec, b: float, x: float, sign: int = 1) -> float:
    """
    Supply of agents expanding demand around the single point ``x``.

    The plus root is written as x + g/(h + √(h² + g)), g = φ(x) − x, which is
    exact at the fixed point g = 0.

    Args:
        spec (DemandSpec): Demand specification.
        b (float): Demand parameter.
        x (float): Known demand point.
        sign (int, optional): +1 for the plus root, −1 for the minus root.
            Defaults to 1.

    Returns:
        float: Supplied quantity.

    Example:
        >>> spec = make_demand("exp_convex", c=1, alpha=1)
        >>> supply_map(spec, 0.0, 0.1) > 0.1
        True
    """
    phi, phi_a = point_info(spec, b, x)
    gap = phi - x
    half = 0.5 * (1.0 - phi_a)
    disc = half * half + gap
    if not math.isfinite(disc):
        raise NonFiniteError(f"demand information at x={x} overflows")
    if disc < 0:
        raise ComplexRootError(
            f"supply quadratic at x={x} has discriminant {disc:g} < 0"
        )
    root = math.sqrt(disc)
    if sign > 0:
        denominator = half + root
        return x + gap / denominator if denominator > 0 else x - half + root
    return x - half - root
