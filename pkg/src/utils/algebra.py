"""
This module contains small algebraic helpers shared by the solvers.
"""

import math

from utils.errors import ArgError


def solve_quadratic(a: float, b: float, c: float) -> tuple[float, float] | None:
    """
    Real roots of a·x² + b·x + c = 0, computed without cancellation.

    Args:
        a (float): Leading coefficient, non-zero.
        b (float): Linear coefficient.
        c (float): Constant term.

    Returns:
        tuple[float, float] | None: ``(plus, minus)``, the roots taken with
        ``+√D`` and ``−√D`` in the textbook formula, or None if D < 0.

    Example:
        >>> solve_quadratic(1.0, 0.0, -4.0)
        (2.0, -2.0)
    """
    if a == 0:
        raise ArgError("leading coefficient of the quadratic is zero")
    disc = b * b - 4.0 * a * c
    if disc < 0:
        return None
    root = math.sqrt(disc)
    if b == 0 and root == 0:
        return 0.0, 0.0
    if b >= 0:
        q = -0.5 * (b + root)
        return c / q, q / a
    q = -0.5 * (b - root)
    return q / a, c / q
