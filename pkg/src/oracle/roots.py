"""
This module contains the brute-force verification kernel: grid scans refined by
bisection and central finite differences.

Tangent roots (where g touches zero without changing sign) are outside the
contract of ``find_roots``.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from constants.tolerances import BISECTION_XTOL, ROOT_MERGE
from utils.errors import ArgError, NonFiniteError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RootSet:
    """
    Roots of a scalar function found on a uniform grid.

    Attributes:
        roots (list[float]): Sorted roots, pairwise separated by more than the
            merge threshold.
        bracket_count (int): Number of sign changes (and exact grid zeros) seen.
        grid_n (int): Grid size.
        interval (tuple[float, float]): Scanned interval.
        degenerate (bool): True if near-double roots were merged.
    """

    roots: list[float]
    bracket_count: int
    grid_n: int
    interval: tuple[float, float]
    degenerate: bool = False

    def __len__(self) -> int:
        return len(self.roots)


def _finite(g: Callable[[float], float], x: float) -> float:
    value = float(g(x))
    if not math.isfinite(value):
        raise NonFiniteError(f"g({x}) = {value}")
    return value


def find_roots(
    g: Callable[[float], float],
    lo: float,
    hi: float,
    grid_n: int,
    merge: float = ROOT_MERGE,
) -> RootSet:
    """
    Enumerate the sign-changing roots of ``g`` on ``[lo, hi]``.

    Every sign change between neighbouring grid points is refined by bisection
    to ``BISECTION_XTOL``; exact zeros on grid nodes are kept as they are.

    Args:
        g (Callable[[float], float]): Scalar function.
        lo (float): Left end of the interval.
        hi (float): Right end of the interval.
        grid_n (int): Number of grid points (at least 2).
        merge (float, optional): Roots closer than this are merged.
            Defaults to ``ROOT_MERGE``.

    Returns:
        RootSet: The roots found.

    Example:
        >>> [round(r, 9) for r in find_roots(lambda x: x * x - 1.0, -2.0, 2.0, 100).roots]
        [-1.0, 1.0]
    """
    if not lo < hi:
        raise ArgError(f"empty interval [{lo}, {hi}]")
    if grid_n < 2:
        raise ArgError(f"grid_n must be at least 2, got {grid_n}")

    grid = np.linspace(lo, hi, grid_n)
    values = np.fromiter((g(x) for x in grid), dtype=float, count=grid_n)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise NonFiniteError(f"g({grid[bad[0]]}) = {values[bad[0]]}")

    candidates = [float(x) for x in grid[values == 0.0]]
    brackets = np.flatnonzero(values[:-1] * values[1:] < 0)
    for i in brackets:
        root = bisect(g, grid[i], grid[i + 1], xtol=BISECTION_XTOL)
        candidates.append(float(root))
    candidates.sort()

    roots: list[float] = []
    degenerate = False
    for root in candidates:
        if roots and root - roots[-1] <= merge:
            degenerate = True
            if abs(_finite(g, root)) < abs(_finite(g, roots[-1])):
                roots[-1] = root
            continue
        roots.append(root)
    if degenerate:
        logger.debug("merged near-double roots of g on [%g, %g]", lo, hi)
    return RootSet(
        roots=roots,
        bracket_count=len(candidates),
        grid_n=grid_n,
        interval=(float(lo), float(hi)),
        degenerate=degenerate,
    )


def fd_derivative(g: Callable[[float], float], x: float, h: float) -> float:
    """
    Central finite difference (g(x+h) − g(x−h)) / 2h.

    Args:
        g (Callable[[float], float]): Scalar function.
        x (float): Evaluation point.
        h (float): Step, strictly positive.

    Returns:
        float: Derivative estimate.
    """
    if not h > 0:
        raise ArgError(f"finite-difference step must be positive, got {h}")
    return (_finite(g, x + h) - _finite(g, x - h)) / (2.0 * h)
