"""
This module contains the asymmetric equilibrium of nearest-point learning
when the selection rule cycles between two known points A* and A**.

A fraction ψ of the agents expands demand around A*, the rest around A**.
With quadratic penalties the aggregate supply solves

    A² + pA + q = 0,
    p = 1 − 2(ψA* + (1−ψ)A**) − ψφ_A(A*) − (1−ψ)φ_A(A**),
    q = −[ψ(φ(A*) − φ_A(A*)A* − A*²) + (1−ψ)(φ(A**) − φ_A(A**)A** − A**²)],

and ψ is chosen so that A(ψ) sits at the midpoint of the two points, which
leaves every agent indifferent between them.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect, brentq, minimize_scalar

from constants.tolerances import MIXTURE_AGREEMENT, RESIDUAL_BOUND
from demand.families import DemandSpec
from learning.supply import point_info, supply_map
from oracle.residuals import EquationId, residual
from utils.algebra import solve_quadratic
from utils.errors import (
    ComplexError,
    ComplexRootError,
    ConvergenceError,
    ExistenceError,
)

logger = logging.getLogger(__name__)

PSI_GRID_N = 101
_PSI_XTOL = 1e-15
_MAX_DOUBLINGS = 200


@dataclass(frozen=True)
class MixtureEquilibrium:
    """
    Aggregate equilibrium of a population split between two known points.

    Attributes:
        psi (float): Share of agents expanding around ``a_star``.
        a_bar (float): Midpoint (A* + A**)/2, the equilibrium supply.
        a_star (float): First known point.
        a_star2 (float): Second known point.
        p (float): Linear coefficient of the aggregate quadratic at ``psi``.
        q (float): Constant coefficient of the aggregate quadratic at ``psi``.
        residual (float): Residual of the aggregate fixed point at ``a_bar``.
        degenerate (bool): True if the two points coincide.
        direct_a (float): Aggregate from a direct fixed-point solve at ``psi``.
        sign (int): Root of the aggregate quadratic (+1 plus, −1 minus).
    """

    psi: float
    a_bar: float
    a_star: float
    a_star2: float
    p: float
    q: float
    residual: float
    degenerate: bool
    direct_a: float
    sign: int = 1


class _Pair:
    """
    Demand information at the two known points.
    """

    def __init__(self, spec: DemandSpec, b: float, a_star: float, a_star2: float):
        self.a_star, self.a_star2 = a_star, a_star2
        self.phi_star, self.phi_a_star = point_info(spec, b, a_star)
        self.phi_star2, self.phi_a_star2 = point_info(spec, b, a_star2)

    def coefficients(self, psi: float) -> tuple[float, float]:
        rest = 1.0 - psi
        p = (
            1.0
            - 2.0 * (psi * self.a_star + rest * self.a_star2)
            - psi * self.phi_a_star
            - rest * self.phi_a_star2
        )
        q = -(
            psi * (self.phi_star - self.phi_a_star * self.a_star - self.a_star**2)
            + rest * (self.phi_star2 - self.phi_a_star2 * self.a_star2 - self.a_star2**2)
        )
        return p, q

    def aggregate(self, psi: float, sign: int) -> float:
        p, q = self.coefficients(psi)
        roots = solve_quadratic(1.0, p, q)
        if roots is None:
            raise ComplexError(
                f"aggregate quadratic has no real root at ψ={psi}: "
                f"p²/4 − q = {p * p / 4 - q:g}"
            )
        return roots[0] if sign > 0 else roots[1]

    def excess(self, psi: float, a: float) -> float:
        """
        Aggregate supply minus the level ``a`` it is evaluated at.
        """
        first = self.phi_star + self.phi_a_star * (a - self.a_star) - (a - self.a_star) ** 2
        second = (
            self.phi_star2
            + self.phi_a_star2 * (a - self.a_star2)
            - (a - self.a_star2) ** 2
        )
        return a - (psi * first + (1.0 - psi) * second)

    def context(self, psi: float) -> dict[str, float]:
        return {
            "psi": psi,
            "a_star": self.a_star,
            "a_star2": self.a_star2,
            "phi_star": self.phi_star,
            "phi_star2": self.phi_star2,
            "phi_a_star": self.phi_a_star,
            "phi_a_star2": self.phi_a_star2,
        }


def mixture_coefficients(
    spec: DemandSpec, b: float, a_star: float, a_star2: float, psi: float
) -> tuple[float, float]:
    """
    Coefficients (p, q) of the aggregate quadratic A² + pA + q = 0.

    At ψ = 1 its roots are the one-point supplies from ``a_star``; at ψ = 0
    the ones from ``a_star2``.
    """
    return _Pair(spec, b, a_star, a_star2).coefficients(psi)


def cycling_hypothesis(
    spec: DemandSpec, b: float, a_star: float, a_star2: float, sign: int = 1
) -> bool:
    """
    True if supply computed from either point lands strictly nearer the
    other one.
    """
    s_star = supply_map(spec, b, a_star, sign)
    s_star2 = supply_map(spec, b, a_star2, sign)
    return (
        abs(s_star - a_star2) < abs(s_star - a_star)
        and abs(s_star2 - a_star) < abs(s_star2 - a_star2)
    )


def _direct_fixed_point(pair: _Pair, psi: float, sign: int) -> float:
    """
    Solve the aggregate fixed point without the p/q algebra: the excess is a
    convex parabola in A, so bracket each root from its minimiser.
    """
    vertex = minimize_scalar(lambda a: pair.excess(psi, a)).x
    if pair.excess(psi, vertex) > 0:
        raise ComplexError(f"aggregate fixed point has no real solution at ψ={psi}")
    step = 1.0
    for _ in range(_MAX_DOUBLINGS):
        outer = vertex + sign * step
        if pair.excess(psi, outer) > 0:
            break
        step *= 2.0
    else:
        raise ConvergenceError("could not bracket the aggregate fixed point")
    lo, hi = sorted((vertex, outer))
    return brentq(lambda a: pair.excess(psi, a), lo, hi, xtol=1e-15, rtol=4e-16)


def mixture_equilibrium(
    spec: DemandSpec, b: float, a_star: float, a_star2: float, sign: int = 1
) -> MixtureEquilibrium:
    """
    Share ψ that places aggregate supply at the midpoint of two cycling points.

    The cycling hypothesis puts A(1) = S(A*) on the A** side of the midpoint
    and A(0) = S(A**) on the A* side, so A(ψ) − Ā changes sign on [0, 1] and
    ψ is found by bisection. The result is cross-checked against a direct
    solve of the aggregate fixed point.

    Args:
        spec (DemandSpec): Demand specification.
        b (float): Demand parameter.
        a_star (float): First known point A*.
        a_star2 (float): Second known point A**.
        sign (int, optional): Root of the aggregate quadratic. Defaults to +1.

    Returns:
        MixtureEquilibrium: The mixture.

    Raises:
        ExistenceError: If the points do not satisfy the cycling hypothesis.
        ComplexError: If the aggregate quadratic has no real root for some ψ.
    """
    pair = _Pair(spec, b, a_star, a_star2)
    a_bar = 0.5 * (a_star + a_star2)

    if a_star == a_star2:
        psi = 0.5
        p, q = pair.coefficients(psi)
        a = pair.aggregate(psi, sign)
        logger.info("mixture of identical points %g is degenerate", a_star)
        return MixtureEquilibrium(
            psi=psi,
            a_bar=a_star,
            a_star=a_star,
            a_star2=a_star2,
            p=p,
            q=q,
            residual=residual(EquationId.MIXTURE, a, pair.context(psi)),
            degenerate=True,
            direct_a=a,
            sign=sign,
        )

    if not cycling_hypothesis(spec, b, a_star, a_star2, sign):
        raise ExistenceError(
            f"points {a_star} and {a_star2} do not cycle under nearest-point selection"
        )

    grid = np.linspace(0.0, 1.0, PSI_GRID_N)
    for psi in grid:
        pair.aggregate(psi, sign)
    minus_q = -np.array([pair.coefficients(psi)[1] for psi in grid])
    if np.any(minus_q <= 0):
        logger.warning("−q <= 0 for %d of %d shares", int(np.sum(minus_q <= 0)), PSI_GRID_N)

    psi = bisect(lambda s: pair.aggregate(s, sign) - a_bar, 0.0, 1.0, xtol=_PSI_XTOL)
    p, q = pair.coefficients(psi)
    a = pair.aggregate(psi, sign)
    direct = _direct_fixed_point(pair, psi, sign)
    if abs(direct - a) > MIXTURE_AGREEMENT:
        raise ConvergenceError(
            f"closed-form aggregate {a} and direct fixed point {direct} disagree"
        )
    res = residual(EquationId.MIXTURE, a_bar, pair.context(psi))
    if res > RESIDUAL_BOUND or abs(a - a_bar) > RESIDUAL_BOUND:
        raise ConvergenceError(f"mixture share ψ={psi} leaves residual {res:g}")
    logger.info("mixture of %g and %g: ψ=%.17g, Ā=%.17g", a_star, a_star2, psi, a_bar)
    return MixtureEquilibrium(
        psi=psi,
        a_bar=a_bar,
        a_star=a_star,
        a_star2=a_star2,
        p=p,
        q=q,
        residual=res,
        degenerate=False,
        direct_a=direct,
        sign=sign,
    )


def find_cycling_pair(
    spec: DemandSpec, b: float, lo: float, hi: float, grid_n: int, sign: int = 1
) -> tuple[float, float] | None:
    """
    Scan a grid for the first pair of points (in row order) that satisfies the
    cycling hypothesis with a margin.

    Args:
        spec (DemandSpec): Demand specification.
        b (float): Demand parameter.
        lo (float): Left end of the grid.
        hi (float): Right end of the grid.
        grid_n (int): Number of grid points.
        sign (int, optional): Root of the supply map. Defaults to +1.

    Returns:
        tuple[float, float] | None: The pair ``(A*, A**)`` with A* < A**, or
        None if no grid pair cycles.
    """
    grid = np.linspace(lo, hi, grid_n)
    supply = np.empty(grid_n)
    for i, x in enumerate(grid):
        try:
            supply[i] = supply_map(spec, b, float(x), sign)
        except ComplexRootError:
            supply[i] = np.nan
    margin = 1e-9
    # near[i, j]: supply from point i lands nearer point j than point i
    near = np.abs(supply[:, None] - grid[None, :]) < (
        np.abs(supply - grid)[:, None] - margin
    )
    cycles = np.triu(near & near.T, k=1)
    hits = np.argwhere(cycles)
    if hits.size == 0:
        logger.info("no cycling pair on [%g, %g] with %d points", lo, hi, grid_n)
        return None
    i, j = hits[0]
    return float(grid[i]), float(grid[j])
