"""
This module contains the rational-expectations fixed point A0 = φ(A0;b) and
the frictionless comparative-statics multiplier.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from constants.tolerances import REE_TOL
from demand.families import DemandSpec, closed_form, d_da, d_db, evaluate
from demand.validation import validate
from utils.errors import ArgError, BracketError, ConvergenceError, ShapeError

logger = logging.getLogger(__name__)

_SHAPE_GRID_N = 1_001


@dataclass(frozen=True)
class ReePoint:
    """
    Rational-expectations equilibrium of one economy.

    Attributes:
        A0 (float): Equilibrium quantity.
        P0 (float): Equilibrium price (equal to ``A0``).
        b (float): Demand parameter.
        residual (float): |A0 − φ(A0;b)|.
        iterations (int): Bisection iterations.
    """

    A0: float
    P0: float
    b: float
    residual: float
    iterations: int


def solve_ree(spec: DemandSpec, b: float, tol: float = REE_TOL) -> ReePoint:
    """
    Solve A = φ(A;b) by bisection on the demand domain.

    g(A) = A − φ(A;b) is negative at zero and strictly increasing, so the
    root is unique whenever g changes sign on ``[0, a_max]``.

    Args:
        spec (DemandSpec): Demand specification.
        b (float): Demand parameter.
        tol (float, optional): Bound on the residual. Defaults to ``REE_TOL``.

    Returns:
        ReePoint: The equilibrium.

    Example:
        >>> solve_ree(make_demand("linear", c=1, m=0.5, b=1), 1.0).A0
        1.3333333333333333
    """
    if not tol > 0:
        raise ArgError(f"tolerance must be positive, got {tol}")

    lo, hi = spec.domain_hint
    phi_lo = evaluate(spec, lo, b)
    if phi_lo <= 0:
        raise ShapeError(f"φ(0;b) = {phi_lo} must be positive for b={b}")
    report = validate(spec, _SHAPE_GRID_N, b)
    if not report.passed:
        logger.warning(
            "demand %s violates %d shape checks, first: %s",
            spec.family,
            len(report.violations),
            report.violations[0],
        )

    def g(a: float) -> float:
        return a - evaluate(spec, a, b)

    g_hi = g(hi)
    if g_hi < 0:
        raise BracketError(f"A − φ(A;b) = {g_hi} < 0 at a_max={hi}, enlarge the domain")
    if g_hi == 0:
        return ReePoint(A0=hi, P0=hi, b=b, residual=0.0, iterations=0)

    slope = float(np.max(np.abs(closed_form(spec, np.linspace(lo, hi, _SHAPE_GRID_N), b, 1))))
    xtol = tol / (1.0 + slope)
    a0, result = bisect(g, lo, hi, xtol=xtol, full_output=True, disp=False)
    residual = abs(g(a0))
    if not result.converged or residual > tol:
        raise ConvergenceError(
            f"bisection stopped at A={a0} with residual {residual:g} > {tol:g}"
        )
    logger.info("REE for b=%g: A0=%.17g after %d iterations", b, a0, result.iterations)
    return ReePoint(A0=a0, P0=a0, b=b, residual=residual, iterations=result.iterations)


def multiplier(spec: DemandSpec, A0: float, b: float) -> float:
    """
    Frictionless response of output to the demand parameter,
    φ_b / (1 − φ_A) at the equilibrium.

    Args:
        spec (DemandSpec): Demand specification.
        A0 (float): Equilibrium quantity.
        b (float): Demand parameter.

    Returns:
        float: dA0/db.
    """
    return d_db(spec, A0, b) / (1.0 - d_da(spec, A0, b))
