"""
This module contains the information densities over agents' known demand
points.
"""

import logging
import math
from dataclasses import dataclass
from utils.compat import StrEnum
from functools import cached_property

import numpy as np
from scipy.integrate import quad
from scipy.stats import truncnorm

from constants.tolerances import DENSITY_NORM_TOL, QUAD_MIN_NODES
from utils.errors import ArgError, ShapeError

logger = logging.getLogger(__name__)


class DensityKind(StrEnum):
    UNIFORM = "uniform"
    TRUNCATED_GAUSSIAN = "gauss"
    POINT_MASS = "point"


@dataclass(frozen=True)
class PopulationSpec:
    """
    Density f of the points at which agents know demand.

    Attributes:
        kind (DensityKind): Family of the density.
        lo (float): Left end of the support.
        hi (float): Right end of the support.
        mean (float): Location of the Gaussian before truncation.
        sd (float): Scale of the Gaussian before truncation.
        quad_n (int): Number of Simpson nodes, odd and at least 11.
    """

    kind: DensityKind
    lo: float
    hi: float
    mean: float = 0.0
    sd: float = 1.0
    quad_n: int = 101

    def __post_init__(self):
        object.__setattr__(self, "kind", DensityKind(self.kind))
        if self.kind == DensityKind.POINT_MASS:
            if self.lo != self.hi:
                raise ShapeError("a point mass has a single support point")
            return
        if not self.lo < self.hi:
            raise ShapeError(f"empty support [{self.lo}, {self.hi}]")
        if self.quad_n < QUAD_MIN_NODES or self.quad_n % 2 == 0:
            raise ArgError(
                f"quad_n must be odd and at least {QUAD_MIN_NODES}, got {self.quad_n}"
            )
        if self.kind == DensityKind.TRUNCATED_GAUSSIAN and not self.sd > 0:
            raise ShapeError(f"Gaussian scale must be positive, got {self.sd}")
        total, _ = quad(self.pdf, self.lo, self.hi)
        if abs(total - 1.0) > DENSITY_NORM_TOL:
            raise ShapeError(f"density integrates to {total}, not 1")

    @property
    def support(self) -> tuple[float, float]:
        return (self.lo, self.hi)

    @cached_property
    def _gaussian(self):
        a, b = (self.lo - self.mean) / self.sd, (self.hi - self.mean) / self.sd
        return truncnorm(a, b, loc=self.mean, scale=self.sd)

    def pdf(self, x):
        """
        Density at ``x`` (scalar or array); zero outside the support.
        """
        if self.kind == DensityKind.POINT_MASS:
            raise ArgError("a point mass has no density")
        if self.kind == DensityKind.UNIFORM:
            inside = (np.asarray(x) >= self.lo) & (np.asarray(x) <= self.hi)
            return np.where(inside, 1.0 / (self.hi - self.lo), 0.0)
        return self._gaussian.pdf(x)

    def expectation(self) -> float:
        """
        Mean knowledge point under the density.
        """
        if self.kind == DensityKind.POINT_MASS:
            return self.lo
        if self.kind == DensityKind.UNIFORM:
            return 0.5 * (self.lo + self.hi)
        return float(self._gaussian.mean())

    def describe(self) -> str:
        """
        Density in the ``kind:args`` form used on the command line.
        """
        if self.kind == DensityKind.POINT_MASS:
            return f"point:{self.lo!r}"
        if self.kind == DensityKind.UNIFORM:
            return f"uniform:{self.lo!r},{self.hi!r}"
        return f"gauss:{self.mean!r},{self.sd!r},{self.lo!r},{self.hi!r}"


def uniform(lo: float, hi: float, quad_n: int = 101) -> PopulationSpec:
    return PopulationSpec(DensityKind.UNIFORM, lo, hi, quad_n=quad_n)


def truncated_gaussian(
    mean: float, sd: float, lo: float, hi: float, quad_n: int = 101
) -> PopulationSpec:
    return PopulationSpec(
        DensityKind.TRUNCATED_GAUSSIAN, lo, hi, mean=mean, sd=sd, quad_n=quad_n
    )


def point_mass(at: float) -> PopulationSpec:
    return PopulationSpec(DensityKind.POINT_MASS, at, at, mean=at, sd=0.0)


def parse_density(text: str, quad_n: int = 101) -> PopulationSpec:
    """
    Parse ``uniform:lo,hi``, ``gauss:mean,sd,lo,hi`` or ``point:at``.

    Example:
        >>> parse_density("uniform:0.2,0.9").support
        (0.2, 0.9)
    """
    kind, _, args = text.partition(":")
    try:
        values = [float(v) for v in args.split(",")] if args else []
        kind = DensityKind(kind.strip())
    except ValueError as exc:
        raise ArgError(f"cannot parse density {text!r}") from exc
    arity = {DensityKind.UNIFORM: 2, DensityKind.TRUNCATED_GAUSSIAN: 4, DensityKind.POINT_MASS: 1}
    if len(values) != arity[kind] or not all(math.isfinite(v) for v in values):
        raise ArgError(f"density {kind} takes {arity[kind]} finite numbers, got {text!r}")
    if kind == DensityKind.UNIFORM:
        return uniform(*values, quad_n=quad_n)
    if kind == DensityKind.TRUNCATED_GAUSSIAN:
        return truncated_gaussian(*values, quad_n=quad_n)
    return point_mass(values[0])
