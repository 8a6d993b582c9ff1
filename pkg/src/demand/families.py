"""
This module contains the demand families φ(A;b) and their analytic derivatives.

Every family is additive in the parameter b, so ``d_db`` is identically one.
The closed forms accept floats as well as numpy arrays; the public functions
return plain floats.
"""

import logging
import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from utils.compat import StrEnum
from types import MappingProxyType

import numpy as np
from scipy.special import expit

from utils.errors import DomainError, ShapeError

logger = logging.getLogger(__name__)


class DemandFamily(StrEnum):
    """
    Parametric demand families, named as in the scenario files.
    """

    LINEAR = "linear"
    EXP_CONVEX = "exp_convex"
    QUAD_CONCAVE = "quad_concave"
    LOGISTIC = "logistic"


REQUIRED_PARAMS: dict[DemandFamily, tuple[str, ...]] = {
    DemandFamily.LINEAR: ("c", "m"),
    DemandFamily.EXP_CONVEX: ("c", "alpha"),
    DemandFamily.QUAD_CONCAVE: ("c", "m", "kappa"),
    DemandFamily.LOGISTIC: ("c", "alpha", "x0"),
}

# Coefficients that must be strictly positive (``m`` of the linear family may
# be zero: flat demand is the limiting case with multiplier one).
_POSITIVE_PARAMS: dict[DemandFamily, tuple[str, ...]] = {
    DemandFamily.LINEAR: ("c",),
    DemandFamily.EXP_CONVEX: ("c", "alpha"),
    DemandFamily.QUAD_CONCAVE: ("c", "m", "kappa"),
    DemandFamily.LOGISTIC: ("c", "alpha"),
}
_NON_NEGATIVE_PARAMS: dict[DemandFamily, tuple[str, ...]] = {
    DemandFamily.LINEAR: ("m",),
}


@dataclass(frozen=True)
class DemandSpec:
    """
    Immutable description of one demand function.

    Attributes:
        family (DemandFamily): Functional form.
        params (Mapping[str, float]): Named coefficients of the family.
        a_max (float): Upper end of the quantity domain ``[0, a_max]``.
    """

    family: DemandFamily
    params: Mapping[str, float]
    a_max: float

    def __post_init__(self):
        family = DemandFamily(self.family)
        object.__setattr__(self, "family", family)
        missing = [k for k in REQUIRED_PARAMS[family] if k not in self.params]
        if missing:
            raise ShapeError(f"{family} demand is missing coefficients {missing}")
        params = {k: float(self.params[k]) for k in REQUIRED_PARAMS[family]}
        for name, value in params.items():
            if not math.isfinite(value):
                raise ShapeError(f"{family} coefficient {name}={value} is not finite")
        for name in _POSITIVE_PARAMS[family]:
            if params[name] <= 0:
                raise ShapeError(f"{family} requires {name} > 0, got {params[name]}")
        for name in _NON_NEGATIVE_PARAMS.get(family, ()):
            if params[name] < 0:
                raise ShapeError(f"{family} requires {name} >= 0, got {params[name]}")
        if not (math.isfinite(self.a_max) and self.a_max > 0):
            raise ShapeError(f"a_max must be a positive number, got {self.a_max}")
        object.__setattr__(self, "params", MappingProxyType(params))
        object.__setattr__(self, "a_max", float(self.a_max))

    @property
    def domain_hint(self) -> tuple[float, float]:
        """
        Closed quantity interval on which the demand is configured.
        """
        return (0.0, self.a_max)

    def describe(self) -> dict[str, float | str]:
        """
        Flat ``demand.*`` description, as written in scenario files.
        """
        return {"family": str(self.family), **dict(self.params), "a_max": self.a_max}


#######################################################################
## Closed forms #######################################################
#######################################################################


def _linear(p: Mapping[str, float], a, order: int):
    if order == 0:
        return p["c"] - p["m"] * a
    if order == 1:
        return -p["m"] + 0.0 * a
    return 0.0 * a


def _exp_convex(p: Mapping[str, float], a, order: int):
    c, alpha = p["c"], p["alpha"]
    return c * (-alpha) ** order * np.exp(-alpha * a)


def _quad_concave(p: Mapping[str, float], a, order: int):
    c, m, kappa = p["c"], p["m"], p["kappa"]
    if order == 0:
        return c - m * a - kappa * a**2
    if order == 1:
        return -m - 2.0 * kappa * a
    return -2.0 * kappa + 0.0 * a


def _logistic(p: Mapping[str, float], a, order: int):
    c, alpha, x0 = p["c"], p["alpha"], p["x0"]
    s = expit(-alpha * (a - x0))
    if order == 0:
        return c * s
    if order == 1:
        return -c * alpha * s * (1.0 - s)
    return c * alpha**2 * (1.0 - 2.0 * s) * s * (1.0 - s)


_CLOSED_FORMS: dict[DemandFamily, Callable] = {
    DemandFamily.LINEAR: _linear,
    DemandFamily.EXP_CONVEX: _exp_convex,
    DemandFamily.QUAD_CONCAVE: _quad_concave,
    DemandFamily.LOGISTIC: _logistic,
}


def closed_form(spec: DemandSpec, a, b: float, order: int = 0):
    """
    Evaluate φ or one of its A-derivatives without any domain check.

    Args:
        spec (DemandSpec): Demand specification.
        a (float | np.ndarray): Quantity (scalar or array).
        b (float): Demand parameter, only used for ``order == 0``.
        order (int, optional): Derivative order in A (0, 1 or 2). Defaults to 0.

    Returns:
        float | np.ndarray: φ, φ_A or φ_AA at ``a``.
    """
    value = _CLOSED_FORMS[spec.family](spec.params, a, order)
    return value + b if order == 0 else value


def _check_domain(spec: DemandSpec, a: float, extrapolate: bool) -> float:
    a = float(a)
    if not math.isfinite(a):
        raise DomainError(f"quantity {a} is not finite")
    if extrapolate:
        return a
    lo, hi = spec.domain_hint
    if a < lo or a > hi:
        raise DomainError(f"quantity {a} outside demand domain [{lo}, {hi}]")
    return a


#######################################################################
## Public evaluation ##################################################
#######################################################################


def evaluate(spec: DemandSpec, a: float, b: float, *, extrapolate: bool = False) -> float:
    """
    Price φ(A;b) at quantity ``a``.

    Args:
        spec (DemandSpec): Demand specification.
        a (float): Quantity.
        b (float): Demand parameter.
        extrapolate (bool, optional): Skip the domain check. Defaults to False.

    Returns:
        float: Price.

    Example:
        >>> evaluate(make_demand("linear", c=1, m=0.5), 0.0, 1.0)
        2.0
    """
    a = _check_domain(spec, a, extrapolate)
    return float(closed_form(spec, a, b, 0))


def d_da(spec: DemandSpec, a: float, b: float, *, extrapolate: bool = False) -> float:
    """
    Slope φ_A(A;b).
    """
    a = _check_domain(spec, a, extrapolate)
    return float(closed_form(spec, a, b, 1))


def d2_da2(spec: DemandSpec, a: float, b: float, *, extrapolate: bool = False) -> float:
    """
    Curvature φ_AA(A;b).
    """
    a = _check_domain(spec, a, extrapolate)
    return float(closed_form(spec, a, b, 2))


def d_db(spec: DemandSpec, a: float, b: float, *, extrapolate: bool = False) -> float:
    """
    Sensitivity φ_b(A;b); b enters additively in every family.
    """
    _check_domain(spec, a, extrapolate)
    return 1.0


#######################################################################
## Construction #######################################################
#######################################################################


def default_a_max(family: DemandFamily | str, params: Mapping[str, float], b: float) -> float:
    """
    Default upper end of the domain: four times φ(0;b), which bounds A0 from
    above because φ is decreasing.

    For the linear and concave quadratic families the domain is clipped to
    99 % of the positive root of φ, where the family stops being a valid
    price.

    Args:
        family (DemandFamily | str): Demand family.
        params (Mapping[str, float]): Family coefficients.
        b (float): Demand parameter.

    Returns:
        float: Default ``a_max``.
    """
    family = DemandFamily(family)
    p = {k: float(v) for k, v in params.items()}
    phi0 = float(_CLOSED_FORMS[family](p, 0.0, 0)) + b
    if phi0 <= 0:
        raise ShapeError(f"φ(0;b) = {phi0} must be positive")
    a_max = 4.0 * phi0
    if family == DemandFamily.LINEAR and p["m"] > 0:
        a_max = min(a_max, 0.99 * (b + p["c"]) / p["m"])
    if family == DemandFamily.QUAD_CONCAVE:
        c, m, kappa = b + p["c"], p["m"], p["kappa"]
        root = (-m + math.sqrt(m * m + 4.0 * kappa * c)) / (2.0 * kappa)
        a_max = min(a_max, 0.99 * root)
    return a_max


def make_demand(
    family: DemandFamily | str,
    *,
    b: float = 0.0,
    a_max: float | None = None,
    **params: float,
) -> DemandSpec:
    """
    Build a demand specification, filling in the default domain.

    Args:
        family (DemandFamily | str): Demand family.
        b (float, optional): Parameter used for the default domain. Defaults to 0.
        a_max (float | None, optional): Domain end. Defaults to ``default_a_max``.
        **params (float): Family coefficients (``c``, ``m``, ``alpha``, ...).

    Returns:
        DemandSpec: Validated specification.
    """
    family = DemandFamily(family)
    missing = [k for k in REQUIRED_PARAMS[family] if k not in params]
    if missing:
        raise ShapeError(f"{family} demand is missing coefficients {missing}")
    if a_max is None:
        a_max = default_a_max(family, params, b)
    spec = DemandSpec(family=family, params=params, a_max=a_max)
    logger.debug("built %s demand with %s on [0, %g]", family, dict(spec.params), a_max)
    return spec
