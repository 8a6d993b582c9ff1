"""
This module contains the scenario configuration: ``section.key = value`` text
files parsed with python-dotenv into frozen dataclasses.
"""

import io
import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from utils.compat import StrEnum
from pathlib import Path
from types import MappingProxyType

from dotenv import dotenv_values

from asyminfo.dispersed import AgentBranch
from asyminfo.population import PopulationSpec, parse_density
from constants.tolerances import LEARNING_TMAX, LEARNING_TOL, REE_TOL
from demand.families import REQUIRED_PARAMS, DemandFamily, DemandSpec, make_demand
from learning.supply import RootPolicy
from polyeq.policy import Discounts
from utils.errors import ArgError, ConfigError, ShapeError

logger = logging.getLogger(__name__)


class Variant(StrEnum):
    REE = "ree"
    FIRST_ORDER = "first_order"
    PARAM_CHANGE = "param_change"
    SECOND_ORDER = "second_order"
    ALT_DISCOUNT = "alt_discount"
    BOUNDS = "bounds"
    LEARN = "learn"
    ASYMINFO = "asyminfo"


# Sweepable parameter -> solver key it overrides, per variant
SWEEP_TARGETS: dict[Variant, dict[str, str]] = {
    Variant.FIRST_ORDER: {"tau": "tau"},
    Variant.SECOND_ORDER: {"tau": "tau"},
    Variant.PARAM_CHANGE: {"delta_b": "delta_b", "tau": "tau1", "tau2": "tau2"},
    Variant.ALT_DISCOUNT: {"delta_b": "delta_b"},
    Variant.LEARN: {"prior_mu": "prior"},
}

DEMAND_KEYS = ("family", "c", "m", "alpha", "kappa", "x0", "a_max")
SOLVER_DEFAULTS: dict[str, str] = {
    "b": "0.0",
    "tau": "1.0",
    "tau1": "1.0",
    "tau2": "0.0",
    "tau3": "0.0",
    "delta_b": "0.0",
    "branch": "plus",
    "policy": "plus",
    "tmax": str(LEARNING_TMAX),
    "quad_n": "101",
    "seed": "0",
}
SOLVER_KEYS = ("variant", "tol", "prior", "density", *SOLVER_DEFAULTS)
SWEEP_KEYS = ("parameter", "lo", "hi", "steps")
OUTPUT_KEYS = ("path", "format")


@dataclass(frozen=True)
class SweepSpec:
    """
    Uniform grid of ``steps`` values of one parameter over ``[lo, hi]``.
    """

    parameter: str
    lo: float
    hi: float
    steps: int

    def values(self) -> list[float]:
        if self.steps == 1:
            return [self.lo]
        width = (self.hi - self.lo) / (self.steps - 1)
        return [self.lo + i * width for i in range(self.steps - 1)] + [self.hi]


@dataclass(frozen=True)
class OutputSpec:
    path: Path | None = None
    format: str = "csv"


@dataclass(frozen=True)
class Scenario:
    """
    Fully resolved scenario.

    Attributes:
        family (DemandFamily): Demand family.
        params (Mapping[str, float]): Demand coefficients.
        a_max (float | None): Demand domain end, None for the default.
        variant (Variant): Computation to run.
        solver (Mapping[str, str]): Solver keys with defaults filled in.
        sweep (SweepSpec | None): Optional parameter sweep.
        output (OutputSpec): Output settings.
    """

    family: DemandFamily
    params: Mapping[str, float]
    a_max: float | None
    variant: Variant
    solver: Mapping[str, str]
    sweep: SweepSpec | None = None
    output: OutputSpec = field(default_factory=OutputSpec)

    #######################################################################
    ## Typed accessors ####################################################
    #######################################################################

    def number(self, key: str) -> float:
        return _float(f"solver.{key}", self.solver[key])

    def integer(self, key: str) -> int:
        return _int(f"solver.{key}", self.solver[key])

    @property
    def b(self) -> float:
        return self.number("b")

    @property
    def tol(self) -> float:
        return self.number("tol")

    @property
    def seed(self) -> int:
        return self.integer("seed")

    def demand(self) -> DemandSpec:
        return make_demand(self.family, b=self.b, a_max=self.a_max, **self.params)

    def discounts(self) -> Discounts:
        """
        Discount coefficients; an invalid set raises ``ArgError`` so that a
        sweep records it at the failing grid point.
        """
        return Discounts(self.number("tau1"), self.number("tau2"), self.number("tau3"))

    def policy(self) -> tuple[RootPolicy, int]:
        """
        Root policy and its seed; ``random:<seed>`` overrides ``solver.seed``.
        """
        name, _, seed = self.solver["policy"].partition(":")
        try:
            policy = RootPolicy(name)
        except ValueError as exc:
            raise ConfigError(f"unknown root policy {name!r}") from exc
        return policy, _int("solver.policy", seed) if seed else self.seed

    def branch(self) -> AgentBranch:
        try:
            return AgentBranch(self.solver["branch"])
        except ValueError as exc:
            raise ConfigError(f"unknown branch {self.solver['branch']!r}") from exc

    def population(self) -> PopulationSpec:
        if "density" not in self.solver:
            raise ConfigError("solver.density is required for asyminfo")
        try:
            return parse_density(self.solver["density"], self.integer("quad_n"))
        except (ArgError, ShapeError) as exc:
            raise ConfigError(f"solver.density: {exc}") from exc

    def prior(self) -> float:
        if "prior" not in self.solver:
            raise ConfigError("solver.prior is required for learn")
        return self.number("prior")

    #######################################################################
    ## Derived scenarios ##################################################
    #######################################################################

    def at(self, parameter: str, value: float) -> "Scenario":
        """
        Copy of the scenario with one swept parameter set and no sweep.
        """
        key = SWEEP_TARGETS[self.variant][parameter]
        solver = dict(self.solver)
        solver[key] = repr(float(value))
        return replace(self, solver=MappingProxyType(solver), sweep=None)

    def resolved(self) -> dict[str, str]:
        """
        Every configuration key with its resolved value, sorted by key.
        """
        values = {"demand.family": str(self.family)}
        values.update({f"demand.{k}": repr(v) for k, v in self.params.items()})
        if self.a_max is not None:
            values["demand.a_max"] = repr(self.a_max)
        values.update({f"solver.{k}": v for k, v in self.solver.items()})
        values["solver.variant"] = str(self.variant)
        if self.sweep is not None:
            values.update(
                {
                    "sweep.parameter": self.sweep.parameter,
                    "sweep.lo": repr(self.sweep.lo),
                    "sweep.hi": repr(self.sweep.hi),
                    "sweep.steps": str(self.sweep.steps),
                }
            )
        values["output.format"] = self.output.format
        return dict(sorted(values.items()))


#######################################################################
## Parsing ############################################################
#######################################################################


def _float(key: str, text: str) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} = {text!r} is not a number") from exc
    if not math.isfinite(value):
        raise ConfigError(f"{key} = {text!r} is not finite")
    return value


def _int(key: str, text: str) -> int:
    try:
        return int(text)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} = {text!r} is not an integer") from exc


def _section(values: Mapping[str, str], name: str, allowed: tuple[str, ...]) -> dict:
    prefix = f"{name}."
    section = {k[len(prefix) :]: v for k, v in values.items() if k.startswith(prefix)}
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown {name} keys: {', '.join(prefix + k for k in unknown)}")
    return section


def scenario_from_mapping(values: Mapping[str, str | None]) -> Scenario:
    """
    Build a scenario from flat ``section.key`` strings.

    Args:
        values (Mapping[str, str | None]): Raw configuration.

    Returns:
        Scenario: The validated scenario.

    Raises:
        ConfigError: On any missing, unknown or malformed key.
    """
    empty = sorted(k for k, v in values.items() if v is None or v == "")
    if empty:
        raise ConfigError(f"keys without a value: {', '.join(empty)}")
    sections = {k.partition(".")[0] for k in values}
    unknown = sorted(sections - {"demand", "solver", "sweep", "output"})
    if unknown:
        raise ConfigError(f"unknown sections: {', '.join(unknown)}")

    demand = _section(values, "demand", DEMAND_KEYS)
    if "family" not in demand:
        raise ConfigError("demand.family is required")
    try:
        family = DemandFamily(demand["family"])
    except ValueError as exc:
        raise ConfigError(f"unknown demand family {demand['family']!r}") from exc
    missing = [k for k in REQUIRED_PARAMS[family] if k not in demand]
    if missing:
        raise ConfigError(
            f"{family} demand needs {', '.join('demand.' + k for k in missing)}"
        )
    extra = sorted(set(demand) - {"family", "a_max", *REQUIRED_PARAMS[family]})
    if extra:
        raise ConfigError(f"{family} demand does not take {', '.join(extra)}")
    params = {k: _float(f"demand.{k}", demand[k]) for k in REQUIRED_PARAMS[family]}
    a_max = _float("demand.a_max", demand["a_max"]) if "a_max" in demand else None

    solver = _section(values, "solver", SOLVER_KEYS)
    if "variant" not in solver:
        raise ConfigError("solver.variant is required")
    try:
        variant = Variant(solver.pop("variant"))
    except ValueError as exc:
        raise ConfigError(f"unknown solver.variant {values['solver.variant']!r}") from exc
    solver = {**SOLVER_DEFAULTS, **solver}
    solver.setdefault("tol", repr(LEARNING_TOL if variant == Variant.LEARN else REE_TOL))
    for key in ("b", "tau", "tau1", "tau2", "tau3", "delta_b", "tol"):
        _float(f"solver.{key}", solver[key])
    for key in ("tmax", "quad_n", "seed"):
        _int(f"solver.{key}", solver[key])
    if _float("solver.tol", solver["tol"]) <= 0:
        raise ConfigError("solver.tol must be positive")

    sweep = None
    sweep_values = _section(values, "sweep", SWEEP_KEYS)
    if sweep_values:
        missing = [k for k in SWEEP_KEYS if k not in sweep_values]
        if missing:
            raise ConfigError(f"sweep needs {', '.join('sweep.' + k for k in missing)}")
        parameter = sweep_values["parameter"]
        if parameter not in SWEEP_TARGETS.get(variant, {}):
            raise ConfigError(f"{variant} cannot sweep {parameter!r}")
        sweep = SweepSpec(
            parameter=parameter,
            lo=_float("sweep.lo", sweep_values["lo"]),
            hi=_float("sweep.hi", sweep_values["hi"]),
            steps=_int("sweep.steps", sweep_values["steps"]),
        )
        if sweep.steps < 1:
            raise ConfigError(f"sweep.steps must be at least 1, got {sweep.steps}")
        if sweep.lo > sweep.hi:
            raise ConfigError(f"sweep.lo = {sweep.lo} exceeds sweep.hi = {sweep.hi}")

    output = _section(values, "output", OUTPUT_KEYS)
    if output.get("format", "csv") != "csv":
        raise ConfigError(f"unsupported output.format {output['format']!r}")
    return Scenario(
        family=family,
        params=MappingProxyType(params),
        a_max=a_max,
        variant=variant,
        solver=MappingProxyType(solver),
        sweep=sweep,
        output=OutputSpec(path=Path(output["path"]) if "path" in output else None),
    )


def load_scenario(path: Path | str) -> Scenario:
    """
    Read a scenario file.

    Args:
        path (Path | str): Scenario file.

    Returns:
        Scenario: The validated scenario.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"scenario file {path} does not exist")
    logger.debug("reading scenario %s", path)
    return scenario_from_mapping(dotenv_values(path, interpolate=False))


def scenario_from_text(text: str) -> Scenario:
    """
    Parse scenario lines held in memory (e.g. the trailer of an output file).
    """
    return scenario_from_mapping(dotenv_values(stream=io.StringIO(text), interpolate=False))
