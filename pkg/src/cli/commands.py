"""
This module contains the execution of scenarios: dispatch to the solvers,
parameter sweeps, and the residual invariant check of the emitted rows.
"""

import logging
from dataclasses import dataclass

import polars as pl

from asyminfo.dispersed import aggregate, dispersion_effect
from asyminfo.population import DensityKind
from cli.scenario import Scenario, Variant
from cli.tables import format_cell, number, rows_to_frame
from constants.tolerances import RESIDUAL_BOUND
from learning.dynamics import simulate
from polyeq.alt_discount import (
    alt_discount_equilibria,
    minus_root_bound,
    plus_root_bound,
    regime_bounds_closed_form,
)
from polyeq.expansion import expansion_point
from polyeq.policy import marginal_multiplier, marginal_regime_bounds, parameter_change_equilibria
from polyeq.static import first_order_equilibria, second_order_equilibria
from ree.solver import multiplier, solve_ree
from utils.errors import ExistenceError, InvariantViolation, SolverError

logger = logging.getLogger(__name__)

REE_COLUMNS = ["b", "A0", "P0", "multiplier", "residual", "iterations"]
POLYEQ_COLUMNS = [
    "variant",
    "delta_b",
    "tau1",
    "tau2",
    "tau3",
    "branch",
    "delta_A",
    "A",
    "forecast_price",
    "true_price",
    "residual",
    "regime",
    "valid",
    "reason",
    "equation",
]
BOUNDS_COLUMNS = ["quantity", "value", "closed_form", "residual", "valid", "reason"]
LEARN_COLUMNS = [
    "kind",
    "t",
    "a_star",
    "a_next",
    "forecast",
    "true_price",
    "supply_residual",
    "root_used",
    "epsilon",
    "a_star2",
    "psi",
    "note",
    "converged",
    "final_gap",
]
ASYM_COLUMNS = [
    "kind",
    "branch",
    "a_i",
    "forecast",
    "supply",
    "weight",
    "residual",
    "aggregate_A",
    "A0",
    "below_ree",
    "quad_error_est",
    "dispersion_effect",
]

#######################################################################
## Single runs ########################################################
#######################################################################


def _ree_rows(scenario: Scenario) -> list[dict]:
    spec = scenario.demand()
    point = solve_ree(spec, scenario.b, scenario.tol)
    return [
        {
            "b": point.b,
            "A0": point.A0,
            "P0": point.P0,
            "multiplier": multiplier(spec, point.A0, point.b),
            "residual": point.residual,
            "iterations": point.iterations,
        }
    ]


def _expansion(scenario: Scenario):
    spec = scenario.demand()
    return expansion_point(spec, solve_ree(spec, scenario.b, scenario.tol).A0, scenario.b)


def _polyeq_rows(scenario: Scenario) -> list[dict]:
    point = _expansion(scenario)
    if scenario.variant == Variant.FIRST_ORDER:
        records = first_order_equilibria(point, scenario.number("tau"))
    elif scenario.variant == Variant.SECOND_ORDER:
        records = second_order_equilibria(point, scenario.number("tau"))
    elif scenario.variant == Variant.PARAM_CHANGE:
        records = parameter_change_equilibria(
            point, scenario.number("delta_b"), scenario.discounts()
        )
    else:
        records = alt_discount_equilibria(point, scenario.number("delta_b"))
    return [record.as_row() for record in records]


def _bounds_rows(scenario: Scenario) -> list[dict]:
    point = _expansion(scenario)
    rows = []
    delta_b1 = minus_root_bound(point)
    exact_b1 = point.gap + point.phi_b
    rows.append(
        {
            "quantity": "alt_delta_b1",
            "value": delta_b1,
            "closed_form": exact_b1,
            "residual": abs(delta_b1 - exact_b1),
            "valid": True,
        }
    )
    try:
        delta_b2 = plus_root_bound(point)
        exact_b2 = regime_bounds_closed_form(point).delta_b2
        rows.append(
            {
                "quantity": "alt_delta_b2",
                "value": delta_b2,
                "closed_form": exact_b2,
                "residual": abs(delta_b2 - exact_b2),
                "valid": True,
            }
        )
    except ExistenceError as exc:
        rows.append({"quantity": "alt_delta_b2", "valid": False, "reason": str(exc)})

    taus = scenario.discounts()
    bounds = marginal_regime_bounds(point, taus)
    if bounds.sign_change is None:
        reason = "no Δb² discount"
        rows.append({"quantity": "policy_sign_change", "valid": False, "reason": reason})
        rows.append({"quantity": "policy_existence", "valid": False, "reason": reason})
    else:
        rows.append(
            {
                "quantity": "policy_sign_change",
                "value": bounds.sign_change,
                "residual": abs(marginal_multiplier(point, bounds.sign_change, taus)),
                "valid": True,
            }
        )
        rows.append(
            {
                "quantity": "policy_existence",
                "value": bounds.existence,
                "closed_form": point.phi_b / taus.tau2,
                "residual": abs(bounds.existence - point.phi_b / taus.tau2),
                "valid": True,
            }
        )
    return rows


def _learn_rows(scenario: Scenario) -> list[dict]:
    policy, seed = scenario.policy()
    trace = simulate(
        scenario.demand(),
        scenario.b,
        scenario.prior(),
        t_max=scenario.integer("tmax"),
        root_policy=policy,
        tol=scenario.tol,
        seed=seed,
    )
    rows = [{"kind": "step", **step.__dict__} for step in trace.steps]
    last = trace.steps[-1]
    rows.append(
        {
            "kind": "summary",
            "t": last.t,
            "a_next": last.a_next,
            "note": trace.halt_reason,
            "converged": trace.converged,
            "final_gap": trace.final_gap,
        }
    )
    return rows


def _asyminfo_rows(scenario: Scenario) -> list[dict]:
    spec, pop, branch = scenario.demand(), scenario.population(), scenario.branch()
    equilibrium = aggregate(spec, scenario.b, pop, branch)
    rows = [
        {"kind": "node", "branch": branch, **node.__dict__}
        for node in equilibrium.agent_curve
    ]
    effect = None
    if pop.kind != DensityKind.POINT_MASS:
        effect = dispersion_effect(spec, scenario.b, pop, branch)
    rows.append(
        {
            "kind": "summary",
            "branch": branch,
            "aggregate_A": equilibrium.aggregate_a,
            "A0": equilibrium.a0,
            "below_ree": equilibrium.below_ree,
            "quad_error_est": equilibrium.quad_error_est,
            "dispersion_effect": effect,
        }
    )
    return rows


_RUNNERS = {
    Variant.REE: (_ree_rows, REE_COLUMNS),
    Variant.FIRST_ORDER: (_polyeq_rows, POLYEQ_COLUMNS),
    Variant.SECOND_ORDER: (_polyeq_rows, POLYEQ_COLUMNS),
    Variant.PARAM_CHANGE: (_polyeq_rows, POLYEQ_COLUMNS),
    Variant.ALT_DISCOUNT: (_polyeq_rows, POLYEQ_COLUMNS),
    Variant.BOUNDS: (_bounds_rows, BOUNDS_COLUMNS),
    Variant.LEARN: (_learn_rows, LEARN_COLUMNS),
    Variant.ASYMINFO: (_asyminfo_rows, ASYM_COLUMNS),
}


#######################################################################
## Sweeps #############################################################
#######################################################################


@dataclass(frozen=True)
class SweepResult:
    """
    Rows of a sweep in grid order.

    Attributes:
        parameter (str): Swept parameter, also the first column of ``df``.
        df (pl.DataFrame): String-typed rows.
    """

    parameter: str
    df: pl.DataFrame

    def regime_boundaries(self) -> list[tuple[str, str, str, str]]:
        """
        Neighbouring grid values between which the set of regimes changes.

        Returns:
            list[tuple[str, str, str, str]]: ``(before, after, regimes before,
            regimes after)`` for every change, regimes joined with ``|``.
        """
        if "regime" not in self.df.columns:
            return []
        sets = (
            self.df.filter(pl.col("valid") == "true")
            .group_by(self.parameter, maintain_order=True)
            .agg(pl.col("regime").unique().sort().str.join("|").alias("regimes"))
            .with_columns(
                pl.col(self.parameter).shift(1).alias("previous"),
                pl.col("regimes").shift(1).alias("previous_regimes"),
            )
            .filter(
                pl.col("previous").is_not_null()
                & (pl.col("regimes") != pl.col("previous_regimes"))
            )
        )
        return [
            (row["previous"], row[self.parameter], row["previous_regimes"], row["regimes"])
            for row in sets.iter_rows(named=True)
        ]


def run_sweep(scenario: Scenario) -> SweepResult:
    """
    Run every grid point independently; a failing point becomes a row with
    ``valid = false`` and the error as reason.
    """
    sweep = scenario.sweep
    runner, columns = _RUNNERS[scenario.variant]
    rows = []
    for value in sweep.values():
        try:
            point_rows = runner(scenario.at(sweep.parameter, value))
        except SolverError as exc:
            logger.warning("%s = %g failed: %s", sweep.parameter, value, exc)
            point_rows = [{"valid": False, "reason": f"{type(exc).__name__}: {exc}"}]
        rows += [{sweep.parameter: value, **row} for row in point_rows]
    columns = [sweep.parameter, *columns]
    if "valid" not in columns:
        columns.append("valid")
    if "reason" not in columns:
        columns.append("reason")
    return SweepResult(parameter=sweep.parameter, df=rows_to_frame(rows, columns))


def run_scenario(scenario: Scenario) -> tuple[pl.DataFrame, list[str]]:
    """
    Execute a scenario.

    Args:
        scenario (Scenario): The scenario.

    Returns:
        tuple[pl.DataFrame, list[str]]: Formatted rows and trailer notes.
    """
    if scenario.sweep is not None:
        result = run_sweep(scenario)
        notes = [
            f"regime change between {result.parameter}={lo} and {hi}: {before} -> {after}"
            for lo, hi, before, after in result.regime_boundaries()
        ]
        return result.df, notes
    runner, columns = _RUNNERS[scenario.variant]
    return rows_to_frame(runner(scenario), columns), []


#######################################################################
## Invariants #########################################################
#######################################################################

_RESIDUAL_COLUMNS = ("residual", "supply_residual")


def check_rows(df: pl.DataFrame) -> int:
    """
    Check the residual of every valid row against the residual bound.

    Returns:
        int: Number of residuals checked.

    Raises:
        InvariantViolation: On the first row above the bound.
    """
    checked = 0
    for row in df.iter_rows(named=True):
        for column in _RESIDUAL_COLUMNS:
            value = number(row.get(column))
            if value is None:
                continue
            checked += 1
            if not value <= RESIDUAL_BOUND:
                raise InvariantViolation(
                    f"{column} = {format_cell(value)} exceeds {RESIDUAL_BOUND:g}", row
                )
    return checked
