import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from constants.tolerances import RESIDUAL_BOUND, SCAN_GRID_N
from oracle.residuals import EquationId, residual, signed_equation
from oracle.roots import fd_derivative, find_roots
from polyeq.alt_discount import (
    alt_discount_equilibria,
    minus_root_bound,
    plus_root_bound,
    regime_bounds,
    regime_bounds_closed_form,
)
from polyeq.expansion import expansion_point, from_coefficients
from polyeq.policy import (
    Discounts,
    PolicyRegime,
    elevated_root,
    marginal_multiplier,
    marginal_regime_bounds,
    parameter_change_equilibria,
    policy_regime,
)
from polyeq.records import DEGENERATE, EXTRAPOLATED, Branch, Regime
from polyeq.static import first_order_equilibria, second_order_equilibria
from ree.solver import solve_ree
from utils.algebra import solve_quadratic
from utils.errors import ArgError, DegenerateError, ExistenceError

#######################################################################
## Quadratic helper ###################################################
#######################################################################


def test_solve_quadratic():
    assert solve_quadratic(1.0, 0.0, -4.0) == (2.0, -2.0)
    assert solve_quadratic(1.0, 0.0, 4.0) is None
    assert solve_quadratic(2.0, 3.0, 0.0) == (0.0, -1.5)
    with pytest.raises(ArgError):
        solve_quadratic(0.0, 1.0, 1.0)


@settings(max_examples=200, derandomize=True)
@given(
    st.floats(0.01, 100.0) | st.floats(-100.0, -0.01),
    st.floats(-1e3, 1e3),
    st.floats(-1e3, 1e3),
)
def test_solve_quadratic_roots_satisfy_the_equation(a, b, c):
    roots = solve_quadratic(a, b, c)
    if roots is None:
        assert b * b - 4 * a * c < 0
        return
    plus, minus = roots
    disc = math.sqrt(b * b - 4 * a * c)
    assert plus == pytest.approx((-b + disc) / (2 * a), rel=1e-6, abs=1e-6)
    assert minus == pytest.approx((-b - disc) / (2 * a), rel=1e-6, abs=1e-6)


#######################################################################
## First order ########################################################
#######################################################################


@pytest.mark.parametrize("tau", [0.1, 0.5, 1.0, 2.0, 10.0])
@pytest.mark.parametrize("phi_a", [-0.1, -0.5, -2.0])
def test_first_order_has_two_equilibria(tau, phi_a):
    point = from_coefficients(phi_a)
    records = first_order_equilibria(point, tau)
    assert len(records) == 2
    depressed, ree = records
    assert depressed.delta_A == pytest.approx(-(1 - phi_a) / tau, abs=1e-12)
    assert depressed.regime == Regime.DEPRESSED
    assert ree.regime == Regime.REE and ree.branch == Branch.ZERO
    assert all(r.residual <= RESIDUAL_BOUND and r.valid for r in records)

    g = signed_equation(EquationId.FIRST_ORDER, point.context(tau=tau))
    lo = 1.5 * depressed.delta_A - 1.0
    scan = find_roots(g, lo, 1.0, SCAN_GRID_N)
    assert scan.roots == pytest.approx([r.delta_A for r in records], abs=1e-9)


def test_first_order_without_discount_is_the_ree():
    records = first_order_equilibria(from_coefficients(-0.5), 0.0)
    assert [r.delta_A for r in records] == [0.0]
    with pytest.raises(ArgError):
        first_order_equilibria(from_coefficients(-0.5), -1.0)


def test_true_prices_come_from_the_demand(linear_spec):
    a0 = solve_ree(linear_spec, 1.0).A0
    point = expansion_point(linear_spec, a0, 1.0)
    depressed, ree = first_order_equilibria(point, 0.5)
    assert depressed.A == pytest.approx(4.0 / 3.0 - 3.0)
    assert depressed.true_price == pytest.approx(2.0 - 0.5 * depressed.A)
    assert EXTRAPOLATED in depressed.reason
    assert ree.true_price == pytest.approx(a0)
    assert ree.reason == ""


def test_coefficient_points_have_no_true_price():
    assert first_order_equilibria(from_coefficients(-0.5), 1.0)[0].true_price is None


#######################################################################
## Parameter change ###################################################
#######################################################################

POINT = from_coefficients(-0.5)
TAUS = Discounts(1.0, 2.0, 0.5)
BOUND = 0.5


def test_discount_validation():
    with pytest.raises(ArgError):
        Discounts(0.0, 1.0)
    with pytest.raises(ArgError):
        Discounts(1.0, -1.0)
    assert Discounts(1.0).existence_bound(1.0) == math.inf
    assert TAUS.existence_bound(1.0) == BOUND


@pytest.mark.parametrize("delta_b", list(np.linspace(0.0, 2 * BOUND, 100))[1:])
def test_elevated_equilibrium_exists_below_the_bound(delta_b):
    if abs(delta_b - BOUND) <= 1e-9:
        pytest.skip("on the existence boundary")
    records = parameter_change_equilibria(POINT, delta_b, TAUS)
    elevated = [r for r in records if r.regime == Regime.ELEVATED]
    assert bool(elevated) == (delta_b < BOUND)
    assert all(r.residual <= RESIDUAL_BOUND for r in records)
    if delta_b < BOUND:
        assert elevated[0].delta_A == pytest.approx(elevated_root(POINT, delta_b, TAUS))
        assert elevated[0].equation == EquationId.PARAM_CHANGE_UP
    else:
        with pytest.raises(ExistenceError):
            elevated_root(POINT, delta_b, TAUS)


def test_parameter_change_roots_match_the_scan():
    records = parameter_change_equilibria(POINT, 0.3, TAUS)
    context = POINT.context(delta_b=0.3, tau1=1.0, tau2=2.0, tau3=0.5)
    scan = find_roots(signed_equation(EquationId.PARAM_CHANGE_UP, context), -5, 5, SCAN_GRID_N)
    assert scan.roots == pytest.approx([r.delta_A for r in records], abs=1e-9)
    for record in records:
        assert residual(record.equation, record.delta_A, context) <= RESIDUAL_BOUND


def test_elevated_root_vanishes_with_the_parameter_change():
    assert abs(elevated_root(POINT, 1e-8, TAUS)) <= 1e-6
    elevated = [
        r
        for r in parameter_change_equilibria(POINT, 1e-8, TAUS)
        if r.regime == Regime.ELEVATED
    ]
    assert all(abs(r.delta_A) <= 1e-6 for r in elevated)


def test_marginal_multiplier_starts_at_the_frictionless_value():
    assert marginal_multiplier(POINT, 1e-8, TAUS) == pytest.approx(1.0 / 1.5, rel=1e-4)


@pytest.mark.parametrize("delta_b", list(np.linspace(0.05, 0.45, 10)))
def test_marginal_multiplier_is_the_derivative_of_the_elevated_root(delta_b):
    numeric = fd_derivative(lambda db: elevated_root(POINT, db, TAUS), delta_b, 1e-6)
    assert numeric == pytest.approx(marginal_multiplier(POINT, delta_b, TAUS), abs=1e-6)


def test_policy_regimes():
    taus = Discounts(1.0, 100.0)
    bounds = marginal_regime_bounds(POINT, taus)
    assert bounds.sign_change == pytest.approx(0.005, abs=1e-12)
    assert bounds.existence == pytest.approx(0.01)
    assert policy_regime(POINT, 0.0, taus) == PolicyRegime.FRICTIONLESS
    assert policy_regime(POINT, 0.004, taus) == PolicyRegime.DIMINISHING_RETURNS
    assert policy_regime(POINT, 0.009, taus) == PolicyRegime.UNCHARTED_TERRITORY
    assert policy_regime(POINT, 0.02, taus) == PolicyRegime.NO_ELEVATED
    assert marginal_regime_bounds(POINT, Discounts(1.0)).sign_change is None


def test_negative_parameter_change():
    with pytest.raises(ArgError):
        parameter_change_equilibria(POINT, -0.1, TAUS)


#######################################################################
## Second order #######################################################
#######################################################################


@pytest.mark.parametrize("phi_aa", [8.0, -8.0])
def test_second_order_without_discount(phi_aa):
    records = second_order_equilibria(from_coefficients(-0.5, phi_aa=phi_aa), 0.0)
    deltas = sorted(r.delta_A for r in records)
    assert deltas == pytest.approx(sorted([0.0, 1.5 / (0.5 * phi_aa)]), abs=1e-12)
    assert all(r.residual <= RESIDUAL_BOUND for r in records)


def test_second_order_without_discount_on_exponential_demand(exp_spec):
    a0 = solve_ree(exp_spec, 0.0).A0
    point = expansion_point(exp_spec, a0, 0.0)
    assert point.phi_aa == pytest.approx(a0)
    deltas = sorted(r.delta_A for r in second_order_equilibria(point, 0.0))
    assert deltas == pytest.approx([0.0, 2.0 * (1.0 + a0) / a0], abs=1e-12)
    assert deltas[1] == pytest.approx(5.5265, abs=1e-4)


def test_concave_second_order_is_a_first_order_discount(quad_spec):
    a0 = solve_ree(quad_spec, 0.0).A0
    point = expansion_point(quad_spec, a0, 0.0)
    assert point.phi_aa < 0
    second = sorted(r.delta_A for r in second_order_equilibria(point, 0.0))
    first = sorted(r.delta_A for r in first_order_equilibria(point, -0.5 * point.phi_aa))
    assert second == pytest.approx(first, abs=1e-12)

def test_second_order_degenerate_case():
    (record,) = second_order_equilibria(from_coefficients(-0.5), 0.0)
    assert record.delta_A == 0.0
    assert DEGENERATE in record.reason
    with pytest.raises(DegenerateError):
        second_order_equilibria(from_coefficients(-0.5), 0.0, strict=True)
    curved = from_coefficients(-0.5, phi_aa=1.0)
    assert len(second_order_equilibria(curved, 0.0, strict=True)) == 2


@pytest.mark.parametrize(
    "phi_aa, tau, count",
    [(-8.0, 1.0, 2), (-0.5, 0.1, 2), (2.0, 1.0, 2), (8.0, 1.0, 4), (12.0, 2.0, 4)],
)
def test_second_order_case_table(phi_aa, tau, count):
    point = from_coefficients(-0.5, phi_aa=phi_aa)
    records = second_order_equilibria(point, tau)
    assert len(records) == count
    assert all(r.residual <= RESIDUAL_BOUND for r in records)
    assert sum(r.regime == Regime.DEPRESSED for r in records) == 1

    g = signed_equation(EquationId.SECOND_ORDER, point.context(tau=tau))
    scan = find_roots(g, -20.0, 20.0, SCAN_GRID_N)
    assert scan.roots == pytest.approx([r.delta_A for r in records], abs=1e-9)


def test_second_order_four_roots_values():
    records = second_order_equilibria(from_coefficients(-0.5, phi_aa=8.0), 1.0)
    expected = [-2.0 - math.sqrt(5.5), 0.0, 2.0 - math.sqrt(2.5), 2.0 + math.sqrt(2.5)]
    assert [r.delta_A for r in records] == pytest.approx(expected, abs=1e-12)


#######################################################################
## Max-error discount #################################################
#######################################################################


def test_alt_discount_regimes():
    records = alt_discount_equilibria(POINT, 0.1)
    minus, small = records
    assert small.delta_A == pytest.approx(0.06, abs=1e-12)
    assert small.equation == EquationId.ALT_REGIME1
    assert abs(small.delta_A) < 0.1
    assert minus.delta_A == pytest.approx(-0.75 - math.sqrt(0.6625), abs=1e-12)
    assert minus.equation == EquationId.ALT_REGIME2
    assert abs(minus.delta_A) > 0.1
    assert all(r.residual <= RESIDUAL_BOUND for r in records)


def test_alt_discount_roots_match_the_scan():
    context = POINT.context(delta_b=0.1)
    scan = find_roots(signed_equation(EquationId.ALT_REGIME1, context), -5, 5, SCAN_GRID_N)
    expected = [r.delta_A for r in alt_discount_equilibria(POINT, 0.1)]
    assert scan.roots == pytest.approx(expected, abs=1e-9)


def test_minus_root_bound():
    delta_b1 = minus_root_bound(POINT)
    minus_root = -0.75 - math.sqrt(delta_b1 + 0.75**2)
    assert abs(minus_root) == pytest.approx(delta_b1, abs=1e-8)
    assert delta_b1 == pytest.approx(regime_bounds_closed_form(POINT).delta_b1, abs=1e-9)


def test_plus_root_bound_needs_a_steep_sensitivity():
    with pytest.raises(ExistenceError):
        plus_root_bound(POINT)
    with pytest.raises(ExistenceError):
        regime_bounds(POINT)
    steep = from_coefficients(-0.5, phi_b=3.0)
    bounds = regime_bounds(steep)
    exact = regime_bounds_closed_form(steep)
    assert bounds.delta_b1 == pytest.approx(exact.delta_b1, abs=1e-9)
    assert bounds.delta_b2 == pytest.approx(exact.delta_b2, abs=1e-9)
    assert exact.delta_b2 == pytest.approx(1.5)


def test_alt_discount_rejects_negative_change():
    with pytest.raises(ArgError):
        alt_discount_equilibria(POINT, -0.1)
