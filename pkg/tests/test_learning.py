import numpy as np
import pytest

from constants.tolerances import RESIDUAL_BOUND
from demand.families import evaluate
from learning.dynamics import RootUsed, simulate, step
from learning.mixture import (
    PSI_GRID_N,
    cycling_hypothesis,
    find_cycling_pair,
    mixture_coefficients,
    mixture_equilibrium,
)
from learning.supply import RootPolicy, supply_map
from oracle.roots import fd_derivative
from polyeq.expansion import expansion_point
from polyeq.static import first_order_equilibria
from ree.solver import solve_ree
from utils.algebra import solve_quadratic
from utils.errors import ArgError, ComplexRootError, DomainError, ExistenceError

OMEGA = 0.5671432904097838

#######################################################################
## Supply map #########################################################
#######################################################################


def test_root_policies():
    assert RootPolicy.PLUS.sign(4) == 1
    assert RootPolicy.MINUS.sign(1) == -1
    assert [RootPolicy.ALTERNATE.sign(t) for t in (1, 2, 3)] == [1, -1, 1]
    with pytest.raises(ArgError):
        RootPolicy.RANDOM.sign(1)
    draws = [RootPolicy.RANDOM.sign(t, np.random.default_rng(7)) for t in range(5)]
    again = [RootPolicy.RANDOM.sign(t, np.random.default_rng(7)) for t in range(5)]
    assert draws == again


def test_supply_map_fixes_the_ree(exp_spec):
    a0 = solve_ree(exp_spec, 0.0).A0
    assert supply_map(exp_spec, 0.0, a0) == pytest.approx(a0, abs=1e-15)
    assert supply_map(exp_spec, 0.0, a0, sign=-1) < a0


def test_supply_map_is_flat_at_the_ree(exp_spec):
    a0 = solve_ree(exp_spec, 0.0).A0
    slope = fd_derivative(lambda x: supply_map(exp_spec, 0.0, x), a0, 1e-5)
    assert slope == pytest.approx(0.0, abs=1e-6)


def test_supply_map_without_real_root(exp_spec):
    with pytest.raises(ComplexRootError):
        supply_map(exp_spec, 0.0, 3.0)


#######################################################################
## Learning traces ####################################################
#######################################################################


def test_plus_root_learning_converges_from_below(exp_spec):
    trace = simulate(exp_spec, 0.0, 0.1, t_max=200, root_policy=RootPolicy.PLUS)
    supplies = trace.supplies
    assert trace.a0 == pytest.approx(OMEGA, abs=1e-12)
    assert supplies[0] == 0.1
    assert all(later > earlier for earlier, later in zip(supplies, supplies[1:]))
    assert all(a <= trace.a0 + 1e-12 for a in supplies)
    assert trace.converged and not trace.halted
    assert trace.final_gap <= 1e-8
    assert len(trace.steps) <= 201
    assert trace.steps[0].root_used == RootUsed.PRIOR
    assert trace.steps[0].supply_residual is None
    assert all(s.supply_residual <= RESIDUAL_BOUND for s in trace.steps[1:])


def test_prior_at_the_ree_is_already_converged(linear_spec):
    a0 = solve_ree(linear_spec, 1.0).A0
    trace = simulate(linear_spec, 1.0, a0)
    assert trace.converged
    assert len(trace.steps) == 1


def test_trace_arguments(exp_spec):
    with pytest.raises(DomainError):
        simulate(exp_spec, 0.0, -0.5)
    with pytest.raises(ArgError):
        simulate(exp_spec, 0.0, 0.1, t_max=-1)
    with pytest.raises(ArgError):
        step(exp_spec, 0.0, [], RootPolicy.PLUS)


def test_seeded_random_policy_is_reproducible(exp_spec):
    first = simulate(exp_spec, 0.0, 0.1, t_max=20, root_policy=RootPolicy.RANDOM, seed=3)
    second = simulate(exp_spec, 0.0, 0.1, t_max=20, root_policy=RootPolicy.RANDOM, seed=3)
    assert first.supplies == second.supplies
    assert [s.root_used for s in first.steps] == [s.root_used for s in second.steps]


def test_trace_through_the_minus_root_halts_at_the_domain(exp_spec):
    trace = simulate(exp_spec, 0.0, 0.1, t_max=10, root_policy=RootPolicy.MINUS)
    assert not trace.converged
    assert trace.halted
    assert "outside demand domain" in trace.halt_reason
    assert len(trace.steps) == 1
    assert trace.final_gap == pytest.approx(OMEGA - 0.1)


def test_alternate_policy_keeps_the_supply_residual(exp_spec):
    trace = simulate(exp_spec, 0.0, 0.1, t_max=50, root_policy=RootPolicy.ALTERNATE)
    lo, hi = exp_spec.domain_hint
    assert trace.steps[1].root_used == RootUsed.PLUS
    assert trace.halted
    assert all(lo <= s.a_next <= hi for s in trace.steps)
    assert all(s.supply_residual <= 1e-10 for s in trace.steps[1:])


def test_supply_moves_towards_the_price(exp_spec):
    trace = simulate(exp_spec, 0.0, 0.1, t_max=200, root_policy=RootPolicy.PLUS)
    for previous, record in zip(trace.steps, trace.steps[1:]):
        if record.a_star != previous.a_next:
            continue
        gap = evaluate(exp_spec, record.a_star, 0.0) - record.a_star
        assert np.sign(record.a_next - record.a_star) == np.sign(gap)


def test_supply_never_overshoots_the_price_on_convex_demand(exp_spec):
    trace = simulate(exp_spec, 0.0, 0.1, t_max=200, root_policy=RootPolicy.PLUS)
    for a in trace.supplies[1:]:
        assert a - evaluate(exp_spec, a, 0.0) <= 1e-12


def test_minus_step_from_the_ree_is_the_depressed_equilibrium(linear_spec):
    a0 = solve_ree(linear_spec, 1.0).A0
    a_next, record = step(linear_spec, 1.0, [a0], RootPolicy.MINUS)
    depressed, _ = first_order_equilibria(expansion_point(linear_spec, a0, 1.0), 1.0)
    assert record.root_used == RootUsed.MINUS
    assert a_next == pytest.approx(depressed.A, abs=1e-10)
    assert a_next == pytest.approx(a0 - 1.5, abs=1e-10)


#######################################################################
## Mixtures ###########################################################
#######################################################################


def test_cycling_pair_on_logistic_demand(logistic_spec):
    pair = find_cycling_pair(logistic_spec, 0.0, 0.0, 3.0, 301)
    assert pair is not None
    a_star, a_star2 = pair
    assert a_star < a_star2
    assert cycling_hypothesis(logistic_spec, 0.0, a_star, a_star2)

    mixture = mixture_equilibrium(logistic_spec, 0.0, a_star, a_star2)
    assert 0.0 < mixture.psi < 1.0
    assert not mixture.degenerate
    assert mixture.a_bar == pytest.approx(0.5 * (a_star + a_star2))
    assert abs(solve_quadratic(1.0, mixture.p, mixture.q)[0] - mixture.a_bar) <= 1e-10
    assert mixture.residual <= 1e-10
    assert abs(mixture.direct_a - mixture.a_bar) <= 1e-8
    for psi in np.linspace(0.0, 1.0, PSI_GRID_N):
        _, q = mixture_coefficients(logistic_spec, 0.0, a_star, a_star2, psi)
        assert -q > 0


def test_mixture_endpoints_reproduce_the_supply_map(logistic_spec):
    for psi, point in ((1.0, 0.0), (0.0, 1.39)):
        p, q = mixture_coefficients(logistic_spec, 0.0, 0.0, 1.39, psi)
        plus, minus = solve_quadratic(1.0, p, q)
        assert plus == pytest.approx(supply_map(logistic_spec, 0.0, point), abs=1e-12)
        assert minus == pytest.approx(supply_map(logistic_spec, 0.0, point, -1), abs=1e-12)


def test_mixture_needs_cycling_points(exp_spec):
    with pytest.raises(ExistenceError):
        mixture_equilibrium(exp_spec, 0.0, 0.1, 0.5)


def test_mixture_of_identical_points_is_degenerate(exp_spec):
    mixture = mixture_equilibrium(exp_spec, 0.0, 0.3, 0.3)
    assert mixture.degenerate
    assert mixture.psi == 0.5
    assert mixture.direct_a == pytest.approx(supply_map(exp_spec, 0.0, 0.3), abs=1e-12)


def test_cycling_selection_is_settled_by_a_mixture(logistic_spec):
    a_next, record = step(logistic_spec, 0.0, [0.0, 1.39], RootPolicy.PLUS, t=1)
    assert record.root_used == RootUsed.MIXTURE
    assert a_next == pytest.approx(0.695)
    assert {record.a_star, record.a_star2} == {0.0, 1.39}
    assert 0.0 < record.psi < 1.0
    assert record.supply_residual <= RESIDUAL_BOUND
