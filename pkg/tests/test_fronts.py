import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rdfronts import BracketError, ConfinedLinear, Potential, Reaction, make_slab, make_transverse
from rdfronts.fronts import (MAX, POINT, FrontSolution, SlabSolver, aitken, extend_front, find_speed, normalization_value,
                             one_d_bistable_speed, supercritical_front)
from rdfronts.profiles import solve_profile_kpp


def travelling_wave(x, theta):
    """Exact bistable wave 1 / (1 + exp(x / sqrt 2)) and its speed sqrt 2 (1/2 - theta)."""
    return 1.0 / (1.0 + np.exp(x / math.sqrt(2.0))), math.sqrt(2.0) * (0.5 - theta)


def test_closed_form_wave_solves_the_ode():
    theta = 0.25
    x = np.linspace(-15, 15, 3001)
    U, c = travelling_wave(x, theta)
    h = x[1] - x[0]
    d1 = (U[2:] - U[:-2]) / (2 * h)
    d2 = (U[2:] - 2 * U[1:-1] + U[:-2]) / h**2
    f = Reaction.bistable(theta).f(U[1:-1])
    assert np.max(np.abs(-d2 - c * d1 - f)) < 1e-5


@pytest.fixture(scope="module")
def oracle20():
    return one_d_bistable_speed(20.0, Reaction.bistable(0.25))


def test_one_d_speed_and_shape(oracle20):
    gamma, sol = oracle20
    U, c = travelling_wave(sol.slab.x, 0.25)
    assert abs(gamma - c) < 1e-6
    shift = math.sqrt(2.0) * math.log(1 / 0.25 - 1)  # U(shift) = theta
    exact, _ = travelling_wave(sol.slab.x + shift, 0.25)
    assert np.max(np.abs(sol.full()[:, 0] - exact)) < 1e-3
    assert sol.monotone_x1 and sol.residual <= 1e-8


def test_balanced_cubic_is_standing():
    gamma, _ = one_d_bistable_speed(10.0, Reaction.bistable(0.5), hx=0.1, width=1e-6)
    assert abs(gamma) < 1e-5


def test_speed_search_respects_decision_order(oracle20):
    _, sol = oracle20
    above = [c for c, s in sol.decisions if s > 0]
    below = [c for c, s in sol.decisions if s < 0]
    assert max(above) < min(below)
    assert sol.bracket[0] <= sol.c <= sol.bracket[1]
    assert sol.bracket[1] - sol.bracket[0] <= 1e-7


@pytest.fixture(scope="module")
def kpp_setup():
    grid = make_transverse(1, 6.0, 31)
    kpp = Reaction.kpp()
    pot = Potential.quadratic()
    prof = solve_profile_kpp(0.25, grid, pot, kpp)
    slab = make_slab(8.0, 0.4, grid)
    return SlabSolver(slab, ConfinedLinear(0.25, pot), kpp, prof.values), prof


@given(st.integers(0, 2**32 - 1))
def test_sweep_preserves_order(seed):
    # 40 examples x 2 reactions x 3 pairs = 240 ordered pairs
    r = np.random.default_rng(seed)
    grid = make_transverse(1, 4.0, 21)
    pot = Potential.quadratic()
    for reaction in (Reaction.kpp(), Reaction.bistable(0.3)):
        V = np.exp(-grid.r**2 / 4)
        solver = SlabSolver(make_slab(3.0, 0.5, grid), ConfinedLinear(0.25, pot), reaction, V)
        c = float(r.uniform(-2, 2))
        op, _ = solver._operator(c)
        bc = op.boundary_rhs(solver.V, solver.right)
        for _ in range(3):
            hi = r.uniform(0, 1, op.shape2d) * V[None, :]
            lo = hi * r.uniform(0, 1, op.shape2d)
            assert np.all(solver._sweep(c, lo.ravel(), bc) <= solver._sweep(c, hi.ravel(), bc) + 1e-13)


def test_solutions_ordered_in_boundary_data(kpp_setup):
    solver, prof = kpp_setup
    big = solver.solve(0.5)
    small = solver.solve(0.5, left=0.6 * prof.values, super_start=False)
    assert np.all(small.u <= big.u + 1e-9)


def test_solutions_decrease_in_speed_and_x(kpp_setup):
    solver, _ = kpp_setup
    sols = [solver.solve(c) for c in (0.0, 0.8, 1.6)]
    for s in sols:
        assert s.monotone_x1
    for slow, fast in zip(sols, sols[1:]):
        assert np.all(fast.u <= slow.u + 1e-9)


def test_normalization_bracket_ends(kpp_setup):
    solver, _ = kpp_setup
    theta = 0.05
    assert normalization_value(solver.solve(0.0), POINT) > theta
    assert normalization_value(solver.solve(4.0), POINT) < theta


def test_find_speed_normalized(kpp_setup):
    solver, _ = kpp_setup
    sol = find_speed(solver, 0.05, (0.0, 3.0), POINT)
    assert abs(sol.value - 0.05) < 1e-9
    assert sol.residual <= 1e-8 and sol.monotone_x1
    assert 0 < sol.c < 2 * math.sqrt(0.5)


def test_extend_front_stays_below_left_state(kpp_setup):
    solver, prof = kpp_setup
    sol = solver.solve(0.5)
    bigger = make_slab(12.0, 0.4, sol.slab.transverse)
    ext = extend_front(sol, bigger, prof.values)
    assert ext.shape == bigger.shape
    assert np.all(ext <= prof.values[None, :])


def test_aitken():
    seq = [1 - 0.5**k for k in range(1, 6)]
    lim, err = aitken(seq)
    assert abs(lim - 1.0) < 1e-12
    assert aitken([1.0, 1.5]) == (1.5, 0.5)
    assert aitken([1.0, 2.0, 1.5])[0] == 1.5  # oscillating: no extrapolation


def test_supercritical_requires_fast_speed(kpp_setup):
    solver, prof = kpp_setup
    with pytest.raises(BracketError):
        supercritical_front(1.0, 1.2, None, 8.0, 0.05, solver.het, solver.reaction, prof.values)


def test_max_normalization_uses_row_maximum():
    grid = make_transverse(1, 2.0, 5)
    slab = make_slab(1.0, 0.5, grid)
    u = np.zeros(slab.shape)
    u[slab.center_index] = [0.3, 0.2, 0.4]
    sol = FrontSolution(u, 0.0, 1.0, slab, np.ones(3), np.zeros(3), 0.0)
    assert normalization_value(sol, MAX) == 0.4
    assert normalization_value(sol, POINT) == 0.2
