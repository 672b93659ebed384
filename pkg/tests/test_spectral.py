import math

import numpy as np
import pytest
import scipy.sparse.linalg as spla

from rdfronts import Potential, make_transverse
from rdfronts.discretize import assemble_transverse
from rdfronts.spectral import (concavity_defect, dirichlet_ball_eigen, eigen_curve, find_alpha0,
                               linearized_stability, principal_eigen, rayleigh_quotient, richardson_lambda)
from rdfronts.nonlinearity import ConfinedLinear


def gaussian(alpha, r, transverse_dim):
    """L2-normalized ground state of -Laplacian + alpha |y|^2 in R^transverse_dim."""
    s = math.sqrt(alpha)
    return (s / math.pi) ** (transverse_dim / 4.0) * np.exp(-s * r**2 / 2.0)


@pytest.mark.parametrize("label,dim", [("1", 1), ("radial-2", 2), ("radial-3", 3)])
@pytest.mark.parametrize("alpha", [0.5, 2.0])
def test_harmonic_oscillator_law(label, dim, alpha, quadratic):
    R = 8.0 / alpha**0.25
    grid = make_transverse(label, R, 801 if label == "1" else 401)
    lam = richardson_lambda(grid, quadratic, alpha, 1.0)
    assert lam == pytest.approx(dim * math.sqrt(alpha) - 1.0, abs=1e-6)


def test_eigenfunction_is_gaussian(quadratic):
    for label, dim, n in [("1", 1, 801), ("radial-2", 2, 401)]:
        grid = make_transverse(label, 8.0, n)
        res = principal_eigen(grid, quadratic, 1.0, 1.0)
        assert np.max(np.abs(res.phi - gaussian(1.0, grid.r, dim))) < 1e-4
        assert np.all(res.phi > 0)
        assert grid.integrate(res.phi**2) == pytest.approx(1.0)


def test_against_independent_sparse_eigensolver(quadratic):
    grid = make_transverse("radial-2", 6.0, 201)
    res = principal_eigen(grid, quadratic, 0.7, 0.3)
    op = assemble_transverse(grid, quadratic, 0.7, shift=-0.3)
    sq = np.sqrt(grid.weights)
    S = (op.matrix.multiply(sq[:, None]).multiply(1.0 / sq[None, :])).tocsc()
    vals = spla.eigsh(0.5 * (S + S.T), k=1, sigma=-10.0, which="LM", return_eigenvectors=False)
    assert res.lam == pytest.approx(float(vals[0]), abs=1e-10)


def test_rayleigh_quotient_equals_eigenvalue(quadratic):
    grid = make_transverse("radial-3", 6.0, 301)
    res = principal_eigen(grid, quadratic, 1.3, 1.0)
    assert rayleigh_quotient(grid, quadratic, 1.3, 1.0, res.phi) == pytest.approx(res.lam, abs=1e-10)
    # any other positive trial function gives a larger quotient
    trial = np.exp(-grid.r**2)
    assert rayleigh_quotient(grid, quadratic, 1.3, 1.0, trial) > res.lam


def test_eigen_curve_increasing_and_concave():
    grid = make_transverse(1, 12.0, 601)
    pot = Potential.plateau(1.0)
    alphas = np.geomspace(0.05, 20, 12)
    lams = [r.lam for r in eigen_curve(alphas, grid, pot, 1.0)]
    assert np.all(np.diff(lams) > 0)
    assert concavity_defect(alphas, lams) <= 1e-8


def test_alpha0_quadratic(quadratic):
    grid = make_transverse(1, 8.0, 401)
    res = find_alpha0(grid, quadratic, 1.0)
    assert res.finite and res.case == "i"
    assert res.alpha0 == pytest.approx(1.0, rel=1e-3)
    res2 = find_alpha0(grid, quadratic, 0.5)
    assert res2.alpha0 == pytest.approx(0.25, rel=1e-3)


def test_alpha0_plateau_infinite():
    grid = make_transverse(1, 10.0, 251)
    res = find_alpha0(grid, Potential.plateau(2.0), 1.0, alpha_max=1e3)
    assert not res.finite and res.case == "ii"
    assert res.lambda_at_max < 0
    # bounded above by the Dirichlet eigenvalue of the ball minus f'(0)
    assert res.lambda_at_max <= (math.pi / 4.0) ** 2 - 1.0 + 1e-3
    assert "+inf" in res.describe()


def test_dirichlet_ball_monotone_in_radius(quadratic):
    grid = make_transverse("radial-2", 8.0, 321)
    lams = [dirichlet_ball_eigen(grid, quadratic, 0.5, 1.0, R).lam for R in (2.0, 3.0, 5.0, 8.0)]
    assert np.all(np.diff(lams) < 0)


def test_linearized_stability_about_zero_matches_principal(quadratic, kpp):
    grid = make_transverse(1, 8.0, 321)
    res = linearized_stability(np.zeros(grid.size), grid, kpp, ConfinedLinear(0.5, quadratic))
    assert res.lam == pytest.approx(principal_eigen(grid, quadratic, 0.5, 1.0).lam, abs=1e-9)
