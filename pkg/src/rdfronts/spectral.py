"""Principal eigenpairs of -Laplacian_y + alpha g(y) - f'(.) and the extinction threshold."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np
import scipy.sparse as sp

from .discretize import Factorized, assemble_transverse
from .exceptions import BracketError, ConfigError, ConvergenceError

log = logging.getLogger(__name__)


@dataclass
class EigenResult:
    lam: float
    phi: np.ndarray = field(repr=False)
    residual: float
    alpha: float
    about: str = "zero-solution"
    iterations: int = 0
    grid: object = field(default=None, repr=False)

    @property
    def lambda_(self):
        return self.lam


def gershgorin_lower(A):
    A = sp.csr_matrix(A)
    d = A.diagonal()
    off = np.asarray(abs(A).sum(axis=1)).ravel() - np.abs(d)
    return float(np.min(d - off))


def principal_pair(op, grid, tol=1e-10, maxiter=100_000, alpha=float("nan"), about="zero-solution"):
    """Smallest eigenvalue and positive eigenfunction by shifted inverse iteration.

    The shift sits just below the Gershgorin lower bound, so the shifted
    operator is a nonsingular M-matrix and the iteration converges to the
    Perron (principal) pair.  ``phi`` is normalized by sum(w * phi^2) = 1.
    """
    A = op.matrix
    w = op.weights
    sigma = gershgorin_lower(A)
    sigma -= 1e-2 * (1.0 + abs(sigma))
    lu = Factorized(A - sigma * sp.identity(A.shape[0], format="csr"))

    def wnorm(v):
        return math.sqrt(float(np.dot(w, v * v)))

    phi = np.ones(A.shape[0])
    phi /= wnorm(phi)
    lam = res = float("nan")
    for it in range(1, maxiter + 1):
        psi = lu.solve(phi)
        phi = psi / wnorm(psi)
        Aphi = A @ phi
        lam = float(np.dot(w, phi * Aphi))
        res = wnorm(Aphi - lam * phi)
        if res <= tol:
            break
    else:
        raise ConvergenceError(f"inverse iteration stalled: residual {res:.3e} after {maxiter} iterations",
                               maxiter, res)
    if np.sum(phi) < 0:
        phi = -phi
    if np.any(phi < -1e-12 * np.max(phi)):
        raise ConvergenceError("principal eigenfunction changed sign", it, res)
    return EigenResult(lam, phi, res, alpha, about, it, grid)


def principal_eigen(grid, potential, alpha, fprime0, tol=1e-10, maxiter=100_000):
    """Principal eigenpair of L = -Laplacian + alpha g - f'(0) about the zero solution."""
    if alpha <= 0:
        raise ConfigError("alpha must be positive")
    op = assemble_transverse(grid, potential, alpha, shift=-fprime0)
    return principal_pair(op, grid, tol, maxiter, alpha=alpha)


def rayleigh_quotient(grid, potential, alpha, fprime0, phi):
    """Quadrature of (int |grad phi|^2 + (alpha g - f'(0)) phi^2) / int phi^2."""
    full = grid.full(phi)
    grad2 = np.sum(grid.face_areas * np.diff(full) ** 2) / grid.hy if grid.radial else \
        np.sum(np.diff(full) ** 2) / grid.hy
    w = grid.weights
    pot = np.dot(w, (alpha * potential(grid.r) - fprime0) * phi * phi)
    return float((grad2 + pot) / np.dot(w, phi * phi))


def _curve_point(alpha, grid, potential, fprime0, tol):
    return principal_eigen(grid, potential, alpha, fprime0, tol)


def eigen_curve(alphas, grid, potential, fprime0, tol=1e-10, workers=1):
    """Principal eigenpairs along a sorted list of alphas (results in input order)."""
    alphas = [float(a) for a in alphas]
    if any(a <= 0 for a in alphas) or alphas != sorted(alphas):
        raise ConfigError("alphas must be positive and sorted")
    job = partial(_curve_point, grid=grid, potential=potential, fprime0=fprime0, tol=tol)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(job, alphas))
    return [job(a) for a in alphas]


def concavity_defect(alphas, lams):
    """Largest amount by which an interior point lies below its neighbours' chord."""
    a = np.asarray(alphas, float)
    lam = np.asarray(lams, float)
    if a.size < 3:
        return 0.0
    t = (a[1:-1] - a[:-2]) / (a[2:] - a[:-2])
    chord = (1 - t) * lam[:-2] + t * lam[2:]
    return float(np.max(chord - lam[1:-1]))


def richardson_lambda(grid, potential, alpha, fprime0, tol=1e-10):
    """Second-order Richardson extrapolation of the principal eigenvalue in hy."""
    coarse = principal_eigen(grid, potential, alpha, fprime0, tol).lam
    fine = principal_eigen(grid.refined(2), potential, alpha, fprime0, tol).lam
    return (4.0 * fine - coarse) / 3.0


@dataclass
class Alpha0Result:
    alpha0: float
    bracket: tuple[float, float]
    case: str
    lambda_at_max: float | None = None
    evaluations: list = field(default_factory=list, repr=False)

    @property
    def finite(self):
        return math.isfinite(self.alpha0)

    def describe(self):
        if self.finite:
            return f"alpha0 = {self.alpha0:.6f}"
        return f"alpha0 = +inf (case ii): lambda(alpha_max) = {self.lambda_at_max:.6g} < 0"


def find_alpha0(grid, potential, fprime0, alpha_max=1e3, atol=1e-4, start=1.0, richardson=True, tol=1e-10):
    """Threshold alpha0 where the principal eigenvalue crosses zero.

    Returns +inf (with the eigenvalue at ``alpha_max``) when lambda stays
    negative up to ``alpha_max``, the plateau case where the potential
    vanishes on a ball too large for the growth rate.
    """
    history = []

    def lam(a):
        val = richardson_lambda(grid, potential, a, fprime0, tol) if richardson else \
            principal_eigen(grid, potential, a, fprime0, tol).lam
        history.append((a, val))
        return val

    if fprime0 <= 0:
        return Alpha0Result(0.0, (0.0, 0.0), "no-growth", None, history)
    hi = min(start, alpha_max)
    lam_hi = lam(hi)
    while lam_hi < 0:
        if hi >= alpha_max:
            return Alpha0Result(math.inf, (alpha_max, math.inf), "ii", lam_hi, history)
        hi = min(2.0 * hi, alpha_max)
        lam_hi = lam(hi)
    lo = hi
    lam_lo = lam_hi
    while lam_lo >= 0:
        lo /= 2.0
        if lo < 1e-12:
            raise BracketError("no alpha with negative principal eigenvalue found", lo, hi)
        lam_lo = lam(lo)
        if lam_lo >= 0:
            hi = lo
    while hi - lo > atol:
        mid = 0.5 * (lo + hi)
        if lam(mid) < 0:
            lo = mid
        else:
            hi = mid
    return Alpha0Result(0.5 * (lo + hi), (lo, hi), "i", None, history)


def dirichlet_ball_eigen(grid, potential, alpha, fprime0, R, tol=1e-10):
    """Principal eigenpair with Dirichlet condition on the ball of radius R."""
    if R > grid.R + 1e-12:
        raise ConfigError("ball radius exceeds the grid truncation radius")
    sub = grid.with_radius(R)
    res = principal_eigen(sub, potential, alpha, fprime0, tol)
    res.about = f"dirichlet-ball R={R}"
    return res


def linearized_stability(values, grid, reaction, heterogeneity, tol=1e-10):
    """Principal eigenpair of -Laplacian - d_s h(y, V) about a profile V.

    ``heterogeneity`` supplies h(y, s) = weight(y) f(s) - absorption(y) s
    (confined: weight 1, absorption alpha g).
    """
    r = grid.r
    coef = heterogeneity.absorption(r) - heterogeneity.weight(r) * reaction.df(values)
    op = assemble_transverse(grid, coefficient=coef)
    alpha = getattr(heterogeneity, "alpha", float("nan"))
    return principal_pair(op, grid, tol, alpha=alpha, about="profile V")
