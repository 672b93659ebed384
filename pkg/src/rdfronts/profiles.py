"""Stationary transverse profiles V(y): -Laplacian V = h(y, V).

KPP profiles come from shifted monotone iteration between the
super-solution 1 and the sub-solution eps * phi_alpha; bistable maximal
profiles from the decreasing parabolic descent started at 1.  Both schemes
are the same linear sweep

    (A + K) u_next = w(y) f(u) + K u,      A = -Laplacian + absorption(y),

with K the Lipschitz constant of f, which keeps every iterate ordered.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .discretize import Factorized, assemble_transverse
from .exceptions import ConfigError, ConvergenceError, MonotonicityError
from .nonlinearity import BISTABLE, KPP, ConfinedLinear, H
from .spectral import linearized_stability, principal_eigen

log = logging.getLogger(__name__)

ZERO_LEVEL = 1e-6
MONOTONE = "monotone-iteration"
DESCENT = "parabolic-descent"
MINIMIZER = "energy-minimizer"


@dataclass
class Profile:
    values: np.ndarray = field(repr=False)
    alpha: float
    kind: str
    residual: float
    origin: str
    grid: object = field(default=None, repr=False)
    decay_rate: float = float("nan")
    iterations: int = 0
    energy: float | None = None
    note: str = ""
    diagnostics: dict = field(default_factory=dict, repr=False)

    @property
    def is_zero(self):
        return float(np.max(self.values, initial=0.0)) < ZERO_LEVEL

    @property
    def sup(self):
        return float(np.max(self.values, initial=0.0))

    def full(self):
        """Values on all grid nodes, boundary included."""
        return self.grid.full(self.values)


@dataclass
class EnergyReport:
    value: float
    gradient_norm: float
    spacing: float


class TransverseProblem:
    """-Laplacian_y u + absorption(y) u = weight(y) f(u) on a transverse grid."""

    def __init__(self, grid, heterogeneity, reaction):
        self.grid = grid
        self.het = heterogeneity
        self.reaction = reaction
        r = grid.r
        self.weight = heterogeneity.weight(r)
        self.absorption = heterogeneity.absorption(r)
        self.op = assemble_transverse(grid, coefficient=self.absorption)
        self.K = max(reaction.lipschitz * float(np.max(self.weight)), 1e-12)

    def source(self, u):
        return self.weight * self.reaction.f(u)

    def residual(self, u):
        """Sup-norm of Laplacian u + h(y, u) at the unknown nodes."""
        return float(np.max(np.abs(self.op.matrix @ u - self.source(u)), initial=0.0))

    def jacobian(self, u):
        return (self.op.matrix - sp.diags(self.weight * self.reaction.df(u))).tocsc()

    def sweeper(self, dt=None):
        """Factorized (A + 1/dt) for sweeps u -> (A + 1/dt)^-1 (w f(u) + u/dt); dt defaults to 1/K."""
        k = self.K if dt is None else 1.0 / dt
        return k, Factorized(self.op.matrix + k * sp.identity(self.grid.size, format="csr"))

    def newton(self, u, tol=1e-10, maxiter=30):
        """Newton polish of a nearly converged iterate; returns None when it fails."""
        res = self.residual(u)
        for _ in range(maxiter):
            if res <= tol:
                return u
            F = self.op.matrix @ u - self.source(u)
            try:
                du = Factorized(self.jacobian(u)).solve(F)
            except Exception:  # singular Jacobian at a fold
                return None
            step = 1.0
            while step > 1e-4:
                cand = u - step * du
                rc = self.residual(cand)
                if rc < res:
                    break
                step *= 0.5
            else:
                return None
            u, res = cand, rc
        return u if res <= tol else None

    def energy(self, w):
        grid = self.grid
        full = grid.full(w)
        if grid.radial:
            grad = np.sum(grid.face_areas * np.diff(full) ** 2) / grid.hy
        else:
            grad = np.sum(np.diff(full) ** 2) / grid.hy
        pot = np.dot(grid.weights, -H(self.het, self.reaction, grid.r, w))
        g = self.op.matrix @ w - self.source(w)
        gnorm = math.sqrt(float(np.dot(grid.weights, g * g)))
        return EnergyReport(0.5 * grad + float(pot), gnorm, grid.hy)

    def energy_gradient(self, w):
        """Exact gradient of the discrete energy with respect to nodal values."""
        return self.grid.weights * (self.op.matrix @ w - self.source(w))


def _iterate(problem, u, direction, tol, maxiter, dt=None, newton=True, stop=None):
    """Monotone sweeps until the profile residual is below ``tol``.

    ``direction`` is -1 (decreasing from a super-solution) or +1
    (increasing from a sub-solution).  ``stop(u)`` may end the sweep early
    and returns a reason string.
    """
    k, lu = problem.sweeper(dt)
    slack = 1e-12
    u = np.asarray(u, dtype=float).copy()
    res = problem.residual(u)
    it = 0
    for it in range(1, maxiter + 1):
        new = lu.solve(problem.source(u) + k * u)
        change = new - u
        if direction < 0 and np.any(change > slack * (1.0 + np.abs(u))):
            raise MonotonicityError(f"descending sweep increased by {np.max(change):.3e} at iteration {it}")
        if direction > 0 and np.any(change < -slack * (1.0 + np.abs(u))):
            raise MonotonicityError(f"ascending sweep decreased by {-np.min(change):.3e} at iteration {it}")
        u = new
        if stop is not None:
            reason = stop(u)
            if reason:
                return u, problem.residual(u), it, reason
        step = float(np.max(np.abs(change)))
        if it % 10 == 0 or step < 1e-9:
            res = problem.residual(u)
            if res <= tol:
                return u, res, it, "converged"
            if newton and step < 1e-7:
                polished = problem.newton(u, tol)
                if polished is not None and np.all(polished >= -1e-12):
                    return polished, problem.residual(polished), it, "converged (newton polish)"
    raise ConvergenceError(f"monotone iteration stagnated: residual {res:.3e} after {maxiter} sweeps",
                           maxiter, res)


def tail_rate(grid, values, lo=0.75, hi=1.0):
    """Least-squares slope of -log V against |y| over the outer part [lo R, hi R] of the grid."""
    r = grid.r
    mask = (r >= lo * grid.R) & (r <= hi * grid.R) & (values > 1e-290)
    if mask.sum() < 3:
        return float("nan")
    slope = np.polyfit(r[mask], -np.log(values[mask]), 1)[0]
    return float(slope)


def _zero_profile(grid, alpha, kind, origin, note):
    return Profile(np.zeros(grid.size), alpha, kind, 0.0, origin, grid, note=note)


def kpp_subsolution_eps(eig, reaction):
    """Largest dyadic eps <= 1/2 with -lambda eps phi + f(eps phi) - f'(0) eps phi >= 0 everywhere."""
    phi = eig.phi / np.max(eig.phi)
    fp0 = reaction.fprime0
    eps = 0.5
    while eps > 1e-30:
        v = eps * phi
        if np.all(-eig.lam * v + reaction.f(v) - fp0 * v >= 0):
            return eps, phi
        eps *= 0.5
    raise ConvergenceError("no admissible sub-solution amplitude found")


def solve_profile_kpp(alpha, grid, potential, reaction, tol=1e-8, agree=1e-6, maxiter=200_000):
    """Unique positive KPP profile, or the zero profile when lambda_alpha >= 0.

    Runs the monotone iteration downward from 1 and upward from eps * phi;
    both limits must agree to ``agree`` in sup-norm.
    """
    if reaction.kind != KPP:
        raise ConfigError("solve_profile_kpp needs a KPP reaction")
    eig = principal_eigen(grid, potential, alpha, reaction.fprime0)
    if eig.lam >= 0:
        return _zero_profile(grid, alpha, KPP, MONOTONE, f"lambda_alpha = {eig.lam:.6g} >= 0: no positive profile")
    problem = TransverseProblem(grid, ConfinedLinear(alpha, potential), reaction)
    down, res_d, it_d, _ = _iterate(problem, np.ones(grid.size), -1, tol, maxiter)
    eps, phi = kpp_subsolution_eps(eig, reaction)
    sub = eps * phi
    if np.any(sub > down + 1e-12):
        raise MonotonicityError("sub-solution lies above the super-solution limit")
    up, res_u, it_u, _ = _iterate(problem, sub, +1, tol, maxiter)
    gap = float(np.max(np.abs(down - up)))
    if gap > agree:
        raise ConvergenceError(f"upward and downward limits differ by {gap:.3e}")
    prof = Profile(down, alpha, KPP, res_d, MONOTONE, grid, tail_rate(grid, down), it_d)
    prof.diagnostics.update(lambda_alpha=eig.lam, eps=eps, uniqueness_gap=gap, upward_iterations=it_u,
                            upward_residual=res_u)
    return prof


def _descent(problem, start, tol, maxiter, dt, stop_below=None):
    theta = stop_below

    def stop(u):
        if theta is not None and np.max(u) < theta:
            return "sup below theta"
        return None

    return _iterate(problem, start, -1, tol, maxiter, dt=dt, stop=stop)


def solve_profile_bistable_maximal(alpha, grid, potential, reaction, tol=1e-8, maxiter=500_000, dt=None):
    """Maximal profile as the decreasing parabolic limit from z(0) = 1 (zero profile if it collapses).

    Once sup z drops below theta the right-hand side is nonpositive and z
    decays to 0, so the descent stops there and reports the zero profile.
    """
    if reaction.kind != BISTABLE:
        raise ConfigError("bistable maximal profile needs a bistable reaction")
    problem = TransverseProblem(grid, ConfinedLinear(alpha, potential), reaction)
    return _maximal(problem, alpha, tol, maxiter, dt)


def _maximal(problem, alpha, tol, maxiter, dt):
    grid = problem.grid
    u, res, it, reason = _descent(problem, np.ones(grid.size), tol, maxiter, dt, problem.reaction.unstable_zero)
    if reason == "sup below theta" or np.max(u) < ZERO_LEVEL:
        prof = _zero_profile(grid, alpha, BISTABLE, DESCENT, "descent from 1 collapsed to 0")
        prof.iterations = it
        return prof
    prof = Profile(u, alpha, BISTABLE, res, DESCENT, grid, tail_rate(grid, u), it)
    prof.energy = problem.energy(u).value
    return prof


def energy(w, alpha, grid, potential, reaction):
    """J(w) = int 1/2 |grad w|^2 + alpha/2 g w^2 - F(w) by grid quadrature."""
    return TransverseProblem(grid, ConfinedLinear(alpha, potential), reaction).energy(np.asarray(w, float))


def bump(grid, radius, height=1.0):
    """Plateau of given height on |y| <= radius with a unit-width linear ramp."""
    return height * np.clip(radius + 1.0 - grid.r, 0.0, 1.0)


def _seed_values(grid, seed):
    if isinstance(seed, str):
        if seed == "one":
            return np.ones(grid.size)
        if seed == "zero":
            return np.zeros(grid.size)
        if seed == "bump":
            return bump(grid, max(grid.R / 4.0, 1.0))
        raise ConfigError(f"unknown seed {seed!r}")
    if np.isscalar(seed):
        return np.full(grid.size, float(seed))
    return np.asarray(seed, dtype=float).copy()


def _flow(problem, start, tol, maxiter, dt=None):
    """Energy-decreasing semi-implicit gradient flow to a critical point."""
    k, lu = problem.sweeper(dt)
    u = start
    res = problem.residual(u)
    for it in range(1, maxiter + 1):
        new = lu.solve(problem.source(u) + k * u)
        step = float(np.max(np.abs(new - u)))
        u = new
        if it % 10 == 0 or step < 1e-9:
            res = problem.residual(u)
            if res <= tol:
                return u, res, it
            if step < 1e-7:
                polished = problem.newton(u, tol)
                if polished is not None:
                    return polished, problem.residual(polished), it
        if not np.all(np.isfinite(u)):
            raise ConvergenceError("gradient flow diverged", it, res)
    raise ConvergenceError(f"gradient flow did not settle: residual {res:.3e}", maxiter, res)


def minimize_energy(alpha, grid, potential, reaction, seed="bump", tol=1e-8, maxiter=500_000, maximal=None):
    """Gradient flow of J_alpha from ``seed`` ("one", "bump", "zero" or an array).

    Flags whether the limit coincides with the maximal solution within 1e-5.
    """
    if reaction.kind != BISTABLE:
        raise ConfigError("energy minimization is set up for bistable reactions")
    problem = TransverseProblem(grid, ConfinedLinear(alpha, potential), reaction)
    return _minimize(problem, alpha, seed, tol, maxiter, maximal)


def _minimize(problem, alpha, seed, tol, maxiter, maximal=None):
    grid = problem.grid
    start = _seed_values(grid, seed)
    u, res, it = _flow(problem, start, tol, maxiter)
    u = np.where(np.abs(u) < 1e-300, 0.0, u)
    prof = Profile(u, alpha, problem.reaction.kind, res, MINIMIZER, grid, tail_rate(grid, u), it)
    prof.energy = problem.energy(u).value
    if maximal is None:
        maximal = _maximal(problem, alpha, tol, maxiter, None)
    prof.diagnostics["matches_maximal"] = bool(np.max(np.abs(u - maximal.values)) <= 1e-5)
    prof.diagnostics["maximal_energy"] = maximal.energy if maximal.energy is not None else 0.0
    return prof


def min_energy(problem, alpha, tol=1e-8, maxiter=500_000, seeds=("one", "bump")):
    """Lowest energy among gradient-flow limits from several seeds."""
    maximal = _maximal(problem, alpha, tol, maxiter, None)
    best = None
    for seed in seeds:
        prof = _minimize(problem, alpha, seed, tol, maxiter, maximal)
        if best is None or prof.energy < best.energy:
            best = prof
    return best


def _bisect(pred, lo, hi, width):
    """Largest parameter where ``pred`` holds, assuming it holds on (0, p] only."""
    if not pred(lo):
        raise ConvergenceError(f"predicate fails at the lower end {lo}")
    while pred(hi):
        lo, hi = hi, 2.0 * hi
        if hi > 1e8:
            raise ConvergenceError("predicate holds up to 1e8; no threshold")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return lo, hi


@dataclass
class BistableThresholds:
    alpha_lower: float  # alpha_*: energy minimum negative below it
    alpha_upper: float  # alpha^*: maximal profile exists up to it
    lower_bracket: tuple[float, float]
    upper_bracket: tuple[float, float]


def bistable_thresholds(grid, potential, reaction, alpha_lo=1e-3, alpha_hi=1.0, width=1e-3, tol=1e-8):
    """Bisection estimates of alpha_* (min J < 0) and alpha^* (maximal profile nonzero)."""
    if reaction.kind != BISTABLE:
        raise ConfigError("bistable thresholds need a bistable reaction")

    def problem(a):
        return TransverseProblem(grid, ConfinedLinear(a, potential), reaction)

    def exists(a):
        return not _maximal(problem(a), a, tol, 500_000, None).is_zero

    def negative(a):
        return min_energy(problem(a), a, tol).energy < 0.0

    up = _bisect(exists, alpha_lo, alpha_hi, width)
    low = _bisect(negative, alpha_lo, up[1], width)
    return BistableThresholds(0.5 * sum(low), 0.5 * sum(up), low, up)


def profile_stability(profile, potential, reaction):
    """Principal eigenvalue of the linearization about a confined-linear profile."""
    het = ConfinedLinear(profile.alpha, potential)
    return linearized_stability(profile.values, profile.grid, reaction, het)


def isolation_gap(problem, maximal, tol=1e-8, maxiter=200_000, depth=40):
    """Sup-norm distance from the maximal profile to the intermediate critical point.

    Flows started from s * V go to V for s near 1 and to 0 for small s;
    bisecting on s tracks the separating (unstable) solution, which is then
    Newton-polished.  Returns ``(gap, W)`` or ``(nan, None)`` if no
    intermediate solution is located.
    """
    V = maximal.values
    theta = problem.reaction.unstable_zero
    k, lu = problem.sweeper()

    def fate(s, steps=20_000):
        u = s * V
        best, best_res = u, math.inf
        for _ in range(steps):
            u = lu.solve(problem.source(u) + k * u)
            r = problem.residual(u)
            if r < best_res:
                best, best_res = u.copy(), r
            if np.max(u) < theta:
                return -1, best
            if np.max(np.abs(u - V)) < 1e-4:
                return +1, best
        return 0, best

    lo, hi = 0.0, 1.0
    candidate = None
    for _ in range(depth):
        mid = 0.5 * (lo + hi)
        outcome, best = fate(mid)
        candidate = best
        if outcome > 0:
            hi = mid
        elif outcome < 0:
            lo = mid
        else:
            break
    W = problem.newton(candidate, tol)
    if W is None or np.max(W) < ZERO_LEVEL or np.max(np.abs(W - V)) < 1e-6:
        return float("nan"), None
    return float(np.max(np.abs(V - W))), W
