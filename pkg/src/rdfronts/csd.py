"""Cortical spreading depression model: bistable core |y| <= L1, linear absorption beyond L2.

h(y, s) = w(y) f(s) - (1 - w(y)) m s with a linear or cosine transition of
w between L1 and L2.  Profiles, energies, the critical radii and the
traveling fronts reuse the confined-model machinery with this
heterogeneity.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache, partial

import numpy as np

from .exceptions import ConfigError, MonotonicityError, SolverError
from .fronts import MAX, SlabSolver, bistable_speed_bracket, find_speed, one_d_bistable_speed
from .geometry import make_slab, make_transverse
from .nonlinearity import BISTABLE, CSD, comparison_reaction
from .profiles import TransverseProblem, _maximal, min_energy

log = logging.getLogger(__name__)

NO_PROFILE = "no-profile"
PROFILE_NO_FRONT = "profile-no-front"
PROPAGATING = "propagating"
_ORDER = {NO_PROFILE: 0, PROFILE_NO_FRONT: 1, PROPAGATING: 2}

TIE = "tie"
RATIO = "ratio"


@dataclass
class CsdReport:
    L1: float
    L2: float
    m: float
    classification: str
    profile: object = field(default=None, repr=False)
    speed: float | None = None
    energy_min: float | None = None
    error: str | None = None

    def __post_init__(self):
        if self.classification not in _ORDER:
            raise ConfigError(f"unknown classification {self.classification!r}")
        if self.classification == NO_PROFILE and self.speed is not None:
            raise ConfigError("a report without profile cannot carry a front speed")


def csd_grid(L2, m, hy=0.05, margin=10.0):
    """Symmetric transverse grid reaching ``margin`` absorption lengths past L2."""
    R = L2 + margin / math.sqrt(m)
    n = int(math.ceil(R / hy)) + 1
    return make_transverse("radial-1", (n - 1) * hy, n)


def _check_reaction(reaction):
    if reaction.kind != BISTABLE:
        raise ConfigError("the CSD model needs a bistable reaction")


def csd_problem(L1, L2, m, reaction, grid, transition="linear"):
    return TransverseProblem(grid, CSD(L1, L2, m, transition), reaction)


def csd_profile(L1, L2, m, reaction, grid=None, transition="linear", tol=1e-8, maxiter=500_000):
    """Maximal CSD profile by parabolic descent from 1 (zero profile when it collapses)."""
    _check_reaction(reaction)
    grid = grid or csd_grid(L2, m)
    return _maximal(csd_problem(L1, L2, m, reaction, grid, transition), float("nan"), tol, maxiter, None)


def csd_energy(w, L1, L2, m, reaction, grid, transition="linear"):
    """J(w) = int 1/2 |grad w|^2 - H(y, w) by grid quadrature."""
    return csd_problem(L1, L2, m, reaction, grid, transition).energy(np.asarray(w, float))


def csd_min_energy(L1, L2, m, reaction, grid=None, transition="linear"):
    grid = grid or csd_grid(L2, m)
    return min_energy(csd_problem(L1, L2, m, reaction, grid, transition), float("nan"))


def _radii(L, mode, ratio):
    return (L, L) if mode == TIE else (L, ratio * L)


def csd_thresholds(m, reaction, mode=TIE, ratio=1.5, lo=0.05, hi=10.0, width=1e-2, hy=0.05,
                   transition="linear"):
    """Estimates (L_*, L^*) by bisection in L1 (L2 tied to L1 or a fixed multiple of it).

    L_* is the edge of profile existence, L^* the edge of existence with a
    negative energy minimum.  Both are returned as bracket midpoints.
    """
    _check_reaction(reaction)
    if mode not in (TIE, RATIO):
        raise ConfigError("mode must be 'tie' or 'ratio'")
    if mode == RATIO and ratio < 1:
        raise ConfigError("ratio L2/L1 must be >= 1")

    def exists(L):
        L1, L2 = _radii(L, mode, ratio)
        return not csd_profile(L1, L2, m, reaction, csd_grid(L2, m, hy), transition).is_zero

    def negative(L):
        L1, L2 = _radii(L, mode, ratio)
        if not exists(L):
            return False
        return csd_min_energy(L1, L2, m, reaction, csd_grid(L2, m, hy), transition).energy < 0.0

    def edge(pred):
        a, b = lo, hi
        if pred(a):
            raise SolverError(f"predicate already holds at the lower end L={a}")
        if not pred(b):
            raise SolverError(f"predicate fails at the upper end L={b}")
        while b - a > width:
            mid = 0.5 * (a + b)
            if pred(mid):
                b = mid
            else:
                a = mid
        return a, b

    low = edge(exists)
    up = edge(negative)
    L_low, L_up = 0.5 * sum(low), 0.5 * sum(up)
    if L_low > L_up + width:
        raise MonotonicityError(f"L_* = {L_low:.4g} exceeds L^* = {L_up:.4g}")
    return L_low, L_up


@lru_cache(maxsize=16)
def comparison_speed(reaction, m, a, hx=0.05):
    """gamma_a of the 1D comparison reaction max(f(s), -m s)."""
    return one_d_bistable_speed(a, comparison_reaction(reaction, m), hx)[0]


def csd_front(L1, L2, m, reaction, a=20.0, hx=0.2, hy=0.2, profile=None, transition="linear", width=1e-6):
    """Normalized CSD front (max_y u(0, y) = theta) or None when no profile exists."""
    _check_reaction(reaction)
    grid = csd_grid(L2, m, hy)
    if profile is None or profile.grid != grid:
        profile = csd_profile(L1, L2, m, reaction, grid, transition)
    if profile.is_zero:
        return None
    gamma = comparison_speed(reaction, m, a)
    slab = make_slab(a, hx, grid)
    solver = SlabSolver(slab, CSD(L1, L2, m, transition), reaction, profile.values)
    theta = reaction.unstable_zero
    sol = find_speed(solver, theta, bistable_speed_bracket(gamma), MAX, width)
    if sol.c > gamma + 1e-6:
        raise MonotonicityError(f"CSD speed {sol.c:.6g} exceeds the 1D comparison speed {gamma:.6g}")
    sol.comparison_speed = gamma
    return sol


def _phase_point(L1, L2, m, reaction, a, hx, hy, transition):
    try:
        prof = csd_profile(L1, L2, m, reaction, csd_grid(L2, m, hy), transition)
        if prof.is_zero:
            return CsdReport(L1, L2, m, NO_PROFILE, prof)
        emin = csd_min_energy(L1, L2, m, reaction, prof.grid, transition).energy
        front = csd_front(L1, L2, m, reaction, a, hx, hy, prof, transition)
        c = float(front.c)
        cls = PROPAGATING if c > 1e-6 else PROFILE_NO_FRONT
        return CsdReport(L1, L2, m, cls, prof, c, emin)
    except SolverError as exc:
        # profile exists but the speed search failed: no normalized front found
        log.warning("CSD point L1=%g L2=%g: %s", L1, L2, exc)
        cls = NO_PROFILE if "prof" not in locals() or prof.is_zero else PROFILE_NO_FRONT
        return CsdReport(L1, L2, m, cls, None, None, None, str(exc))


def l2_rule(rule):
    """L2 as a function of L1: "tie", a ratio (float), or a callable."""
    if callable(rule):
        return rule
    if rule == TIE:
        return lambda L1: L1
    try:
        ratio = float(rule)
    except (TypeError, ValueError):
        raise ConfigError(f"bad L2 rule {rule!r}") from None
    return lambda L1: ratio * L1


def csd_phase_diagram(L1_list, rule, m, reaction, a=20.0, hx=0.2, hy=0.2, transition="linear", workers=1):
    """Classification of each L1 (with L2 from ``rule``); per-point failures are recorded, not raised."""
    _check_reaction(reaction)
    L1s = [float(L) for L in L1_list]
    L2_of = l2_rule(rule)
    pairs = [(L1, float(L2_of(L1))) for L1 in L1s]
    job = partial(_phase_point, m=m, reaction=reaction, a=a, hx=hx, hy=hy, transition=transition)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(job, *zip(*pairs)))
    else:
        reports = [job(L1, L2) for L1, L2 in pairs]
    return reports


def classifications_monotone(reports):
    """True when classifications never step back along increasing L1."""
    ordered = sorted(reports, key=lambda r: r.L1)
    ranks = [_ORDER[r.classification] for r in ordered]
    return all(b >= a for a, b in zip(ranks, ranks[1:]))
