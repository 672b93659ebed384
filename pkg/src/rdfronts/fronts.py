"""Traveling fronts through the finite-slab problem.

On the slab (-a, a) x (transverse domain) the front equation reads

    -u_11 - c u_1 - Laplacian_y u = h(y, u),   u(-a, y) = V(y),  u(a, y) = 0.

For fixed c it is solved by shifted monotone sweeps from the super-solution
V (or from any solution at a smaller speed, which is also a
super-solution because fronts decrease in x1).  The speed is then picked
by bisection on a normalization at x1 = 0.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .discretize import Factorized, KroneckerSolver, assemble_slab
from .exceptions import BracketError, ConvergenceError, MonotonicityError
from .geometry import Potential, SlabGrid, make_slab
from .nonlinearity import BISTABLE, ConfinedLinear

log = logging.getLogger(__name__)

POINT = "point"  # u(0, 0) = theta
MAX = "max"  # max_y u(0, y) = theta


@dataclass
class FrontSolution:
    u: np.ndarray = field(repr=False)  # interior x1 nodes x transverse unknowns
    c: float
    a: float
    slab: SlabGrid = field(repr=False)
    left: np.ndarray = field(repr=False)
    right: np.ndarray = field(repr=False)
    residual: float
    iterations: int = 0
    normalization: str = POINT
    theta: float = float("nan")
    value: float = float("nan")
    monotone_x1: bool = True
    bracket: tuple[float, float] | None = None
    history: list = field(default_factory=list, repr=False)
    diagnostics_step: float = 0.0  # size of the last Newton correction in c
    decisions: list = field(default_factory=list, repr=False)  # (c, sign of value - theta)

    def full(self):
        """Solution on all x1 nodes, Dirichlet faces included."""
        out = np.empty((self.slab.nx, self.u.shape[1]))
        out[0] = self.left
        out[-1] = self.right
        out[1:-1] = self.u
        return out

    def slice_at(self, x):
        """Transverse slice u(x, .) by linear interpolation in x1."""
        full = self.full()
        xs = self.slab.x
        return np.array([np.interp(x, xs, full[:, j]) for j in range(full.shape[1])])

    def max_dx(self):
        """Largest forward difference along x1 (<= 0 for a monotone front)."""
        return float(np.max(np.diff(self.full(), axis=0)))


@dataclass
class SpeedCurve:
    points: list  # (a, c_a)
    c_inf: float
    uncertainty: float
    fronts: list = field(default_factory=list, repr=False)
    left_error: float = float("nan")
    right_error: float = float("nan")

    @property
    def a(self):
        return [p[0] for p in self.points]

    @property
    def speeds(self):
        return [p[1] for p in self.points]


def aitken(seq):
    """Aitken delta-squared limit of the last three terms (last term if degenerate)."""
    if len(seq) < 3:
        return seq[-1], (abs(seq[-1] - seq[-2]) if len(seq) > 1 else float("nan"))
    x0, x1, x2 = seq[-3:]
    denom = (x2 - x1) - (x1 - x0)
    if abs(denom) < 1e-14 or (x2 - x1) * (x1 - x0) <= 0:
        return x2, abs(x2 - x1)
    lim = x2 - (x2 - x1) ** 2 / denom
    return lim, abs(lim - x2)


class SlabSolver:
    """Fixed-c slab solves for one slab, heterogeneity, reaction and left state V."""

    def __init__(self, slab, heterogeneity, reaction, V, right=0.0):
        self.slab = slab
        self.het = heterogeneity
        self.reaction = reaction
        r = slab.r
        self.weight = np.asarray(heterogeneity.weight(r), float)
        self.absorption = np.asarray(heterogeneity.absorption(r), float)
        self.K = max(reaction.lipschitz * float(np.max(self.weight)), 1e-12)
        self.V = np.broadcast_to(np.asarray(V, float), (slab.ny,)).copy()
        self.right = np.broadcast_to(np.asarray(right, float), (slab.ny,)).copy()
        self._ops = {}

    def _operator(self, c):
        if c not in self._ops:
            op = assemble_slab(self.slab, c=c, coefficient=self.absorption, shift=self.K)
            solver = Factorized(op) if self.slab.ny == 1 else KroneckerSolver(op)
            if len(self._ops) > 4:
                self._ops.pop(next(iter(self._ops)))
            self._ops[c] = (op, solver)
        return self._ops[c]

    def _source(self, u2):
        return (self.weight[None, :] * self.reaction.f(u2)).ravel()

    def residual(self, op, u, bc):
        u2 = u.reshape(op.shape2d)
        res = op.matrix @ u - self.K * u - self._source(u2) - bc
        return float(np.max(np.abs(res)))

    def _newton(self, op, u, bc, tol, maxiter=20):
        n = u.size
        nx, ny = op.shape2d
        A0 = op.matrix - self.K * sp.identity(n, format="csr")
        res = self.residual(op, u, bc)
        for _ in range(maxiter):
            if res <= tol:
                return u, res
            u2 = u.reshape(nx, ny)
            F = A0 @ u - self._source(u2) - bc
            J = A0 - sp.diags((self.weight[None, :] * self.reaction.df(u2)).ravel())
            try:
                du = spla.splu(sp.csc_matrix(J)).solve(F)
            except RuntimeError:
                return None, res
            step = 1.0
            while step > 1e-3:
                cand = u - step * du
                rc = self.residual(op, cand, bc)
                if rc < res:
                    break
                step *= 0.5
            else:
                return None, res
            u, res = cand, rc
        return (u, res) if res <= tol else (None, res)

    def _sweep(self, c, u, bc):
        op, lin = self._operator(c)
        return lin.solve(self._source(u.reshape(op.shape2d)) + self.K * u + bc)

    def decide(self, c, upper, lower, theta, normalization, budget, meet=1e-9):
        """Sign of (normalization value - theta) at speed c from monotone bounds.

        ``upper`` must be a super-solution at c (the solution at a smaller
        speed) and ``lower`` a sub-solution (the solution at a larger speed).
        Returns ``(sign, state, value)``; sign 0 means undecided within
        ``budget`` sweeps, with ``state`` the bound closer to ``theta``.
        """
        op, _ = self._operator(c)
        bc = op.boundary_rhs(self.V, self.right)
        shape = op.shape2d
        u = np.asarray(upper, float).ravel().copy()
        w = np.asarray(lower, float).ravel().copy()
        vu = vw = float("nan")
        for _ in range(budget):
            nu = self._sweep(c, u, bc)
            nw = self._sweep(c, w, bc)
            if np.any(nu > u + 1e-12 * (1 + np.abs(u))) or np.any(nw < w - 1e-12 * (1 + np.abs(w))):
                raise MonotonicityError(f"bounding sweeps lost monotonicity at c={c}")
            u, w = nu, nw
            vu = _norm_value(self.slab, u.reshape(shape), normalization)
            vw = _norm_value(self.slab, w.reshape(shape), normalization)
            if vu < theta:
                return -1, u.reshape(shape), vu
            if vw > theta:
                return +1, w.reshape(shape), vw
            if np.max(u - w) < meet:
                break
        if abs(vu - theta) <= abs(vw - theta):
            return 0, u.reshape(shape), vu
        return 0, w.reshape(shape), vw

    def recenter(self, u2, theta, normalization):
        """Translate a front in x1 so that its normalization level sits at x1 = 0."""
        x = self.slab.x[1:-1]
        trace = u2[:, self.slab.y_center_index] if normalization == POINT else np.max(u2, axis=1)
        above = np.nonzero(trace >= theta)[0]
        if above.size == 0 or above[-1] + 1 >= x.size:
            return u2
        i = above[-1]
        t = (trace[i] - theta) / (trace[i] - trace[i + 1])
        shift = x[i] + t * (x[i + 1] - x[i])
        out = np.empty_like(u2)
        for j in range(u2.shape[1]):
            out[:, j] = np.interp(x + shift, x, u2[:, j], left=self.V[j], right=self.right[j])
        return out

    def solve_normalized(self, start, c, theta, normalization, tol=1e-8, maxiter=60):
        """Newton's method for (u, c) with the normalization as the extra equation."""
        slab = self.slab
        nx, ny = slab.shape
        u = self.recenter(np.asarray(start, float).reshape(nx, ny), theta, normalization).ravel()
        n = u.size
        c = float(c)

        def system(u, c):
            op, _ = self._operator(c)
            bc = op.boundary_rhs(self.V, self.right)
            F = op.matrix @ u - self.K * u - self._source(u.reshape(nx, ny)) - bc
            return op, F

        eps = 1e-6
        res = math.inf
        for _ in range(maxiter):
            op, F = system(u, c)
            k = _norm_index(slab, u.reshape(nx, ny), normalization)
            g = u[k] - theta
            res = float(np.max(np.abs(F)))
            _, Fp = system(u, c + eps)
            _, Fm = system(u, c - eps)
            dFdc = (Fp - Fm) / (2.0 * eps)
            J = op.matrix - self.K * sp.identity(n, format="csr") - \
                sp.diags((self.weight[None, :] * self.reaction.df(u.reshape(nx, ny))).ravel())
            row = sp.csr_matrix(([1.0], ([0], [k])), shape=(1, n))
            M = sp.bmat([[J, sp.csr_matrix(dFdc[:, None])], [row, None]], format="csc")
            try:
                d = spla.splu(M).solve(np.concatenate([F, [g]]))
            except RuntimeError as exc:
                raise ConvergenceError(f"bordered Newton system singular: {exc}") from exc
            last = abs(d[n])
            if res <= tol and abs(g) <= 1e-10 and last <= 1e-7:
                break
            merit = math.hypot(np.linalg.norm(F), abs(g))
            step = 1.0
            while step > 1e-6:
                cu, cc = u - step * d[:n], c - step * d[n]
                _, Fc = system(cu, cc)
                kc = _norm_index(slab, cu.reshape(nx, ny), normalization)
                if math.hypot(np.linalg.norm(Fc), abs(cu[kc] - theta)) < merit:
                    break
                step *= 0.5
            else:
                raise ConvergenceError(f"bordered Newton line search failed (residual {res:.3e}, g {g:.2e}, dc {last:.2e}, c {c:.8f})", None, res)
            for key in (c, c + eps, c - eps):
                self._ops.pop(key, None)
            u, c = cu, cc
        else:
            raise ConvergenceError(f"bordered Newton did not converge (residual {res:.3e})", maxiter, res)
        u2 = u.reshape(nx, ny)
        sol = FrontSolution(u2, c, slab.a, slab, self.V.copy(), self.right.copy(), res)
        sol.diagnostics_step = last
        sol.monotone_x1 = sol.max_dx() <= 1e-10
        if np.min(u2) < -1e-10 or np.any(u2 > self.V[None, :] + 1e-8):
            raise MonotonicityError(f"normalized front leaves [0, V] (min {np.min(u2):.3e})")
        return sol

    def solve(self, c, start=None, left=None, right=None, super_start=True, tol=1e-8, maxiter=200_000,
              newton_switch=1e-5):
        """Slab solution at speed c.

        ``start`` defaults to V(y) in every column.  With ``super_start``
        the sweeps must be nonincreasing at every node; otherwise the
        start is any state between 0 and V and only the limit is checked.
        """
        slab = self.slab
        left = self.V if left is None else np.broadcast_to(np.asarray(left, float), (slab.ny,))
        right = self.right if right is None else np.broadcast_to(np.asarray(right, float), (slab.ny,))
        op, lin = self._operator(c)
        bc = op.boundary_rhs(left, right)
        nx, ny = op.shape2d
        u = np.tile(self.V, nx) if start is None else np.asarray(start, float).ravel().copy()
        K = self.K
        slack = 1e-12
        res = self.residual(op, u, bc)
        it = 0
        next_newton = 0
        for it in range(1, maxiter + 1):
            new = lin.solve(self._source(u.reshape(nx, ny)) + K * u + bc)
            change = new - u
            if super_start and np.any(change > slack * (1.0 + np.abs(u))):
                raise MonotonicityError(
                    f"slab sweep increased by {np.max(change):.3e} at iteration {it} (c={c})")
            u = new
            step = float(np.max(np.abs(change)))
            if it % 20 == 0 or step < 1e-10:
                res = self.residual(op, u, bc)
                if res <= tol:
                    break
            if step < newton_switch and it >= next_newton:
                polished, res_n = self._newton(op, u, bc, tol)
                if polished is not None and np.all(polished >= -1e-12) and \
                        np.all(polished.reshape(nx, ny) <= self.V[None, :] + 1e-9):
                    u, res = polished, res_n
                    break
                next_newton = it + 50
        else:
            raise ConvergenceError(f"slab sweeps stagnated at c={c}: residual {res:.3e}", maxiter, res)
        u2 = u.reshape(nx, ny)
        sol = FrontSolution(u2, float(c), slab.a, slab, np.array(left, float), np.array(right, float), res, it)
        sol.monotone_x1 = sol.max_dx() <= 1e-10
        if np.min(u2) < -1e-12:
            raise MonotonicityError(f"slab solution negative ({np.min(u2):.3e}) at c={c}")
        if np.any(u2 > self.V[None, :] + 1e-8):
            raise MonotonicityError(f"slab solution exceeds V at c={c}")
        return sol


def normalization_value(sol, normalization):
    return _norm_value(sol.slab, sol.u, normalization)


def _norm_value(slab, u2, normalization):
    i0 = slab.center_index
    if i0 is None:
        raise ConvergenceError("x1 = 0 must be a grid node for the normalization")
    row = u2[i0]
    if normalization == POINT:
        return float(row[slab.y_center_index])
    return float(np.max(row))


def _norm_index(slab, u2, normalization):
    """Flat index of the node carrying the normalization value."""
    i0 = slab.center_index
    j = slab.y_center_index if normalization == POINT else int(np.argmax(u2[i0]))
    return i0 * u2.shape[1] + j


def find_speed(solver, theta, bracket, normalization=POINT, width=1e-6, warm=None, max_expand=8,
               coarse=1e-3, budget=None):
    """Speed c_a at which the slab solution meets the normalization value ``theta``.

    The map c -> normalization value is decreasing.  Bisection narrows the
    speed bracket to ``coarse``: at each trial speed two monotone sweep
    sequences run, one down from the solution at the lower end (a
    super-solution) and one up from the solution at the upper end (a
    sub-solution), until one of them crosses ``theta`` and so fixes the
    sign.  The speed is then resolved to ``width`` by Newton's method on
    the pair (u, c) with the normalization as extra equation, which stays
    well conditioned where fixed-c sweeps slow down.
    """
    lo, hi = map(float, bracket)
    history = []

    def run(c, start, super_start):
        sol = solver.solve(c, start=start, super_start=super_start)
        sol.value = normalization_value(sol, normalization)
        sol.normalization = normalization
        sol.theta = theta
        history.append((c, sol.value))
        return sol

    sol_lo = run(lo, warm, warm is None)
    span = hi - lo
    n = 0
    while sol_lo.value <= theta:
        n += 1
        if n > max_expand:
            raise BracketError(f"normalization value {sol_lo.value:.6g} <= theta at c={lo}; slab too short?",
                               lo, hi)
        hi, lo = lo, lo - span
        sol_lo = run(lo, None, True)
    sol_hi = run(hi, sol_lo.u, True)
    n = 0
    while sol_hi.value >= theta:
        n += 1
        if n > max_expand:
            raise BracketError(f"normalization value {sol_hi.value:.6g} >= theta at c={hi}", lo, hi)
        lo, sol_lo = hi, sol_hi
        hi = hi + span
        sol_hi = run(hi, sol_lo.u, True)
    guess = None
    decisions = []
    if budget is None:
        budget = 20_000 if solver.slab.ny == 1 else 2_000
    while hi - lo > coarse:
        mid = 0.5 * (lo + hi)
        sign, state, value = solver.decide(mid, sol_lo.u, sol_hi.u, theta, normalization, budget)
        decisions.append((mid, sign))
        guess = (mid, state)
        if sign > 0:
            lo = mid
        elif sign < 0:
            hi = mid
        else:
            break
    if guess is None:
        guess = (0.5 * (lo + hi), sol_lo.u)
    sol = solver.solve_normalized(guess[1], guess[0], theta, normalization)
    sol.value = normalization_value(sol, normalization)
    sol.normalization = normalization
    sol.theta = theta
    if not lo - coarse <= sol.c <= hi + coarse:
        raise BracketError(f"Newton speed {sol.c:.8g} left the bisection bracket [{lo:.8g}, {hi:.8g}]", lo, hi)
    half = max(sol.diagnostics_step, 1e-15)
    if 2.0 * half > width:
        raise ConvergenceError(f"speed resolved only to {2 * half:.2e} (target {width:.1e})")
    history.append((sol.c, sol.value))
    vals = [v for _, v in sorted(history)]
    if any(b > a + 1e-9 for a, b in zip(vals, vals[1:])):
        raise MonotonicityError("normalization value is not decreasing in c")
    above = [c for c, sg in decisions if sg > 0]
    below = [c for c, sg in decisions if sg < 0]
    if above and below and max(above) >= min(below):
        raise MonotonicityError("bisection decisions are not ordered in c")
    sol.bracket = (sol.c - half, sol.c + half)
    sol.history = history
    sol.decisions = decisions
    return sol


def extend_front(sol, slab, V):
    """Interpolate a front onto a (larger) slab, with V to the left and 0 to the right."""
    full = sol.full()
    x_old = sol.slab.x
    x_new = slab.x[1:-1]
    out = np.empty((x_new.size, full.shape[1]))
    for j in range(full.shape[1]):
        out[:, j] = np.interp(x_new, x_old, full[:, j], left=V[j], right=0.0)
    return np.minimum(out, V[None, :])


def continue_speed(a_list, hx, transverse, heterogeneity, reaction, V, theta, bracket, normalization=POINT,
                   width=1e-6, window=0.05):
    """Speeds c_a along increasing slab half-lengths, with Aitken extrapolation.

    Each new a is warm-started from the previous front and searched in a
    narrow bracket around the previous speed (widened when needed).
    """
    a_list = [float(a) for a in a_list]
    if a_list != sorted(a_list):
        raise ValueError("a_list must be increasing")
    V = np.asarray(V, float)
    points, fronts = [], []
    prev = None
    for a in a_list:
        slab = make_slab(a, hx, transverse)
        solver = SlabSolver(slab, heterogeneity, reaction, V)
        if prev is None:
            sol = find_speed(solver, theta, bracket, normalization, width)
        else:
            warm = extend_front(prev, slab, V)
            local = (max(bracket[0], prev.c - window), min(bracket[1], prev.c + window))
            try:
                sol = find_speed(solver, theta, local, normalization, width, warm=warm, max_expand=0)
            except BracketError:
                sol = find_speed(solver, theta, bracket, normalization, width)
        log.info("a=%g: c_a=%.8f (residual %.2e)", a, sol.c, sol.residual)
        points.append((a, sol.c))
        fronts.append(sol)
        prev = sol
    c_inf, unc = aitken([c for _, c in points])
    last = fronts[-1]
    full = last.full()
    quarter = max(1, last.slab.nx // 4)
    left_err = float(np.max(np.abs(full[:quarter] - V[None, :])))
    right_err = float(np.max(np.abs(full[-quarter:])))
    return SpeedCurve(points, c_inf, unc, fronts, left_err, right_err)


def kpp_speed_bracket(lam):
    """A-priori speed bracket [-1, 2 sqrt(-lambda) + 1] for KPP slabs."""
    return (-1.0, 2.0 * math.sqrt(-lam) + 1.0)


def supercritical_front(c, c_inf, star, a, theta, heterogeneity, reaction, V, normalization=POINT, width=1e-6,
                        r_span=None):
    """Front of speed c > c_inf on (-a, a) with translated boundary data from ``star``.

    ``star`` is a converged minimal-speed front (on a slab at least as long);
    the shift r is bisected so that the normalization value hits ``theta``.
    """
    if not c > c_inf:
        raise BracketError(f"supercritical front needs c > c_inf = {c_inf:.6g} (got {c})", c_inf, c)
    V = np.asarray(V, float)
    slab = make_slab(a, star.slab.hx, star.slab.transverse)
    solver = SlabSolver(slab, heterogeneity, reaction, V)
    full = star.full()
    xs = star.slab.x

    def shifted(x):
        return np.array([np.interp(x, xs, full[:, j], left=V[j], right=0.0) for j in range(full.shape[1])])

    def run(r):
        x_in = slab.x[1:-1] + r
        start = np.stack([shifted(x) for x in x_in])
        sol = solver.solve(c, start=np.minimum(start, V[None, :]), left=shifted(-a + r), right=shifted(a + r))
        sol.value = normalization_value(sol, normalization)
        sol.normalization = normalization
        sol.theta = theta
        return sol

    span = r_span if r_span is not None else 0.5 * star.slab.a
    lo, hi = -span, span
    s_lo, s_hi = run(lo), run(hi)
    if not (s_lo.value > theta > s_hi.value):
        raise BracketError(f"shift bracket [{lo}, {hi}] gives values {s_lo.value:.4g}, {s_hi.value:.4g}", lo, hi)
    history = [(lo, s_lo.value), (hi, s_hi.value)]
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        s = run(mid)
        history.append((mid, s.value))
        if s.value > theta:
            lo, s_lo = mid, s
        else:
            hi, s_hi = mid, s
    best = s_lo if abs(s_lo.value - theta) <= abs(s_hi.value - theta) else s_hi
    best.bracket = (lo, hi)
    best.history = history
    return best


def one_d_bistable_speed(a, reaction, hx=0.05, width=1e-7):
    """Normalized speed gamma_a and profile z of the 1D slab problem z(-a)=1, z(0)=theta, z(a)=0."""
    if reaction.kind != BISTABLE:
        raise ValueError("one_d_bistable_speed needs a bistable reaction")
    slab = make_slab(a, hx, None)
    het = ConfinedLinear(0.0, Potential.quadratic())
    solver = SlabSolver(slab, het, reaction, 1.0)
    bound = 2.0 * math.sqrt(reaction.lipschitz) + 1.0
    sol = find_speed(solver, reaction.unstable_zero, (-bound, bound), MAX, width)
    return sol.c, sol


def bistable_speed_bracket(gamma):
    """Bracket [-gamma - 1, gamma + 1] from the 1D comparison speed."""
    return (-abs(gamma) - 1.0, abs(gamma) + 1.0)
