"""Sparse finite-difference operators and the linear-solve contract.

Transverse operators use the conservative form r^(1-d) d/dr (r^(d-1) d/dr)
on radial grids, which makes ``W A`` symmetric for the quadrature weights
``W`` of the grid.  Slab operators are Kronecker sums of an x1 stencil and a
transverse operator; :class:`KroneckerSolver` exploits that structure for the
repeated solves of the monotone and time-stepping schemes.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .exceptions import LinearSolveError

log = logging.getLogger(__name__)

CENTRAL = "central"
UPWIND = "upwind"


@dataclass
class SparseOperator:
    """A discretized linear operator acting on the unknown nodes.

    ``symmetric`` means self-adjoint for the weighted inner product defined
    by ``weights`` (plain symmetry when the weights are uniform).  Slab
    operators carry the x1 stencil couplings to the Dirichlet faces so that
    boundary data can be moved to the right-hand side.
    """

    matrix: sp.csr_matrix
    symmetric: bool
    weights: np.ndarray
    notes: str = ""
    scheme: str = CENTRAL
    shape2d: tuple[int, int] | None = None
    left_coupling: float = 0.0
    right_coupling: float = 0.0
    x_bands: tuple[np.ndarray, np.ndarray, np.ndarray] | None = field(default=None, repr=False)
    transverse_matrix: np.ndarray | None = field(default=None, repr=False)
    transverse_weights: np.ndarray | None = field(default=None, repr=False)

    @property
    def dimension(self):
        return self.matrix.shape[0]

    def triplets(self):
        coo = self.matrix.tocoo()
        return list(zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()))

    def __matmul__(self, v):
        return self.matrix @ v

    def boundary_rhs(self, left, right):
        """Right-hand-side contribution of Dirichlet data on the x1 faces.

        ``left`` and ``right`` are transverse arrays (or scalars).
        """
        nx, ny = self.shape2d
        rhs = np.zeros((nx, ny))
        rhs[0] -= self.left_coupling * np.broadcast_to(left, (ny,))
        rhs[-1] -= self.right_coupling * np.broadcast_to(right, (ny,))
        return rhs.ravel()


def transverse_laplacian(grid):
    """-Laplacian on the unknown nodes of a transverse grid (Dirichlet at |y|=R)."""
    h = grid.hy
    n = grid.size
    if not grid.radial:
        main = np.full(n, 2.0 / h**2)
        off = np.full(n - 1, -1.0 / h**2)
        return sp.diags([off, main, off], [-1, 0, 1], format="csr")
    w = grid.weights
    faces = grid.face_areas  # face i sits between unknown i and node i+1
    right = faces / (h * w)
    left = np.zeros(n)
    left[1:] = faces[:-1] / (h * w[1:])
    main = right + left
    return sp.diags([-left[1:], main, -right[:-1]], [-1, 0, 1], format="csr")


def assemble_transverse(grid, potential=None, alpha=0.0, shift=0.0, coefficient=None):
    """-Laplacian_y + alpha g(y) + coefficient(y) + shift on a transverse grid."""
    diag = np.full(grid.size, float(shift))
    if potential is not None and alpha:
        diag += alpha * potential(grid.r)
    if coefficient is not None:
        diag += np.asarray(coefficient, dtype=float)
    A = (transverse_laplacian(grid) + sp.diags(diag)).tocsr()
    notes = f"-Lap_y + alpha*g + shift on grid {grid.label} (alpha={alpha}, shift={shift})"
    return SparseOperator(A, True, grid.weights.copy(), notes)


def peclet(c, hx):
    return abs(c) * hx / 2.0


def x_stencil(n, hx, c, boundary="dirichlet"):
    """Bands of -d2/dx1^2 - c d/dx1 on ``n`` x1 unknowns.

    Returns ``(lower, diag, upper, left_coupling, right_coupling, scheme)``.
    Central differences are used while the cell Peclet number |c| hx / 2 is
    at most 1, upwind differences otherwise (keeps the M-matrix sign
    pattern).  ``boundary="neumann"`` treats every node as unknown with
    zero-flux ends (no advection allowed).
    """
    h2 = hx * hx
    if boundary == "neumann":
        if c != 0:
            raise ValueError("neumann x1 boundary is only supported without advection")
        diag = np.full(n, 2.0 / h2)
        lower = np.full(n, -1.0 / h2)
        upper = np.full(n, -1.0 / h2)
        upper[0] = -2.0 / h2
        lower[-1] = -2.0 / h2
        lower[0] = upper[-1] = 0.0
        return lower, diag, upper, 0.0, 0.0, CENTRAL
    if peclet(c, hx) <= 1.0:
        lo = -1.0 / h2 + c / (2.0 * hx)
        up = -1.0 / h2 - c / (2.0 * hx)
        dg = 2.0 / h2
        scheme = CENTRAL
    elif c > 0:
        lo, dg, up = -1.0 / h2, 2.0 / h2 + c / hx, -1.0 / h2 - c / hx
        scheme = UPWIND
    else:
        lo, dg, up = -1.0 / h2 + c / hx, 2.0 / h2 - c / hx, -1.0 / h2
        scheme = UPWIND
    lower = np.full(n, lo)
    upper = np.full(n, up)
    diag = np.full(n, dg)
    lower[0] = 0.0
    upper[-1] = 0.0
    return lower, diag, upper, lo, up, scheme


def assemble_slab(slab, potential=None, alpha=0.0, c=0.0, shift=0.0, coefficient=None, x_boundary="dirichlet"):
    """-Laplacian - c d/dx1 + alpha g(y) + coefficient(y) + shift on a slab.

    Unknowns are ordered x1-major: index = i_x * ny + i_y.  With the default
    Dirichlet x1 faces, the interior x1 nodes are unknowns and the face data
    enter through :meth:`SparseOperator.boundary_rhs`.
    """
    tg = slab.transverse
    nxu = slab.nx if x_boundary == "neumann" else slab.nx - 2
    lower, diag, upper, lc, rc, scheme = x_stencil(nxu, slab.hx, c, x_boundary)
    Ax = sp.diags([lower[1:], diag, upper[:-1]], [-1, 0, 1], format="csr")
    if tg is None:
        Ay = sp.csr_matrix(np.array([[float(shift)]]))
        wy = np.ones(1)
        if coefficient is not None:
            Ay = Ay + sp.csr_matrix(np.atleast_2d(np.asarray(coefficient, float).reshape(1)))
    else:
        Ay = assemble_transverse(tg, potential, alpha, shift, coefficient).matrix
        wy = tg.weights
    ny = Ay.shape[0]
    A = (sp.kron(Ax, sp.identity(ny)) + sp.kron(sp.identity(nxu), Ay)).tocsr()
    if x_boundary == "neumann":
        wx = np.full(nxu, slab.hx)
        wx[0] = wx[-1] = slab.hx / 2.0
    else:
        wx = np.full(nxu, slab.hx)
    weights = np.kron(wx, wy)
    notes = f"-Lap - c d1 + coefficient + shift on slab a={slab.a} (c={c}, {scheme})"
    return SparseOperator(
        A,
        symmetric=(c == 0),
        weights=weights,
        notes=notes,
        scheme=scheme,
        shape2d=(nxu, ny),
        left_coupling=lc,
        right_coupling=rc,
        x_bands=(lower, diag, upper),
        transverse_matrix=Ay.toarray(),
        transverse_weights=wy,
    )


# -- solvers ------------------------------------------------------------------
class Factorized:
    """Sparse LU factorization reused across many right-hand sides."""

    def __init__(self, op):
        A = op.matrix if isinstance(op, SparseOperator) else op
        try:
            self._lu = spla.splu(sp.csc_matrix(A))
        except RuntimeError as exc:
            raise LinearSolveError(f"sparse factorization failed: {exc}", 0, None) from exc
        self.shape = A.shape

    def solve(self, b):
        return self._lu.solve(np.asarray(b, dtype=float))


def factorize(op):
    """Direct solver for an operator; Kronecker-structured operators get the fast path."""
    if isinstance(op, SparseOperator) and op.x_bands is not None:
        return KroneckerSolver(op)
    return Factorized(op)


class KroneckerSolver:
    """Direct solver for Ax (x) I + I (x) Ay with tridiagonal Ax and weighted-symmetric Ay.

    Ay is diagonalized once; each transverse mode then needs one tridiagonal
    solve in x1, done for all modes at once by a vectorized Thomas sweep.
    """

    def __init__(self, op):
        lower, diag, upper = op.x_bands
        Ay = op.transverse_matrix
        wy = op.transverse_weights
        sq = np.sqrt(wy)
        S = (sq[:, None] * Ay) / sq[None, :]
        lam, Q = la.eigh(0.5 * (S + S.T))
        self.eigenvalues = lam
        self._to_modes = sq[:, None] * Q
        self._from_modes = Q.T / sq[None, :]
        self.shape2d = op.shape2d
        nx = diag.size
        d = diag[:, None] + lam[None, :]
        inv_m = np.empty_like(d)
        cp = np.empty_like(d)
        inv_m[0] = 1.0 / d[0]
        cp[0] = upper[0] * inv_m[0]
        for i in range(1, nx):
            inv_m[i] = 1.0 / (d[i] - lower[i] * cp[i - 1])
            cp[i] = upper[i] * inv_m[i]
        self._lower = lower
        self._inv_m = inv_m
        self._cp = cp

    def solve(self, b):
        nx, ny = self.shape2d
        B = np.asarray(b, dtype=float).reshape(nx, ny) @ self._to_modes
        lower, inv_m, cp = self._lower, self._inv_m, self._cp
        y = np.empty_like(B)
        y[0] = B[0] * inv_m[0]
        for i in range(1, nx):
            y[i] = (B[i] - lower[i] * y[i - 1]) * inv_m[i]
        for i in range(nx - 2, -1, -1):
            y[i] -= cp[i] * y[i + 1]
        return (y @ self._from_modes).ravel()


def _residual_ok(A, x, b, rtol):
    nb = np.linalg.norm(b)
    res = np.linalg.norm(A @ x - b)
    return res <= rtol * max(nb, 1e-300), res


def linear_solve(op, b, rtol=1e-10, maxiter=None):
    """Solve A x = b to relative residual ``rtol``.

    Symmetric operators use conjugate gradients on the weight-symmetrized
    system; nonsymmetric ones use GMRES with an incomplete-LU
    preconditioner.  Sparse LU is the fallback.  Raises LinearSolveError
    with the iteration count and final residual when nothing converges.
    """
    if isinstance(op, SparseOperator):
        A, symmetric, w = op.matrix, op.symmetric, op.weights
    else:
        A, symmetric, w = sp.csr_matrix(op), False, None
    b = np.asarray(b, dtype=float)
    n = A.shape[0]
    if not np.any(b):
        return np.zeros(n)
    iters = [0]

    def count(_):
        iters[0] += 1

    x = None
    try:
        if symmetric:
            sq = np.sqrt(w)
            S = sp.diags(sq) @ A @ sp.diags(1.0 / sq)
            dinv = 1.0 / S.diagonal()
            M = spla.LinearOperator((n, n), matvec=lambda v: dinv * v)
            z, info = spla.cg(S, sq * b, rtol=rtol * 0.1, maxiter=maxiter or 10 * n, M=M, callback=count)
            if info == 0:
                x = z / sq
        else:
            ilu = spla.spilu(sp.csc_matrix(A), drop_tol=1e-5, fill_factor=20)
            M = spla.LinearOperator((n, n), matvec=ilu.solve)
            z, info = spla.gmres(A, b, rtol=rtol * 0.1, restart=50, maxiter=maxiter or 200, M=M,
                                 callback=count, callback_type="pr_norm")
            if info == 0:
                x = z
    except RuntimeError as exc:  # singular ILU and friends
        log.debug("iterative solve failed: %s", exc)
    if x is not None:
        ok, res = _residual_ok(A, x, b, rtol)
        if ok:
            return x
    log.debug("falling back to sparse LU after %d iterations", iters[0])
    x = Factorized(A).solve(b)
    ok, res = _residual_ok(A, x, b, rtol)
    if not ok or not np.all(np.isfinite(x)):
        raise LinearSolveError(
            f"linear solve did not reach rtol={rtol}: residual {res:.3e} after {iters[0]} iterations",
            iters[0],
            res,
        )
    return x
