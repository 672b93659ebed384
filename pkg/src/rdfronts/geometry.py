"""Confinement potentials and truncated transverse / slab grids."""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator

from .exceptions import ConfigError

QUADRATIC = "quadratic"
PLATEAU = "plateau"
CUSTOM = "custom"


@dataclass(frozen=True)
class Potential:
    """Radial confinement potential g(|y|).

    ``quadratic``: g = |y|^2.  ``plateau``: g = 0 on the ball of radius r0 and
    (|y| - r0)^2 outside.  ``custom``: monotone cubic through a table of
    (|y|, g) samples, extended linearly beyond the last sample.
    """

    kind: str = QUADRATIC
    r0: float = 0.0
    table: tuple[tuple[float, ...], tuple[float, ...]] | None = field(default=None, repr=False)
    divergence_floor: float = 10.0

    def __post_init__(self):
        if self.kind not in (QUADRATIC, PLATEAU, CUSTOM):
            raise ConfigError(f"unknown potential kind {self.kind!r}")
        if self.kind == PLATEAU and self.r0 <= 0:
            raise ConfigError("plateau potential needs r0 > 0")
        if self.kind == CUSTOM:
            if self.table is None:
                raise ConfigError("custom potential needs a table")
            r, g = (np.asarray(a, float) for a in self.table)
            if r.size < 2 or np.any(np.diff(r) <= 0) or r[0] != 0.0:
                raise ConfigError("custom potential table must start at |y|=0 with increasing radii")
            if np.any(g < 0) or g[0] != 0.0:
                raise ConfigError("custom potential must be nonnegative with g(0) = 0")

    @classmethod
    def quadratic(cls):
        return cls(QUADRATIC)

    @classmethod
    def plateau(cls, r0):
        return cls(PLATEAU, r0=r0)

    @classmethod
    def from_csv(cls, path):
        r, g = [], []
        with open(Path(path), newline="", encoding="utf-8") as fh:
            for row in csv.reader(fh):
                try:
                    r.append(float(row[0]))
                    g.append(float(row[1]))
                except (ValueError, IndexError):
                    continue
        return cls(CUSTOM, table=(tuple(r), tuple(g)))

    @cached_property
    def _interp(self):
        r, g = (np.asarray(a, float) for a in self.table)
        return PchipInterpolator(r, g, extrapolate=False), r[-1], g[-1], (g[-1] - g[-2]) / (r[-1] - r[-2])

    def __call__(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        if self.kind == QUADRATIC:
            return r * r
        if self.kind == PLATEAU:
            return np.where(r <= self.r0, 0.0, (r - self.r0) ** 2)
        pchip, rmax, gmax, slope = self._interp
        inside = np.nan_to_num(pchip(np.minimum(r, rmax)))
        return np.where(r <= rmax, inside, gmax + max(slope, 0.0) * (r - rmax))


def eval_potential(potential, grid):
    """g sampled at the grid nodes (all nodes, boundary included)."""
    g = potential(grid.nodes)
    if potential.kind == CUSTOM and float(np.max(g)) < potential.divergence_floor:
        warnings.warn(
            f"custom potential reaches only {np.max(g):.3g} at |y|={grid.R}; "
            f"below divergence floor {potential.divergence_floor}",
            RuntimeWarning,
            stacklevel=2,
        )
    return g


def sphere_area(d):
    """Surface measure of the unit sphere in R^d (2 for d=1)."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


@dataclass(frozen=True)
class TransverseGrid:
    """Uniform grid for the transverse variable y.

    ``radial=False`` (only with ``dim=1``) discretizes the full line [-R, R];
    ``radial=True`` discretizes |y| in [0, R] for radially symmetric
    functions of ``dim`` transverse variables, with the symmetry condition
    at r=0.  The solution is pinned to zero at |y| = R.
    """

    dim: int
    R: float
    n: int
    radial: bool = False

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigError("transverse dimension must be >= 1")
        if not self.radial and self.dim != 1:
            raise ConfigError("non-radial transverse grids are one-dimensional only")
        if self.R <= 0:
            raise ConfigError("truncation radius R must be positive")
        if self.n < 3:
            raise ConfigError("need at least 3 transverse nodes")

    @property
    def label(self):
        return f"radial-{self.dim}" if self.radial else "1"

    @property
    def hy(self):
        span = self.R if self.radial else 2.0 * self.R
        return span / (self.n - 1)

    @property
    def neumann_at_zero(self):
        return self.radial

    @cached_property
    def nodes(self):
        if self.radial:
            return np.linspace(0.0, self.R, self.n)
        return np.linspace(-self.R, self.R, self.n)

    @cached_property
    def unknown_slice(self):
        """Slice of ``nodes`` carrying unknowns (boundary nodes are pinned to 0)."""
        return slice(0, self.n - 1) if self.radial else slice(1, self.n - 1)

    @cached_property
    def y(self):
        """Coordinates of the unknown nodes."""
        return self.nodes[self.unknown_slice]

    @cached_property
    def r(self):
        return np.abs(self.y)

    @property
    def size(self):
        return self.y.size

    @cached_property
    def weights(self):
        """Quadrature weight of each unknown node (integrals over R^dim)."""
        h = self.hy
        if not self.radial:
            return np.full(self.size, h)
        d = self.dim
        r = self.r
        lo = np.maximum(r - h / 2.0, 0.0)
        hi = r + h / 2.0
        return sphere_area(d) * (hi**d - lo**d) / d if d > 1 else (hi - lo) * 2.0

    @cached_property
    def face_areas(self):
        """Area factor of the face to the right of each unknown node.

        The last entry is the face towards the pinned boundary node.
        """
        if not self.radial:
            return np.ones(self.size)
        d = self.dim
        faces = self.r + self.hy / 2.0
        return sphere_area(d) * faces ** (d - 1) if d > 1 else 2.0 * np.ones(self.size)

    def integrate(self, values):
        return float(np.dot(self.weights, values))

    def with_radius(self, R):
        """Same spacing, truncated (or extended) at radius R."""
        n = int(round((R if self.radial else 2.0 * R) / self.hy)) + 1
        return TransverseGrid(self.dim, R, n, self.radial)

    def refined(self, factor=2):
        return TransverseGrid(self.dim, self.R, (self.n - 1) * factor + 1, self.radial)

    def full(self, values):
        """Embed unknown values into the full node array (boundary zeros)."""
        out = np.zeros(self.n)
        out[self.unknown_slice] = values
        return out


def make_transverse(dim, R, n):
    """Build a TransverseGrid from ``dim`` given as 1, "1" or "radial-d"."""
    if isinstance(dim, str):
        key = dim.strip().lower()
        if key.startswith("radial-"):
            try:
                d = int(key.split("-", 1)[1])
            except ValueError:
                raise ConfigError(f"bad transverse dimension {dim!r}") from None
            return TransverseGrid(d, float(R), int(n), radial=True)
        try:
            dim = int(key)
        except ValueError:
            raise ConfigError(f"bad transverse dimension {dim!r}") from None
    if dim != 1:
        raise ConfigError("use 'radial-d' for more than one transverse dimension")
    return TransverseGrid(1, float(R), int(n), radial=False)


def default_radius(alpha):
    """Truncation radius 8 / alpha^(1/4) scaled to the Gaussian width of the ground state."""
    return 8.0 / alpha**0.25


@dataclass(frozen=True)
class SlabGrid:
    """Tensor grid over [-a, a] x (transverse domain).

    ``transverse=None`` gives the purely one-dimensional problem in x1.
    """

    a: float
    nx: int
    transverse: TransverseGrid | None = None

    def __post_init__(self):
        if self.a <= 0:
            raise ConfigError("slab half-length a must be positive")
        if self.nx < 3:
            raise ConfigError("need at least 3 nodes in x1")

    @property
    def hx(self):
        return 2.0 * self.a / (self.nx - 1)

    @cached_property
    def x(self):
        return np.linspace(-self.a, self.a, self.nx)

    @property
    def x_inner(self):
        return self.x[1:-1]

    @property
    def ny(self):
        return 1 if self.transverse is None else self.transverse.size

    @property
    def shape(self):
        """Shape of the interior unknown array (x1 interior nodes, transverse unknowns)."""
        return (self.nx - 2, self.ny)

    @property
    def r(self):
        return np.zeros(1) if self.transverse is None else self.transverse.r

    @property
    def y_weights(self):
        return np.ones(1) if self.transverse is None else self.transverse.weights

    @property
    def center_index(self):
        """Index of x1 = 0 among interior x nodes (None if 0 is not a node)."""
        i = int(round(self.a / self.hx))
        return i - 1 if abs(self.x[i]) < 1e-9 * max(1.0, self.a) else None

    @property
    def y_center_index(self):
        if self.transverse is None:
            return 0
        return int(np.argmin(self.transverse.r))


def make_slab(a, hx, transverse=None):
    nx = int(round(2.0 * a / hx)) + 1
    return SlabGrid(float(a), nx, transverse)
