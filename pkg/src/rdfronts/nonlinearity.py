"""Reaction terms f(s) and heterogeneous reactions h(y, s).

Every reaction is evaluated with f extended by zero outside [0, 1], so a
monotone sweep that overshoots the invariant interval sees no spurious
source.  All evaluators are vectorized over numpy arrays.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .exceptions import ConfigError

KPP = "kpp"
BISTABLE = "bistable"

_SAMPLES = 10_001


@dataclass(frozen=True)
class Reaction:
    """A reaction term on [0, 1].

    ``kind`` is ``"kpp"`` or ``"bistable"``.  Without a table the canonical
    families are used: ``rate * s * (1 - s)`` for KPP and
    ``rate * s * (s - theta) * (1 - s)`` for bistable.  A table of samples
    ``(s_i, f_i)`` switches to monotone cubic (PCHIP) interpolation.
    ``floor`` replaces f by ``max(f(s), -floor * s)``; this is the 1D
    comparison nonlinearity used for the heterogeneous CSD model.
    """

    kind: str
    rate: float = 1.0
    theta: float | None = None
    table: tuple[tuple[float, ...], tuple[float, ...]] | None = field(default=None, repr=False)
    floor: float | None = None

    def __post_init__(self):
        if self.kind not in (KPP, BISTABLE):
            raise ConfigError(f"unknown reaction kind {self.kind!r}")
        if self.rate <= 0:
            raise ConfigError("reaction rate must be positive")
        if self.table is None and self.kind == BISTABLE:
            if self.theta is None or not 0.0 < self.theta < 1.0:
                raise ConfigError("bistable reaction needs 0 < theta < 1")
        if self.table is not None:
            s, fs = self.table
            if len(s) != len(fs) or len(s) < 3:
                raise ConfigError("tabulated reaction needs at least 3 (s, f) pairs")
            if np.any(np.diff(s) <= 0) or s[0] > 0 or s[-1] < 1:
                raise ConfigError("tabulated s must be increasing and cover [0, 1]")
        if self.floor is not None and self.floor <= 0:
            raise ConfigError("floor slope must be positive")

    # -- constructors -------------------------------------------------
    @classmethod
    def kpp(cls, rate=1.0):
        return cls(KPP, rate=rate)

    @classmethod
    def bistable(cls, theta=0.25, rate=1.0):
        return cls(BISTABLE, rate=rate, theta=theta)

    @classmethod
    def from_csv(cls, path, kind):
        s, fs = [], []
        with open(Path(path), newline="", encoding="utf-8") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().startswith("#"):
                    continue
                try:
                    s.append(float(row[0]))
                    fs.append(float(row[1]))
                except ValueError:
                    continue  # header row
        return cls(kind, table=(tuple(s), tuple(fs)))

    def with_floor(self, m):
        return Reaction(self.kind, self.rate, self.theta, self.table, floor=m)

    # -- evaluation ---------------------------------------------------
    @cached_property
    def _pchip(self):
        s, fs = self.table
        return PchipInterpolator(np.asarray(s, float), np.asarray(fs, float), extrapolate=False)

    @cached_property
    def _pchip_d(self):
        return self._pchip.derivative()

    def _base(self, s):
        if self.table is not None:
            return self._pchip(s)
        if self.kind == KPP:
            return self.rate * s * (1.0 - s)
        return self.rate * s * (s - self.theta) * (1.0 - s)

    def _base_d(self, s):
        if self.table is not None:
            return self._pchip_d(s)
        if self.kind == KPP:
            return self.rate * (1.0 - 2.0 * s)
        th = self.theta
        return self.rate * (-3.0 * s * s + 2.0 * (1.0 + th) * s - th)

    def f(self, s):
        s = np.asarray(s, dtype=float)
        inside = (s >= 0.0) & (s <= 1.0)
        sc = np.clip(s, 0.0, 1.0)
        val = self._base(sc)
        if self.floor is not None:
            val = np.maximum(val, -self.floor * sc)
        return np.where(inside, val, 0.0)

    def df(self, s):
        """Derivative of the extended f (one-sided at the ends of [0, 1])."""
        s = np.asarray(s, dtype=float)
        inside = (s >= 0.0) & (s <= 1.0)
        sc = np.clip(s, 0.0, 1.0)
        d = self._base_d(sc)
        if self.floor is not None:
            d = np.where(self._base(sc) >= -self.floor * sc, d, -self.floor)
        return np.where(inside, d, 0.0)

    @cached_property
    def _F_table(self):
        s = np.linspace(0.0, 1.0, 20_001)
        vals = self.f(s)
        cum = np.concatenate(([0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]) * np.diff(s))))
        return PchipInterpolator(s, cum)

    def F(self, s):
        """Antiderivative F(s) = int_0^s f, constant beyond [0, 1]."""
        s = np.asarray(s, dtype=float)
        sc = np.clip(s, 0.0, 1.0)
        if self.table is None and self.floor is None:
            if self.kind == KPP:
                val = self.rate * (sc**2 / 2.0 - sc**3 / 3.0)
            else:
                th = self.theta
                val = self.rate * (-(sc**4) / 4.0 + (1.0 + th) * sc**3 / 3.0 - th * sc**2 / 2.0)
        elif self.table is not None and self.floor is None:
            val = self._pchip.antiderivative()(sc)
        else:
            val = self._F_table(sc)
        return np.asarray(val, dtype=float)

    # -- derived quantities --------------------------------------------
    @property
    def fprime0(self):
        return float(self._base_d(np.float64(0.0))) if self.floor is None else float(self.df(0.0))

    @property
    def fprime1(self):
        return float(self.df(1.0))

    @cached_property
    def lipschitz(self):
        """Lipschitz constant K of f on [0, 1]."""
        s = np.linspace(0.0, 1.0, _SAMPLES)
        cand = [np.max(np.abs(self.df(s)))]
        if self.table is None and self.floor is None and self.kind == BISTABLE:
            vertex = (1.0 + self.theta) / 3.0
            cand.append(abs(float(self._base_d(vertex))))
        return float(max(cand))

    @cached_property
    def unstable_zero(self):
        """The intermediate zero theta of a bistable reaction (None for KPP)."""
        if self.kind == KPP:
            return None
        if self.table is None:
            return float(self.theta)
        s = np.linspace(0.0, 1.0, _SAMPLES)[1:-1]
        v = self.f(s)
        idx = np.nonzero((v[:-1] < 0) & (v[1:] >= 0))[0]
        if idx.size == 0:
            raise ConfigError("tabulated bistable f has no sign change in (0, 1)")
        i = idx[0]
        return float(brentq(lambda x: float(self.f(x)), s[i], s[i + 1]))

    def check(self):
        """Verify the sign pattern of the declared kind on a 10^4-point grid.

        Returns a dict of diagnostics (endpoint derivatives, integral of f);
        raises ConfigError on violation.
        """
        s = np.linspace(0.0, 1.0, _SAMPLES)
        v = self.f(s)
        tol = 1e-12
        if abs(v[0]) > tol or abs(v[-1]) > tol:
            raise ConfigError("f must vanish at 0 and 1")
        inner = s[1:-1]
        vi = v[1:-1]
        if self.kind == KPP:
            if np.any(vi <= 0):
                raise ConfigError("KPP f must be positive on (0, 1)")
            if np.any(vi > self.fprime0 * inner + 1e-10):
                raise ConfigError("KPP f must satisfy f(s) <= f'(0) s")
            ratio = vi / inner
            if np.any(np.diff(ratio) > 1e-10):
                raise ConfigError("KPP f(s)/s must be nonincreasing")
        else:
            th = self.unstable_zero
            below = inner < th - 1e-9
            above = inner > th + 1e-9
            if np.any(vi[below] >= 0) or np.any(vi[above] <= 0):
                raise ConfigError("bistable f must be negative on (0, theta) and positive on (theta, 1)")
            if float(self.F(1.0)) <= 0:
                raise ConfigError("bistable f must have positive integral over [0, 1]")
        return {
            "kind": self.kind,
            "fprime0": self.fprime0,
            "fprime1": self.fprime1,
            "integral": float(self.F(1.0)),
            "lipschitz": self.lipschitz,
            "theta": self.unstable_zero,
        }


def kpp_linearization_range(reaction, delta):
    """Largest eta <= 1 with f(s) >= (f'(0) - delta) s on [0, eta].

    Returns ``(eta, theta_norm)`` with the default normalization level
    ``theta_norm = eta / 4``.
    """
    if reaction.kind != KPP:
        raise ConfigError("linearization range is defined for KPP reactions only")
    fp0 = reaction.fprime0
    if not 0.0 < delta < fp0:
        raise ConfigError(f"delta must lie in (0, f'(0)) = (0, {fp0})")
    slope = fp0 - delta

    def gap(s):
        return float(reaction.f(s)) - slope * s

    s = np.linspace(0.0, 1.0, _SAMPLES)[1:]
    viol = np.nonzero(reaction.f(s) - slope * s < -1e-14)[0]
    if viol.size == 0:
        eta = 1.0
    else:
        i = viol[0]
        lo = s[i - 1] if i > 0 else 0.0
        if lo > 0.0 and gap(lo) > 0.0:
            eta = float(brentq(gap, lo, s[i], xtol=1e-14))
        else:
            eta = float(lo)
    return eta, eta / 4.0


# -- heterogeneities ----------------------------------------------------------
@dataclass(frozen=True)
class ConfinedLinear:
    """h(y, s) = f(s) - alpha g(y) s."""

    alpha: float
    potential: object

    def __post_init__(self):
        if self.alpha < 0:
            raise ConfigError("alpha must be nonnegative")

    def absorption(self, r):
        return self.alpha * self.potential(r)

    def weight(self, r):
        return np.ones_like(np.asarray(r, dtype=float))


@dataclass(frozen=True)
class CSD:
    """h(y, s) = w(y) f(s) - (1 - w(y)) m s with w = 1 on |y| <= L1, 0 on |y| >= L2."""

    L1: float
    L2: float
    m: float = 1.0
    transition: str = "linear"

    def __post_init__(self):
        if not 0.0 < self.L1 <= self.L2:
            raise ConfigError("need 0 < L1 <= L2")
        if self.m <= 0:
            raise ConfigError("m must be positive")
        if self.transition not in ("linear", "cosine"):
            raise ConfigError("transition must be 'linear' or 'cosine'")

    def weight(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        if self.L2 == self.L1:
            return np.where(r <= self.L1, 1.0, 0.0)
        t = np.clip((r - self.L1) / (self.L2 - self.L1), 0.0, 1.0)
        if self.transition == "cosine":
            return 0.5 * (1.0 + np.cos(np.pi * t))
        return 1.0 - t

    def absorption(self, r):
        return (1.0 - self.weight(r)) * self.m


def h(het, reaction, r, s):
    """Heterogeneous reaction h(y, s) at transverse radius r."""
    return het.weight(r) * reaction.f(s) - het.absorption(r) * np.asarray(s, dtype=float)


def dh_ds(het, reaction, r, s):
    return het.weight(r) * reaction.df(s) - het.absorption(r)


def H(het, reaction, r, z):
    """H(y, z) = int_0^z h(y, s) ds."""
    z = np.asarray(z, dtype=float)
    return het.weight(r) * reaction.F(z) - 0.5 * het.absorption(r) * z * z


def comparison_reaction(reaction, m):
    """The bistable majorant max{f(s), -m s} of a CSD heterogeneity."""
    return reaction.with_floor(m)
