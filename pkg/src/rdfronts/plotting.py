"""SVG figures derived from computed results (never read back as inputs)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

plt.rcParams["svg.hashsalt"] = "rdfronts"


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_eigen_curve(alphas, lams, path, exact=None):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(alphas, lams, "o-", label="computed")
    if exact is not None:
        ax.plot(alphas, exact, "k--", lw=1, label="closed form")
    ax.axhline(0.0, color="0.6", lw=0.8)
    ax.set_xlabel(r"$\alpha$")
    ax.set_ylabel(r"$\lambda_\alpha$")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def plot_profile(y, values, path, label="V"):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(y, values)
    ax.set_xlabel("|y|" if np.min(y) >= 0 else "y")
    ax.set_ylabel(label)
    fig.tight_layout()
    return _save(fig, path)


def plot_front(x, y, u, path, title=None):
    fig, ax = plt.subplots(figsize=(6, 3.5))
    if u.shape[1] == 1:
        ax.plot(x, u[:, 0])
        ax.set_ylabel("u")
    else:
        cs = ax.contourf(x, y, u.T, levels=20, cmap="viridis")
        fig.colorbar(cs, ax=ax, label="u")
        ax.set_ylabel("y")
    ax.set_xlabel(r"$x_1$")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)


def plot_speed_curve(a, c, path, c_inf=None, target=None):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(a, c, "o-", label=r"$c_a$")
    if c_inf is not None:
        ax.axhline(c_inf, color="C1", ls="--", label=r"extrapolated $c_\infty$")
    if target is not None:
        ax.axhline(target, color="k", lw=0.8, label="reference")
    ax.set_xlabel("a")
    ax.set_ylabel("speed")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def plot_track(track, path, fit=None):
    t, xs = np.array(track).T if len(track) else (np.zeros(0), np.zeros(0))
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(t, xs, label=r"$x_\theta(t)$")
    if fit is not None:
        tt = np.linspace(*fit.window, 50)
        ax.plot(tt, fit.speed * tt + fit.intercept, "k--", lw=1, label=f"slope {fit.speed:.4f}")
        ax.legend()
    ax.set_xlabel("t")
    ax.set_ylabel("level-set position")
    fig.tight_layout()
    return _save(fig, path)


def plot_sup_history(history, path):
    t, s = np.array(history).T
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.semilogy(t, np.maximum(s, 1e-300))
    ax.set_xlabel("t")
    ax.set_ylabel(r"$\sup u$")
    fig.tight_layout()
    return _save(fig, path)


def plot_phase(reports, path):
    order = {"no-profile": 0, "profile-no-front": 1, "propagating": 2}
    L1 = [r.L1 for r in reports]
    L2 = [r.L2 for r in reports]
    cls = [order[r.classification] for r in reports]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    sc = ax.scatter(L1, L2, c=cls, cmap="RdYlGn", vmin=0, vmax=2, s=60)
    cb = fig.colorbar(sc, ax=ax, ticks=[0, 1, 2])
    cb.ax.set_yticklabels(list(order))
    ax.set_xlabel(r"$L_1$")
    ax.set_ylabel(r"$L_2$")
    fig.tight_layout()
    return _save(fig, path)
