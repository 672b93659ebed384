"""Command-line entry point: ``rdfronts <command> [options]``.

Options can also come from a JSON or TOML file given with ``--config``;
flags on the command line override file values.  Every run writes CSV
data, SVG figures and a ``manifest.json`` into the output directory
(``--out``, else ``$RDFRONTS_OUT``, else ``./rdfronts-out``).

Exit codes: 0 success, 1 solver failure, 2 invalid configuration.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import csd as csdmod
from . import fronts, parabolic, plotting, profiles, spectral
from .exceptions import ConfigError, SolverError
from .geometry import Potential, default_radius, make_slab, make_transverse
from .io import Manifest, SnapshotWriter
from .nonlinearity import BISTABLE, KPP, ConfinedLinear, Reaction, kpp_linearization_range

log = logging.getLogger("rdfronts")

OUT_ENV = "RDFRONTS_OUT"
DEFAULT_OUT = "rdfronts-out"


def floats(text):
    """Comma-separated list of floats (a single number is a one-element list)."""
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    if isinstance(text, (int, float)):
        return [float(text)]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


# option name -> (type, default, help); shared groups are composed per command
REACTION = {
    "reaction": (str, None, "kpp or bistable"),
    "rate": (float, 1.0, "reaction rate prefactor"),
    "theta": (float, 0.25, "bistable unstable zero"),
    "f_table": (str, None, "CSV table of (s, f(s)) samples"),
}
POTENTIAL = {
    "g": (str, "quadratic", "quadratic, plateau or custom"),
    "r0": (float, 2.0, "plateau radius"),
    "g_table": (str, None, "CSV table of (|y|, g) samples for a custom potential"),
}
TRANSVERSE = {
    "dim": (str, "1", "transverse dimension: 1 or radial-d"),
    "R": (float, None, "transverse truncation radius"),
    "hy": (float, None, "transverse spacing"),
}
SLAB = {"a": (float, 20.0, "slab half-length"), "hx": (float, 0.2, "x1 spacing")}
TOL = {"tol": (float, 1e-8, "residual tolerance")}

COMMANDS = {
    "eig": ("principal eigenvalues of -Laplacian + alpha g - f'(0)",
            {**POTENTIAL, **TRANSVERSE, **TOL, "alpha": (floats, [1.0], "alpha value(s)"),
             "fprime0": (float, 1.0, "growth rate f'(0)")}),
    "alpha0": ("extinction threshold alpha0",
               {**POTENTIAL, **TRANSVERSE, "fprime0": (float, 1.0, "growth rate f'(0)"),
                "alpha_max": (float, 1e3, "largest alpha probed"), "atol": (float, 1e-4, "bisection width")}),
    "profile": ("stationary transverse profile V",
                {**REACTION, **POTENTIAL, **TRANSVERSE, **TOL, "alpha": (float, 0.25, "confinement strength")}),
    "energy": ("energy sweep J(V) over alpha",
               {**REACTION, **POTENTIAL, **TRANSVERSE, **TOL, "alpha": (floats, [0.25], "alpha value(s)")}),
    "front": ("normalized slab front (or fixed-speed slab solve with --c)",
              {**REACTION, **POTENTIAL, **TRANSVERSE, **SLAB, "alpha": (float, 0.25, "confinement strength"),
               "c": (float, None, "solve at this speed instead of locating c_a")}),
    "speed-curve": ("speeds c_a along a and their extrapolation",
                    {**REACTION, **POTENTIAL, **TRANSVERSE, "hx": (float, 0.2, "x1 spacing"),
                     "alpha": (float, 0.25, "confinement strength"),
                     "a_list": (floats, [10.0, 20.0, 40.0], "slab half-lengths")}),
    "spread": ("parabolic spreading run and measured speed",
               {**REACTION, **POTENTIAL, **TRANSVERSE, **SLAB, "alpha": (float, 0.25, "confinement strength"),
                "T": (float, 100.0, "final time"), "dt": (float, 0.05, "time step"),
                "snapshots": (int, 0, "number of snapshot files to write")}),
    "extinction": ("extinction / spreading test at a multiple of alpha0",
                   {**POTENTIAL, **TRANSVERSE, **SLAB, "rate": (float, 1.0, "KPP rate"),
                    "factor": (float, 1.1, "alpha = factor * alpha0"),
                    "T": (float, 200.0, "final time"), "dt": (float, 0.1, "time step")}),
    "csd-profile": ("CSD transverse profile",
                    {**REACTION, "L1": (float, 10.0, "core half-width"), "L2": (float, 10.0, "outer radius"),
                     "m": (float, 1.0, "absorption rate"), "hy": (float, 0.05, "transverse spacing"),
                     "transition": (str, "linear", "linear or cosine")}),
    "csd-front": ("CSD traveling front",
                  {**REACTION, **SLAB, "L1": (float, 10.0, "core half-width"), "L2": (float, 10.0, "outer radius"),
                   "m": (float, 1.0, "absorption rate"), "hy": (float, 0.2, "transverse spacing"),
                   "transition": (str, "linear", "linear or cosine")}),
    "csd-phase": ("CSD classification map over L1",
                  {**REACTION, **SLAB, "L1_list": (floats, [0.05, 2.0, 4.0, 6.0, 10.0], "core half-widths"),
                   "L2_rule": (str, "tie", "tie or a ratio L2/L1"), "m": (float, 1.0, "absorption rate"),
                   "hy": (float, 0.2, "transverse spacing"), "transition": (str, "linear", "linear or cosine")}),
    "oracle-1d": ("1D bistable front against the closed-form solution",
                  {**REACTION, "a": (float, 40.0, "slab half-length"), "hx": (float, 0.05, "x1 spacing")}),
}
COMMON = {"workers": (int, 1, "worker processes for sweeps"), "out": (str, None, "output directory")}


def _option_flag(name):
    return "--" + name.replace("_", "-")


def build_parser():
    parser = argparse.ArgumentParser(prog="rdfronts", description="Fronts in confined reaction-diffusion models.")
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (help_text, options) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON or TOML file of option values")
        for key, (typ, default, text) in {**options, **COMMON}.items():
            shown = "" if default is None else f" (default {default})"
            p.add_argument(_option_flag(key), dest=key, type=typ, default=None, help=text + shown)
    return parser


def load_config(path):
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} not found")
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:  # Python < 3.11
            import tomli as tomllib
        try:
            return tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"bad TOML in {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"bad JSON in {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a mapping of option names to values")
    return data


def resolve(args):
    """Merge defaults, config file and flags (flags win); reject unknown keys."""
    options = {**COMMANDS[args.command][1], **COMMON}
    config = {}
    if args.config:
        raw = load_config(args.config)
        for key, value in raw.items():
            k = key.replace("-", "_")
            if k == "command":
                if value != args.command:
                    raise ConfigError(f"config is for command {value!r}, not {args.command!r}")
                continue
            if k not in options:
                raise ConfigError(f"unknown config key {key!r} for command {args.command}")
            typ = options[k][0]
            try:
                config[k] = typ(value) if value is not None else None
            except (TypeError, ValueError, argparse.ArgumentTypeError) as exc:
                raise ConfigError(f"bad value for {key!r}: {exc}") from None
    cfg = {k: opt[1] for k, opt in options.items()}
    cfg.update(config)
    for k in options:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    cfg["out"] = cfg["out"] or os.environ.get(OUT_ENV) or DEFAULT_OUT
    return cfg


# -- builders -----------------------------------------------------------------
def build_reaction(cfg, default_kind):
    kind = (cfg.get("reaction") or default_kind).lower()
    if kind not in (KPP, BISTABLE):
        raise ConfigError(f"unknown reaction {kind!r}")
    if cfg.get("f_table"):
        reaction = Reaction.from_csv(cfg["f_table"], kind)
    elif kind == KPP:
        reaction = Reaction.kpp(cfg.get("rate", 1.0))
    else:
        reaction = Reaction.bistable(cfg.get("theta", 0.25), cfg.get("rate", 1.0))
    reaction.check()
    return reaction


def build_potential(cfg):
    kind = cfg["g"]
    if kind == "quadratic":
        return Potential.quadratic()
    if kind == "plateau":
        return Potential.plateau(cfg["r0"])
    if kind == "custom":
        if not cfg.get("g_table"):
            raise ConfigError("custom potential needs --g-table")
        return Potential.from_csv(cfg["g_table"])
    raise ConfigError(f"unknown potential {kind!r}")


def build_transverse(cfg, alpha, hy_default, R_default=None):
    R = cfg.get("R") or R_default or default_radius(alpha)
    hy = cfg.get("hy") or hy_default
    if R <= 0 or hy <= 0:
        raise ConfigError("R and hy must be positive")
    dim = str(cfg.get("dim", "1"))
    span = 2.0 * R if dim == "1" else R
    n = int(round(span / hy)) + 1
    if dim == "1" and n % 2 == 0:
        n += 1  # keep y = 0 on the grid
    return make_transverse(dim, R, n)


def _y(grid):
    return grid.y


def _check_positive(cfg, *keys):
    for k in keys:
        v = cfg[k]
        values = v if isinstance(v, list) else [v]
        if not values or any(not (isinstance(x, (int, float)) and x > 0) for x in values):
            raise ConfigError(f"{k} must be positive")


# -- commands -----------------------------------------------------------------
def cmd_eig(cfg, man):
    _check_positive(cfg, "alpha")
    pot = build_potential(cfg)
    alphas = sorted(cfg["alpha"])
    rows, lams = [], []
    grids = {}
    for a in alphas:
        grid = build_transverse(cfg, a, 0.02)
        grids[a] = grid
        res = spectral.principal_eigen(grid, pot, a, cfg["fprime0"])
        lam_r = spectral.richardson_lambda(grid, pot, a, cfg["fprime0"])
        rows.append((a, res.lam, lam_r, res.residual, res.iterations))
        lams.append(lam_r)
        print(f"alpha = {a:.6g}: lambda = {lam_r:.8f} (grid value {res.lam:.8f}, residual {res.residual:.2e})")
    man.csv("eig.csv", ["alpha", "lambda_grid", "lambda", "residual", "iterations"], rows)
    first = alphas[0]
    res = spectral.principal_eigen(grids[first], pot, first, cfg["fprime0"])
    man.csv("eigenfunction.csv", ["y", "phi"], zip(_y(grids[first]), res.phi))
    man.add(plotting.plot_eigen_curve(alphas, lams, man.outdir / "eig.svg"))
    man.results["lambda"] = dict(zip(map(str, alphas), lams))


def cmd_alpha0(cfg, man):
    pot = build_potential(cfg)
    grid = build_transverse(cfg, 1.0, 0.04, R_default=max(8.0, 2.0 * cfg["r0"] + 6.0) if cfg["g"] == "plateau"
                            else None)
    res = spectral.find_alpha0(grid, pot, cfg["fprime0"], cfg["alpha_max"], cfg["atol"])
    print(res.describe() if res.finite else "alpha0 = +inf (case ii)")
    if not res.finite:
        print(f"lambda(alpha_max = {cfg['alpha_max']:g}) = {res.lambda_at_max:.6g} < 0")
    man.csv("alpha0.csv", ["alpha", "lambda"], sorted(res.evaluations))
    man.results.update(alpha0=res.alpha0 if res.finite else "inf", case=res.case)


def _profile(cfg, reaction, pot, alpha, grid):
    if reaction.kind == KPP:
        return profiles.solve_profile_kpp(alpha, grid, pot, reaction, cfg.get("tol", 1e-8))
    return profiles.solve_profile_bistable_maximal(alpha, grid, pot, reaction, cfg.get("tol", 1e-8))


def cmd_profile(cfg, man):
    _check_positive(cfg, "alpha")
    reaction = build_reaction(cfg, KPP)
    pot = build_potential(cfg)
    alpha = cfg["alpha"]
    grid = build_transverse(cfg, alpha, 0.05)
    prof = _profile(cfg, reaction, pot, alpha, grid)
    J = profiles.energy(prof.values, alpha, grid, pot, reaction)
    if prof.is_zero:
        print(f"alpha = {alpha:g}: zero profile ({prof.note})")
    else:
        print(f"alpha = {alpha:g}: sup V = {prof.sup:.8f}, residual {prof.residual:.2e}, J(V) = {J.value:.8f}")
    man.csv("profile.csv", ["y", "V"], zip(_y(grid), prof.values))
    man.add(plotting.plot_profile(_y(grid), prof.values, man.outdir / "profile.svg"))
    man.results.update(sup=prof.sup, residual=prof.residual, energy=J.value, zero=prof.is_zero)


def cmd_energy(cfg, man):
    _check_positive(cfg, "alpha")
    reaction = build_reaction(cfg, BISTABLE)
    pot = build_potential(cfg)
    rows = []
    for alpha in sorted(cfg["alpha"]):
        grid = build_transverse(cfg, alpha, 0.05)
        prof = _profile(cfg, reaction, pot, alpha, grid)
        J = profiles.energy(prof.values, alpha, grid, pot, reaction).value
        if prof.is_zero:
            cls = "zero"
        else:
            cls = "negative-energy" if J < 0 else "positive-energy"
        rows.append((alpha, J, cls))
        print(f"alpha = {alpha:g}: J = {J:.8f} ({cls})")
    man.csv("energy.csv", ["alpha", "J", "classification"], rows)


def _kpp_setup(cfg, hy_default=0.2):
    reaction = build_reaction(cfg, KPP)
    pot = build_potential(cfg)
    alpha = cfg["alpha"]
    grid = build_transverse(cfg, alpha, hy_default, R_default=10.0)
    prof = _profile(cfg, reaction, pot, alpha, grid)
    if prof.is_zero:
        raise SolverError(f"no nonzero profile at alpha = {alpha:g}; no front exists")
    het = ConfinedLinear(alpha, pot)
    if reaction.kind == KPP:
        lam = spectral.principal_eigen(grid, pot, alpha, reaction.fprime0).lam
        theta = kpp_linearization_range(reaction, -lam / 2.0)[1]
        bracket = fronts.kpp_speed_bracket(lam)
        norm = fronts.POINT
    else:
        lam = None
        theta = reaction.unstable_zero
        gamma = fronts.one_d_bistable_speed(40.0, reaction)[0]
        bracket = fronts.bistable_speed_bracket(gamma)
        norm = fronts.MAX
    return reaction, pot, grid, prof, het, lam, theta, bracket, norm


def _front_rows(sol):
    full = sol.full()
    y = sol.slab.transverse.y if sol.slab.transverse is not None else [0.0]
    return ((x, yy, full[i, j]) for i, x in enumerate(sol.slab.x) for j, yy in enumerate(y))


def _emit_front(man, sol, name):
    man.csv(f"{name}.csv", ["x1", "y", "u"], _front_rows(sol))
    y = sol.slab.transverse.y if sol.slab.transverse is not None else np.zeros(1)
    man.add(plotting.plot_front(sol.slab.x, y, sol.full(), man.outdir / f"{name}.svg", f"c = {sol.c:.6f}"))


def cmd_front(cfg, man):
    _check_positive(cfg, "alpha", "a", "hx")
    reaction, pot, grid, prof, het, lam, theta, bracket, norm = _kpp_setup(cfg)
    slab = make_slab(cfg["a"], cfg["hx"], grid)
    solver = fronts.SlabSolver(slab, het, reaction, prof.values)
    if cfg["c"] is not None:
        sol = solver.solve(cfg["c"])
        sol.value = fronts.normalization_value(sol, norm)
        print(f"c = {sol.c:g}: normalization value {sol.value:.8f}, residual {sol.residual:.2e}")
    else:
        sol = fronts.find_speed(solver, theta, bracket, norm)
        print(f"c_a = {sol.c:.8f} (a = {cfg['a']:g}, residual {sol.residual:.2e})")
    _emit_front(man, sol, "front")
    man.results.update(c=sol.c, residual=sol.residual, monotone_x1=sol.monotone_x1)


def cmd_speed_curve(cfg, man):
    _check_positive(cfg, "alpha", "a_list", "hx")
    reaction, pot, grid, prof, het, lam, theta, bracket, norm = _kpp_setup(cfg)
    curve = fronts.continue_speed(cfg["a_list"], cfg["hx"], grid, het, reaction, prof.values, theta, bracket, norm)
    for a, c in curve.points:
        print(f"a = {a:g}: c_a = {c:.8f}")
    print(f"c_inf = {curve.c_inf:.8f} +- {curve.uncertainty:.2e}")
    if lam is not None:
        print(f"2 sqrt(-lambda) = {2.0 * math.sqrt(-lam):.8f}")
    man.csv("speed_curve.csv", ["a", "c_a"], curve.points)
    man.add(plotting.plot_speed_curve(curve.a, curve.speeds, man.outdir / "speed_curve.svg", curve.c_inf,
                                      2.0 * math.sqrt(-lam) if lam is not None else None))
    _emit_front(man, curve.fronts[-1], "front")
    man.results.update(c_inf=curve.c_inf, uncertainty=curve.uncertainty, left_error=curve.left_error)


def cmd_spread(cfg, man):
    _check_positive(cfg, "alpha", "a", "hx", "T", "dt")
    reaction, pot, grid, prof, het, lam, theta, _, _ = _kpp_setup(cfg, hy_default=0.1)
    slab = make_slab(cfg["a"], cfg["hx"], grid)
    height = min(0.9, 4.0 * theta)
    u0 = parabolic.default_initial(slab, prof.values, height)
    writer = None
    every = None
    if cfg["snapshots"] > 0:
        writer = SnapshotWriter(man, slab.x, grid.y)
        every = max(1, int(round(cfg["T"] / cfg["dt"])) // cfg["snapshots"])
    try:
        traj = parabolic.simulate(u0, cfg["T"], cfg["dt"], slab, het, reaction, theta, every, on_snapshot=writer)
    finally:
        if writer is not None:
            writer.close()
    fit = parabolic.measure_spreading_speed(traj)
    print(f"measured speed = {fit.speed:.6f} over t in [{fit.window[0]:g}, {fit.window[1]:g}] (rms {fit.rms:.2e})")
    man.csv("track.csv", ["t", "x_theta"], traj.track)
    man.add(plotting.plot_track(traj.track, man.outdir / "track.svg", fit))
    man.results.update(speed=fit.speed, shifts=traj.shifts)


def cmd_extinction(cfg, man):
    _check_positive(cfg, "factor", "a", "hx", "T", "dt")
    reaction = Reaction.kpp(cfg["rate"])
    pot = build_potential(cfg)
    grid = build_transverse(cfg, 1.0, 0.2, R_default=10.0)
    a0 = spectral.find_alpha0(grid, pot, reaction.fprime0)
    if not a0.finite:
        raise SolverError("alpha0 is infinite for this potential; no extinction regime")
    alpha = cfg["factor"] * a0.alpha0
    het = ConfinedLinear(alpha, pot)
    slab = make_slab(cfg["a"], cfg["hx"], grid)
    eig = spectral.principal_eigen(grid, pot, alpha, reaction.fprime0)
    if eig.lam < 0:
        prof = profiles.solve_profile_kpp(alpha, grid, pot, reaction)
        theta = kpp_linearization_range(reaction, -eig.lam / 2.0)[1]
        u0 = parabolic.default_initial(slab, prof.values, min(0.9, 4.0 * theta))
    else:
        theta = 1e-3
        u0 = parabolic.default_initial(slab, None, 0.9)
    traj = parabolic.simulate(u0, cfg["T"], cfg["dt"], slab, het, reaction, theta)
    sup = traj.sup_history[-1][1]
    if parabolic.extinct(traj):
        verdict = "extinct"
    elif parabolic.spreads(traj):
        verdict = "spreading"
    else:
        verdict = "undecided"
    print(f"alpha0 = {a0.alpha0:.6f}, alpha = {alpha:.6f}: sup u(T) = {sup:.3e} -> {verdict}")
    step = max(1, len(traj.sup_history) // 500)
    man.csv("sup_history.csv", ["t", "sup_u"], traj.sup_history[::step])
    man.add(plotting.plot_sup_history(traj.sup_history[::step], man.outdir / "sup_history.svg"))
    man.results.update(alpha0=a0.alpha0, alpha=alpha, sup_final=sup, verdict=verdict)


def cmd_csd_profile(cfg, man):
    reaction = build_reaction(cfg, BISTABLE)
    grid = csdmod.csd_grid(cfg["L2"], cfg["m"], cfg["hy"])
    prof = csdmod.csd_profile(cfg["L1"], cfg["L2"], cfg["m"], reaction, grid, cfg["transition"])
    J = csdmod.csd_energy(prof.values, cfg["L1"], cfg["L2"], cfg["m"], reaction, grid, cfg["transition"]).value
    if prof.is_zero:
        print(f"L1 = {cfg['L1']:g}, L2 = {cfg['L2']:g}: no profile")
    else:
        print(f"L1 = {cfg['L1']:g}, L2 = {cfg['L2']:g}: V(0) = {prof.values[0]:.8f}, J(V) = {J:.8f}")
    man.csv("csd_profile.csv", ["r", "V"], zip(grid.y, prof.values))
    man.add(plotting.plot_profile(grid.y, prof.values, man.outdir / "csd_profile.svg"))
    man.results.update(zero=prof.is_zero, energy=J)


def cmd_csd_front(cfg, man):
    reaction = build_reaction(cfg, BISTABLE)
    sol = csdmod.csd_front(cfg["L1"], cfg["L2"], cfg["m"], reaction, cfg["a"], cfg["hx"], cfg["hy"],
                           transition=cfg["transition"])
    if sol is None:
        print("no profile: no front")
        man.results.update(c=None)
        return
    print(f"c_a = {sol.c:.8f} (1D comparison speed {sol.comparison_speed:.8f})")
    _emit_front(man, sol, "csd_front")
    man.results.update(c=sol.c, comparison_speed=sol.comparison_speed)


def cmd_csd_phase(cfg, man):
    reaction = build_reaction(cfg, BISTABLE)
    reports = csdmod.csd_phase_diagram(cfg["L1_list"], cfg["L2_rule"], cfg["m"], reaction, cfg["a"], cfg["hx"],
                                       cfg["hy"], cfg["transition"], cfg["workers"])
    rows = []
    for r in reports:
        rows.append((r.L1, r.L2, r.classification, "" if r.speed is None else r.speed))
        print(f"L1 = {r.L1:g}, L2 = {r.L2:g}: {r.classification}" + ("" if r.speed is None else f", c = {r.speed:.6f}"))
    if not csdmod.classifications_monotone(reports):
        print("warning: classifications are not monotone in L1", file=sys.stderr)
    man.csv("phase.csv", ["L1", "L2", "classification", "c"], rows)
    man.add(plotting.plot_phase(reports, man.outdir / "phase.svg"))


def cmd_oracle_1d(cfg, man):
    reaction = build_reaction(cfg, BISTABLE)
    if reaction.table is not None:
        raise ConfigError("the closed-form oracle needs the cubic bistable reaction")
    gamma, sol = fronts.one_d_bistable_speed(cfg["a"], reaction, cfg["hx"])
    exact = math.sqrt(2.0) * (0.5 - reaction.theta) * math.sqrt(reaction.rate)
    x = sol.slab.x
    z = sol.full()[:, 0]
    # closed-form front shifted to pass through theta at x = 0
    s = math.sqrt(reaction.rate / 2.0)
    shift = math.log(1.0 / reaction.theta - 1.0) / s
    ref = 1.0 / (1.0 + np.exp(s * (x + shift)))
    print(f"gamma_a = {gamma:.8f}, closed form {exact:.8f}, difference {gamma - exact:.2e}")
    man.csv("oracle_1d.csv", ["x1", "z", "z_closed_form"], zip(x, z, ref))
    man.add(plotting.plot_front(x, np.zeros(1), z[:, None], man.outdir / "oracle_1d.svg", f"gamma = {gamma:.6f}"))
    man.results.update(gamma=gamma, closed_form=exact)


HANDLERS = {
    "eig": cmd_eig, "alpha0": cmd_alpha0, "profile": cmd_profile, "energy": cmd_energy, "front": cmd_front,
    "speed-curve": cmd_speed_curve, "spread": cmd_spread, "extinction": cmd_extinction,
    "csd-profile": cmd_csd_profile, "csd-front": cmd_csd_front, "csd-phase": cmd_csd_phase,
    "oracle-1d": cmd_oracle_1d,
}


def _validate(cfg):
    if cfg.get("dim") is not None:
        make_transverse(cfg["dim"], 1.0, 3)  # raises ConfigError on a bad dimension label
    if cfg.get("workers", 1) < 1:
        raise ConfigError("workers must be >= 1")
    if cfg.get("reaction") is not None and cfg["reaction"].lower() not in (KPP, BISTABLE):
        raise ConfigError(f"unknown reaction {cfg['reaction']!r}")
    if cfg.get("g") is not None and cfg["g"] not in ("quadratic", "plateau", "custom"):
        raise ConfigError(f"unknown potential {cfg['g']!r}")
    if cfg.get("transition") is not None and cfg["transition"] not in ("linear", "cosine"):
        raise ConfigError("transition must be linear or cosine")
    for key in ("L1", "L2", "m"):
        if key in cfg and cfg[key] is not None and cfg[key] <= 0:
            raise ConfigError(f"{key} must be positive")
    if "L1" in cfg and "L2" in cfg and cfg["L1"] > cfg["L2"]:
        raise ConfigError("need L1 <= L2")
    if cfg.get("L2_rule") not in (None, "tie"):
        try:
            float(cfg["L2_rule"])
        except ValueError:
            raise ConfigError("L2_rule must be 'tie' or a number") from None


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve(args)
        _validate(cfg)
        stored = {k: v for k, v in cfg.items() if k != "out"}
        tolerances = {k: cfg[k] for k in ("tol", "atol") if k in cfg}
        man = Manifest(cfg["out"], args.command, stored, tolerances)
        start = time.perf_counter()
        HANDLERS[args.command](cfg, man)
        man.timings["total"] = time.perf_counter() - start
        man.write()
    except ConfigError as exc:
        print(f"rdfronts: configuration error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"rdfronts: solver error: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
