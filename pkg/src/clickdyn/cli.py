"""Command-line front end.

Subcommands map one-to-one onto the analysis modules and each writes one
CSV per curve plus a JSON manifest.  Parameters come from an INI-style
config file ([params] section plus one section per subcommand) and/or
flags; flags override the file.  Exit codes: 0 success, 2 configuration
error, 3 numeric failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import configparser
import difflib
import math
import sys
from pathlib import Path

import numpy as np

from . import equilibria as eq
from . import freevib, hbm, melnikov
from .dataset import Dataset, emit_dataset, emit_manifest
from .integrate import (IntegratorSpec, integrate, largest_lyapunov,
                        poincare_section)
from .model import Params, moment, potential, stiffness

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


class ConfigError(ValueError):
    pass


_PARAM_KEYS = ("alpha", "beta", "gamma", "kappa", "xi", "m0", "omega0", "phi")

# per-subcommand option tables: name -> (type, default)
_COMMON_OPTS = {"seed": (int, 0), "jobs": (int, 1)}
_GRID_OPTS = {
    "theta_min": (float, -math.pi),
    "theta_max": (float, math.pi),
    "n": (int, 401),
}
_OPTIONS: dict[str, dict] = {
    "energy": dict(_GRID_OPTS),
    "moment": dict(_GRID_OPTS),
    "stiffness": dict(_GRID_OPTS),
    "phase-portrait": {
        "n": (int, 401),
        "omega_max": (float, 2.0),
        "n_levels": (int, 12),
        "levels": (str, ""),
    },
    "equilibria": {},
    "bifurcation-set": {
        "variant": (str, "B1"),
        "alpha_min": (float, 0.05),
        "alpha_max": (float, 3.0),
        "beta_min": (float, 0.05),
        "beta_max": (float, 3.0),
        "n": (int, 201),
    },
    "freevib": {"branch": (str, "all"), "n": (int, 30)},
    "hbm": {
        "s_min": (float, 0.1),
        "s_max": (float, 2.0),
        "n": (int, 400),
        "drive": (float, 0.05),
    },
    "melnikov": {
        "variant": (str, "duffing"),
        "omega_min": (float, 0.2),
        "omega_max": (float, 3.0),
        "n_omega": (int, 30),
        "xi_values": (str, "0.1,0.2,0.4"),
        "method": (str, "numeric"),
    },
    "simulate": {
        "theta0": (float, 0.1),
        "omega0_state": (float, 0.0),
        "t_end": (float, 100.0),
        "rel_tol": (float, 1e-10),
        "abs_tol": (float, 1e-12),
    },
    "sweep": {
        "s_min": (float, 0.5),
        "s_max": (float, 1.5),
        "n": (int, 60),
        "drive": (float, 0.05),
        "epsilon": (float, 0.0),
    },
    "lyapunov": {
        "theta0": (float, 0.1),
        "omega0_state": (float, 0.0),
        "horizon": (float, 2000.0),
        "interval": (float, 5.0),
    },
    "poincare": {
        "theta0": (float, 0.1),
        "omega0_state": (float, 0.0),
        "n_points": (int, 200),
        "discard": (int, 200),
    },
}


def _nearest(key: str, valid) -> str:
    hits = difflib.get_close_matches(key, list(valid), n=1)
    hint = f" (did you mean {hits[0]!r}?)" if hits else ""
    return f"unknown key {key!r}{hint}"


def parse_config(command: str, args) -> dict:
    """Resolved configuration: file values overridden by flags, then defaults."""
    valid_opts = dict(_OPTIONS[command])
    valid_opts.update(_COMMON_OPTS)
    file_params: dict = {}
    file_opts: dict = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        ini = configparser.ConfigParser()
        try:
            ini.read_string(path.read_text())
        except configparser.Error as e:
            raise ConfigError(f"config parse failure: {e}") from None
        for section in ini.sections():
            if section == "params":
                for key, val in ini.items(section):
                    if key not in _PARAM_KEYS:
                        raise ConfigError(
                            f"[params]: {_nearest(key, _PARAM_KEYS)}")
                    file_params[key] = float(val)
            elif section == command:
                for key, val in ini.items(section):
                    if key not in valid_opts:
                        raise ConfigError(
                            f"[{section}]: {_nearest(key, valid_opts)}")
                    file_opts[key] = valid_opts[key][0](val)
            elif section not in _OPTIONS:
                raise ConfigError(
                    f"{_nearest(section, list(_OPTIONS) + ['params'])}")
    params_kw = dict(file_params)
    for key in _PARAM_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            params_kw[key] = flag
    if "alpha" not in params_kw:
        raise ConfigError("alpha is required (flag --alpha or [params] alpha)")
    rename = {"m0": "m_big0", "omega0": "omega_big0"}
    try:
        params = Params(**{rename.get(k, k): v for k, v in params_kw.items()})
    except ValueError as e:
        raise ConfigError(str(e)) from None
    opts = {key: spec[1] for key, spec in valid_opts.items()}
    opts.update(file_opts)
    for key in valid_opts:
        flag = getattr(args, f"opt_{key}", None)
        if flag is not None:
            opts[key] = flag
    return {"command": command, "params": params_kw, "options": opts,
            "_params_obj": params}


def _theta_grid(opts) -> np.ndarray:
    return np.linspace(opts["theta_min"], opts["theta_max"], opts["n"])


def _run_energy(p: Params, opts) -> list[Dataset]:
    thetas = _theta_grid(opts)
    vals = np.asarray(potential(p, thetas))
    rows = [(float(t), float(v)) for t, v in zip(thetas, vals)]
    return [Dataset("energy", ("theta", "potential"), rows)]


def _run_moment(p: Params, opts) -> list[Dataset]:
    thetas = _theta_grid(opts)
    rows = [(float(t), float(moment(p, float(t)))) for t in thetas]
    return [Dataset("moment", ("theta", "moment"), rows)]


def _run_stiffness(p: Params, opts) -> list[Dataset]:
    rows = []
    for t in _theta_grid(opts):
        try:
            k = float(stiffness(p, float(t)))
        except ValueError:
            k = math.nan
        rows.append((float(t), k))
    return [Dataset("stiffness", ("theta", "stiffness"), rows)]


def _marching_squares(xg, yg, z, level):
    """Line segments of the z = level contour on a rectilinear grid."""
    segs = []
    for i in range(len(xg) - 1):
        for j in range(len(yg) - 1):
            corners = (
                (xg[i], yg[j], z[j, i]),
                (xg[i + 1], yg[j], z[j, i + 1]),
                (xg[i + 1], yg[j + 1], z[j + 1, i + 1]),
                (xg[i], yg[j + 1], z[j + 1, i]),
            )
            pts = []
            for a in range(4):
                x0, y0, v0 = corners[a]
                x1, y1, v1 = corners[(a + 1) % 4]
                if (v0 - level) * (v1 - level) < 0.0:
                    f = (level - v0) / (v1 - v0)
                    pts.append((x0 + f * (x1 - x0), y0 + f * (y1 - y0)))
                elif v0 == level:
                    pts.append((x0, y0))
            if len(pts) >= 2:
                segs.append((pts[0], pts[1]))
            if len(pts) == 4:
                segs.append((pts[2], pts[3]))
    return segs


def _run_phase_portrait(p: Params, opts) -> list[Dataset]:
    n = opts["n"]
    thetas = np.linspace(-math.pi, math.pi, n)
    omegas = np.linspace(-opts["omega_max"], opts["omega_max"], n)
    tt, ww = np.meshgrid(thetas, omegas)
    h = 0.5 * p.kappa * ww**2 + np.asarray(potential(p, tt))
    if opts["levels"]:
        levels = [float(tok) for tok in opts["levels"].split(",")]
    else:
        h1 = float(potential(p, 0.0))
        h2 = float(potential(p, math.pi))
        top = max(h1, h2) * 2.0 if max(h1, h2) > 0 else 1.0
        levels = list(np.linspace(top / opts["n_levels"], top,
                                  opts["n_levels"]))
        for barrier in (h1, h2):
            if barrier > 0.0:
                levels.append(barrier)      # separatrix level sets
        levels = sorted(set(levels))
    rows = []
    for level in levels:
        for k, ((x0, y0), (x1, y1)) in enumerate(
                _marching_squares(thetas, omegas, h, level)):
            rows.append((float(level), k, float(x0), float(y0),
                         float(x1), float(y1)))
    return [Dataset("phase_portrait",
                    ("level", "segment", "theta0", "omega0_v",
                     "theta1", "omega1_v"), rows)]


def _run_equilibria(p: Params, opts) -> list[Dataset]:
    rows = []
    for e in eq.equilibria_in_period(p):
        l1, l2 = e.eigenvalues
        rows.append((e.branch_id, float(e.theta), float(e.k_local), e.kind,
                     float(l1.real), float(l1.imag),
                     float(l2.real), float(l2.imag)))
    ds = Dataset("equilibria",
                 ("branch", "theta", "stiffness", "kind",
                  "eig1_re", "eig1_im", "eig2_re", "eig2_im"), rows,
                 metadata={"region": eq.classify_region(p)})
    return [ds]


def _run_bifurcation_set(p: Params, opts) -> list[Dataset]:
    variant = opts["variant"]
    a_grid = np.linspace(opts["alpha_min"], opts["alpha_max"], opts["n"])
    if variant in ("B1", "B2"):
        b_grid = np.linspace(opts["beta_min"], opts["beta_max"], opts["n"])
        curve = eq.bifurcation_set(variant, p.gamma, a_grid, b_grid)
    elif variant == "B0":
        curve = eq.zero_stiffness_set(p.beta, p.gamma, a_grid)
    else:
        raise ConfigError(f"variant must be B0, B1 or B2, got {variant!r}")
    rows = [tuple(float(v) for v in row) for row in curve.samples]
    return [Dataset(f"bifurcation_{variant}", curve.columns, rows)]


def _run_freevib(p: Params, opts) -> list[Dataset]:
    bands = freevib.energy_bands(p)
    branches = list(bands) if opts["branch"] == "all" else [opts["branch"]]
    out = []
    for branch in branches:
        if branch not in bands:
            raise ConfigError(
                f"branch {branch!r} not available; have {sorted(bands)}")
        rows = []
        for pt in freevib.amplitude_frequency_curve(p, branch, opts["n"]):
            rows.append((pt.energy,
                         math.nan if pt.theta_ini is None else pt.theta_ini,
                         math.nan if pt.theta_fin is None else pt.theta_fin,
                         pt.amplitude, pt.period, pt.frequency))
        out.append(Dataset(f"freevib_{branch}",
                           ("energy", "theta_ini", "theta_fin",
                            "amplitude", "period", "frequency"), rows,
                           metadata={"band": list(bands[branch])}))
    return out


def _working_center(p: Params):
    centers = [e for e in eq.equilibria_in_period(p) if e.kind == eq.CENTER]
    if not centers:
        raise ValueError("no center equilibrium for this parameter point")
    return max(centers, key=lambda e: e.theta)


def _run_hbm(p: Params, opts) -> list[Dataset]:
    center = _working_center(p)
    cubic = hbm.fit_cubic(p, center)
    b_amp = opts["drive"]
    s_values = np.linspace(opts["s_min"], opts["s_max"], opts["n"])
    branch = hbm.frf_curve(cubic, p.kappa, p.xi, b_amp, s_values)
    frf_rows = []
    for s, amps, phases in zip(branch.s_values, branch.amplitudes,
                               branch.phases):
        for i, (a, ph) in enumerate(zip(amps, phases)):
            frf_rows.append((float(s), i, float(a), float(ph)))
    meta = {"epsilon": cubic.epsilon, "omega_n": cubic.omega_n,
            "origin_theta": cubic.origin_theta}
    return [
        Dataset("hbm_frf", ("s", "root", "amplitude", "phase"), frf_rows,
                metadata=meta),
        Dataset("hbm_backbone", ("amplitude", "s", "s_unit_kappa"),
                [tuple(float(v) for v in row) for row in branch.backbone]),
        Dataset("hbm_folds", ("s",), [(float(s),) for s in branch.folds]),
    ]


def _run_melnikov(p: Params, opts) -> list[Dataset]:
    reduced = melnikov.reduce_system(p, opts["variant"])
    omega_grid = np.linspace(opts["omega_min"], opts["omega_max"],
                             opts["n_omega"])
    xi_grid = np.asarray([float(tok)
                          for tok in opts["xi_values"].split(",")])
    grid = melnikov.threshold_grid(reduced, omega_grid, xi_grid,
                                   opts["method"])
    rows = []
    for i, xi0 in enumerate(grid.xi_grid):
        for j, om in enumerate(grid.omega_grid):
            printed = melnikov.threshold_closed_form(reduced, float(xi0),
                                                     float(om))
            rows.append((float(xi0), float(om), float(grid.m0_crit[i, j]),
                         printed.value, printed.label, printed.agrees))
    return [Dataset("melnikov_threshold",
                    ("xi0", "omega0", "m0_crit", "m0_printed",
                     "printed_form", "printed_agrees"), rows,
                    metadata={"variant": grid.variant,
                              "method": grid.method})]


def _run_simulate(p: Params, opts) -> list[Dataset]:
    spec = IntegratorSpec(rel_tol=opts["rel_tol"], abs_tol=opts["abs_tol"],
                          t_end=opts["t_end"])
    traj = integrate(p, (opts["theta0"], opts["omega0_state"]), spec)
    rows = [(float(t), float(th), float(om))
            for t, (th, om) in zip(traj.times, traj.states)]
    meta = {"accepted": traj.step_stats.accepted,
            "rejected": traj.step_stats.rejected}
    if traj.energy_drift is not None:
        meta["energy_drift"] = traj.energy_drift
    return [Dataset("trajectory", ("t", "theta", "omega"), rows,
                    metadata=meta)]


def _run_sweep(p: Params, opts) -> list[Dataset]:
    if opts["epsilon"] != 0.0:
        cubic = hbm.CubicApprox(omega_n=1.0 / math.sqrt(p.kappa),
                                epsilon=opts["epsilon"], origin_theta=0.0)
        system = (cubic, p.kappa, p.xi, opts["drive"])
    else:
        system = p
    result = hbm.sweep_hysteresis(system, opts["s_min"], opts["s_max"],
                                  opts["n"])
    up = [(float(s), float(a))
          for s, a in zip(result.up_s, result.up_amplitude)]
    down = [(float(s), float(a))
            for s, a in zip(result.down_s, result.down_amplitude)]
    jumps = [("up", float(s)) for s in result.up_jumps] + \
            [("down", float(s)) for s in result.down_jumps]
    return [
        Dataset("sweep_up", ("s", "amplitude"), up),
        Dataset("sweep_down", ("s", "amplitude"), down),
        Dataset("sweep_jumps", ("direction", "s"), jumps),
    ]


def _run_lyapunov(p: Params, opts) -> list[Dataset]:
    est = largest_lyapunov(p, (opts["theta0"], opts["omega0_state"]),
                           horizon=opts["horizon"],
                           renorm_interval=opts["interval"])
    rows = [(i, float(r)) for i, r in enumerate(est.segment_rates)]
    return [Dataset("lyapunov", ("segment", "rate"), rows,
                    metadata={"exponent": est.exponent,
                              "tail_exponent": est.tail_exponent})]


def _run_poincare(p: Params, opts) -> list[Dataset]:
    pm = poincare_section(p, (opts["theta0"], opts["omega0_state"]),
                          opts["n_points"], opts["discard"])
    rows = [(float(th), float(om)) for th, om in pm.points]
    return [Dataset("poincare", ("theta", "omega"), rows,
                    metadata={"discard": pm.discard,
                              "omega0": pm.omega_big0})]


_RUNNERS = {
    "energy": _run_energy,
    "moment": _run_moment,
    "stiffness": _run_stiffness,
    "phase-portrait": _run_phase_portrait,
    "equilibria": _run_equilibria,
    "bifurcation-set": _run_bifurcation_set,
    "freevib": _run_freevib,
    "hbm": _run_hbm,
    "melnikov": _run_melnikov,
    "simulate": _run_simulate,
    "sweep": _run_sweep,
    "lyapunov": _run_lyapunov,
    "poincare": _run_poincare,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clickdyn",
        description="Static and dynamic analysis of the bistable "
                    "click-mechanism rotational oscillator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command, opts in _OPTIONS.items():
        sp = sub.add_parser(command)
        sp.add_argument("--config", default=None)
        sp.add_argument("--out", default=".")
        sp.add_argument("--keep-partial", action="store_true")
        for key in _PARAM_KEYS:
            sp.add_argument(f"--{key}", type=float, default=None)
        all_opts = dict(opts)
        all_opts.update(_COMMON_OPTS)
        for key, (typ, _default) in all_opts.items():
            sp.add_argument(f"--{key.replace('_', '-')}", dest=f"opt_{key}",
                            type=typ, default=None)
    return parser


def run(command: str, config: dict, out_dir: Path,
        keep_partial: bool = False) -> list[Path]:
    """Execute one subcommand and write its datasets plus the manifest."""
    p = config["_params_obj"]
    datasets = _RUNNERS[command](p, config["options"])
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    public = {k: v for k, v in config.items() if not k.startswith("_")}
    try:
        for ds in datasets:
            written.append(emit_dataset(ds, out_dir / f"{ds.name}.csv"))
        written.append(emit_manifest(datasets, public,
                                     out_dir / "manifest.json"))
    except BaseException:
        if not keep_partial:
            for path in written:
                path.unlink(missing_ok=True)
        raise
    return written


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code not in (0, None) else 0
    try:
        config = parse_config(args.command, args)
    except ConfigError as e:
        print(f"error:config: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        written = run(args.command, config, Path(args.out),
                      keep_partial=args.keep_partial)
    except ConfigError as e:
        print(f"error:config: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"error:io: {e}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, RuntimeError, ArithmeticError) as e:
        print(f"error:numeric: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
