"""Command-line front end.

Subcommands: friction-sphere, emission-sphere, conductance, onsager,
oracle, timescale.  Configuration is flat key = value text with one
section per command (INI syntax, # comments allowed); see the README
for the full schema.  Results are written as JSON (scalars, metadata,
config echo, residuals) plus CSV curves with x,y,yerr columns.

Exit codes: 0 success, 2 config error, 3 convergence failure,
4 identity-residual failure.
"""

import argparse
import configparser
import csv
import json
import os
import sys

import numpy as np

from . import __version__
from . import materials, sphere, dipoles, stochastic
from .numerics import build_grid

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_RESIDUAL = 4

RESIDUAL_TOL = 1e-6


class ConfigError(Exception):
    pass


def _parse_material(text):
    parts = text.split()
    kind = parts[0].lower()
    try:
        if kind == "constant":
            return materials.Constant(complex(parts[1]))
        if kind == "drude":
            return materials.Drude(float(parts[1]), float(parts[2]))
        if kind == "lorentz":
            return materials.Lorentz(float(parts[1]), float(parts[2]),
                                     float(parts[3]), float(parts[4]))
        if kind == "mirror":
            return materials.PerfectMirror()
        if kind == "tabulated":
            return materials.load_tabulated(parts[1])
    except ConfigError:
        raise
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"bad material spec {text!r}: {exc}") from exc
    raise ConfigError(f"unknown material kind {kind!r}")


def _parse_cluster(cfg):
    if "cluster" not in cfg:
        raise ConfigError("missing [cluster] section")
    sec = cfg["cluster"]
    sites, labels = [], []
    n = 1
    while f"site{n}.position" in sec:
        pos = tuple(float(v) for v in sec[f"site{n}.position"].split(","))
        if len(pos) != 3:
            raise ConfigError(f"site{n}.position needs three components")
        model = _parse_material(sec[f"site{n}.material"])
        radius = float(sec[f"site{n}.radius"])
        obj = int(sec.get(f"site{n}.object", "1"))
        sites.append(dipoles.Site(pos, model, radius))
        labels.append(obj)
        n += 1
    if not sites:
        raise ConfigError("[cluster] defines no sites")
    T = float(sec.get("t", "300"))
    cluster = dipoles.ScatterCluster(
        sites, labels,
        T1=float(sec.get("t1", str(T))),
        T2=float(sec.get("t2", str(T))),
        T_env=float(sec.get("t_env", str(T))),
    )
    return cluster, T


def _write_json(outdir, name, payload):
    path = os.path.join(outdir, name + ".json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _write_csv(outdir, name, rows, header=("x", "y", "yerr")):
    path = os.path.join(outdir, name + ".csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _metadata(config_text, extra=None):
    meta = {"code_version": __version__, "config_echo": config_text}
    if extra:
        meta.update(extra)
    return meta


def _grid_diag(grid):
    return {k: (float(v) if np.isscalar(v) else v)
            for k, v in grid.diagnostics.items()}


def cmd_friction_sphere(cfg, args, outdir, config_text):
    sec = cfg["friction-sphere"]
    model = _parse_material(sec["material"])
    R = float(sec["r"])
    l_max = args.lmax or int(sec.get("l_max", "40"))
    rel_tol = args.tol or float(sec.get("rel_tol", "1e-8"))
    if "t_min" in sec:
        temps = np.geomspace(float(sec["t_min"]), float(sec["t_max"]),
                             int(sec.get("n_t", "9")))
    else:
        temps = np.asarray([float(sec.get("t", "300"))])

    rows, gammas, ratios = [], [], []
    converged = True
    for T in temps:
        grid = build_grid(T, rel_tol, x_max_hint=60.0)
        res = sphere.sphere_friction(model, R, T, l_max=l_max, grid=grid)
        converged &= res.converged
        gammas.append(res.gamma)
        if model.is_mirror:
            ratios.append(res.gamma / sphere.mirror_friction_asymptote(R, T))
        rows.append((float(T), res.gamma, 0.0))
        emission = sphere.sphere_emission(model, R, T, l_max=l_max, grid=grid)
    slope = None
    if temps.size > 1:
        slope = float(np.polyfit(np.log(temps), np.log(gammas), 1)[0])
    last = sphere.sphere_friction(model, R, float(temps[-1]), l_max=l_max)
    payload = {
        "meta": _metadata(config_text, {"grid": _grid_diag(grid)}),
        "R": R,
        "l_max": l_max,
        "temperatures": [float(t) for t in temps],
        "gamma": [float(g) for g in gammas],
        "per_l": [float(v) for v in last.per_l],
        "tail_estimate": last.tail_estimate,
        "emission_last_T": emission,
        "analytic_ratio": (float(np.mean(ratios)) if ratios else None),
        "slope": slope,
    }
    _write_json(outdir, "friction_sphere", payload)
    _write_csv(outdir, "friction_sphere_gamma", rows,
               header=("T_K", "gamma_Ns_per_m", "yerr"))
    if not converged:
        return EXIT_CONVERGENCE
    return EXIT_OK


def cmd_emission_sphere(cfg, args, outdir, config_text):
    sec = cfg["emission-sphere"]
    model = _parse_material(sec["material"])
    R = float(sec["r"])
    T = float(sec.get("t", "300"))
    l_max = args.lmax or int(sec.get("l_max", "40"))
    rel_tol = args.tol or float(sec.get("rel_tol", "1e-8"))
    grid = build_grid(T, rel_tol, x_max_hint=60.0)
    P = sphere.sphere_emission(model, R, T, l_max=l_max, grid=grid)
    payload = {
        "meta": _metadata(config_text, {"grid": _grid_diag(grid)}),
        "R": R, "T": T, "l_max": l_max,
        "emitted_power_W": P,
    }
    _write_json(outdir, "emission_sphere", payload)
    return EXIT_OK


def cmd_conductance(cfg, args, outdir, config_text):
    cluster, T = _parse_cluster(cfg)
    sec = cfg["conductance"] if "conductance" in cfg else {}
    T = float(sec.get("t", str(T)))
    rel_tol = args.tol or float(sec.get("rel_tol", "1e-8"))
    grid = build_grid(T, rel_tol)
    k, diag = dipoles.gk_conductance(cluster, T, grid=grid)
    dF, fdiag = dipoles.force_response(cluster, T, grid=grid)
    payload = {
        "meta": _metadata(config_text, {
            "grid": _grid_diag(grid),
            "condition_numbers": {key: v for key, v in diag.items()
                                  if key.startswith("cond")},
        }),
        "T": T,
        "k_W_per_K": k.tolist(),
        "k_correlation_route": diag["k_corr"].tolist(),
        "gk_residual": diag["gk_discrepancy"],
        "dF_dT_N_per_K": dF.tolist(),
        "dF_dT_correlation_route": fdiag["dF_corr"].tolist(),
        "force_residual": fdiag["force_discrepancy"],
    }
    _write_json(outdir, "conductance", payload)
    spectrum = dipoles._im_tr_m(dipoles.Assembly(cluster, grid), 1, 2)
    _write_csv(outdir, "conductance_spectrum",
               [(float(w), float(v), 0.0) for w, v in zip(grid.nodes, spectrum)],
               header=("omega_rad_s", "im_tr_transfer", "yerr"))
    if max(payload["gk_residual"], payload["force_residual"]) > RESIDUAL_TOL:
        return EXIT_RESIDUAL
    return EXIT_OK


def cmd_onsager(cfg, args, outdir, config_text):
    cluster, T = _parse_cluster(cfg)
    sec = cfg["onsager"] if "onsager" in cfg else {}
    T = float(sec.get("t", str(T)))
    rel_tol = args.tol or float(sec.get("rel_tol", "1e-8"))
    grid = build_grid(T, rel_tol)
    residual, parts = dipoles.onsager_check(cluster, T, grid=grid)
    g1, _ = dipoles.friction(cluster, T, grid=grid)
    g2, _ = dipoles.friction_via_linear_response(cluster, T, grid=grid)
    scale = max(float(np.max(np.abs(g1))), 1e-300)
    friction_residual = float(np.max(np.abs(g1 - g2)) / scale)
    payload = {
        "meta": _metadata(config_text, {"grid": _grid_diag(grid)}),
        "T": T,
        "onsager_residual": residual,
        "dHdv": parts["dHdv"].tolist(),
        "minus_T_dFdT": parts["minus_T_dFdT"].tolist(),
        "friction": g1.tolist(),
        "friction_linear_response": g2.tolist(),
        "friction_residual": friction_residual,
    }
    _write_json(outdir, "onsager", payload)
    if max(residual, friction_residual) > RESIDUAL_TOL:
        return EXIT_RESIDUAL
    return EXIT_OK


def cmd_oracle(cfg, args, outdir, config_text):
    cluster, T = _parse_cluster(cfg)
    sec = cfg["oracle"] if "oracle" in cfg else {}
    T = float(sec.get("t", str(T)))
    seed = args.seed if args.seed is not None else int(sec.get("seed", "0"))
    n_samples = int(sec.get("n_samples", "128"))
    n_steps = int(sec.get("n_steps", str(2**14)))
    rel_tol = args.tol or float(sec.get("rel_tol", "1e-8"))
    grid = build_grid(T, rel_tol, x_max_hint=60.0)

    ens = stochastic.sample_fields(cluster, T, n_steps=n_steps,
                                   n_samples=n_samples, seed=seed)
    k_est, k_err = stochastic.gk_estimate(ens)
    g_est, g_err = stochastic.kirkwood_estimate(ens)
    k_an, _ = dipoles.gk_conductance(cluster, T, grid=grid)
    g_an, _ = dipoles.friction(cluster, T, grid=grid)
    payload = {
        "meta": _metadata(config_text, {
            "grid": _grid_diag(grid),
            "n_samples": n_samples, "n_steps": n_steps, "seed": seed,
            "clipped_eigenvalues": ens.diagnostics["n_clipped"],
        }),
        "T": T,
        "k_estimate": k_est.tolist(),
        "k_stderr": k_err.tolist(),
        "k_analytic": k_an.tolist(),
        "gamma_estimate": g_est.tolist(),
        "gamma_stderr": g_err.tolist(),
        "gamma_analytic": g_an.tolist(),
    }
    _write_json(outdir, "oracle", payload)
    H = ens.H - ens.H.mean(axis=2, keepdims=True)
    corr = stochastic._correlation(H[:, 0], H[:, 0])
    mean, sem = stochastic._running_integral(corr, ens.dt)
    step = max(1, mean.size // 400)
    _write_csv(outdir, "oracle_running_integral",
               [(float(i * ens.dt), float(mean[i]), float(sem[i]))
                for i in range(0, mean.size, step)],
               header=("t_s", "running_integral", "yerr"))
    return EXIT_OK


def cmd_timescale(cfg, args, outdir, config_text):
    if "timescale" not in cfg:
        raise ConfigError("missing [timescale] section")
    sec = cfg["timescale"]
    R = float(sec["r"])
    gap = float(sec["gap"])
    T = float(sec.get("t", "300"))
    if gap <= 0:
        raise ConfigError("gap must be positive")
    if "c_v" not in sec:
        raise ConfigError("missing c_v (volumetric heat capacity, J/(m^3 K))")
    c_v = float(sec["c_v"])
    model = _parse_material(sec.get("material", "constant 11.7+0.1j"))
    plate = _parse_material(sec.get("plate_material", "constant 11.7+0.1j"))
    rel_tol = args.tol or float(sec.get("rel_tol", "1e-6"))
    grid = build_grid(T, rel_tol)
    k_cond = dipoles.dipole_plate_conductance(model, R, T, gap, plate, grid=grid)
    C = c_v * (4.0 / 3.0) * np.pi * R**3
    tau = C / k_cond if k_cond > 0 else float("inf")
    payload = {
        "meta": _metadata(config_text, {"grid": _grid_diag(grid)}),
        "R": R, "gap": gap, "T": T, "c_v": c_v,
        "k_W_per_K": k_cond,
        "C_J_per_K": C,
        "tau_s": tau,
    }
    _write_json(outdir, "timescale", payload)
    return EXIT_OK


COMMANDS = {
    "friction-sphere": cmd_friction_sphere,
    "emission-sphere": cmd_emission_sphere,
    "conductance": cmd_conductance,
    "onsager": cmd_onsager,
    "oracle": cmd_oracle,
    "timescale": cmd_timescale,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="emfluct",
        description="Fluctuational-electrodynamics calculations for spheres "
                    "and point-scatterer clusters.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="config file path")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--lmax", type=int, default=None)
    parser.add_argument("--tol", type=float, default=None)
    args = parser.parse_args(argv)

    try:
        with open(args.config, encoding="utf-8") as fh:
            config_text = fh.read()
        cfg = configparser.ConfigParser(inline_comment_prefixes=("#",))
        cfg.read_string(config_text)
    except (OSError, configparser.Error) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    os.makedirs(args.out, exist_ok=True)
    try:
        return COMMANDS[args.command](cfg, args, args.out, config_text)
    except (ConfigError, KeyError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RuntimeError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
