"""Command-line front end: reproducible experiments from a config file.

Subcommands: kink, multikink, evolve, construct, boost, verify, spectrum.
Exit codes: 0 success, 2 configuration error, 3 numerical failure. All
JSON outputs embed the resolved configuration, the seed and the package
version; all randomness is derived from the single seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import ansatz, construct, evolve, kink, lorentz, spectral
from .config import ExperimentConfig
from .errors import ConfigError, MultikinkError, NumericsError
from .numerics import random_pair_field


def _write_json(path: Path, payload: dict, cfg: ExperimentConfig, seed: int):
    doc = dict(payload)
    doc["artifact_version"] = __version__
    doc["config"] = cfg.resolved
    doc["seed"] = seed
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _write_csv(path: Path, header: list[str], columns: list[np.ndarray]):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def _grid_from_config(cfg: ExperimentConfig):
    x_min = cfg.get_float("grid", "x_min", required=True)
    x_max = cfg.get_float("grid", "x_max", required=True)
    dx = cfg.get_float("grid", "dx", default=0.02)
    n = int(round((x_max - x_min) / dx))
    return x_min + dx * np.arange(n + 1)


def cmd_kink(cfg: ExperimentConfig, out: Path, seed: int) -> None:
    model = cfg.build_model()
    table = cfg.build_table(model)
    n = cfg.get_int("kink", "n", default=0)
    n_prime = cfg.get_int("kink", "n_prime", default=1)
    dx = cfg.get_float("multikink", "profile_dx", default=0.01)
    half_width = cfg.get_float("multikink", "half_width", default=None)
    profile = kink.kink_profile(model, table, n, n_prime, half_width=half_width, dx=dx)
    out.mkdir(parents=True, exist_ok=True)
    profile.to_csv(out / "profile.csv")
    left, right = kink.fit_tails(profile)
    _write_json(out / "tails.json", {
        "left": {"fitted_rate": left.fitted_rate, "expected_rate": left.expected_rate,
                 "fit_residual": left.fit_residual},
        "right": {"fitted_rate": right.fitted_rate, "expected_rate": right.expected_rate,
                  "fit_residual": right.fit_residual},
    }, cfg, seed)
    e_bogomolny = kink.kink_energy(model, table, n, n_prime)
    e_grid = kink.potential_energy_of_profile(profile)
    _write_json(out / "energy.json", {
        "energy": e_bogomolny,
        "grid_potential_energy": e_grid,
        "relative_gap": abs(e_grid - e_bogomolny) / e_bogomolny,
    }, cfg, seed)


def cmd_multikink(cfg: ExperimentConfig, out: Path, seed: int) -> None:
    model = cfg.build_model()
    table = cfg.build_table(model)
    params = cfg.build_params(model, table)
    grid = _grid_from_config(cfg)
    t = cfg.get_float("grid", "t_start", default=0.0)
    state = ansatz.multikink(params, t, grid)
    _write_csv(out / "multikink.csv", ["x", "phi", "phi_dot"],
               [grid, state.phi, state.phi_dot])
    sector = evolve.detect_sector(state, table)
    _write_json(out / "sector.json", {
        "sector": list(sector), "t": t,
        "boundary_values": [float(state.phi[0]), float(state.phi[-1])],
    }, cfg, seed)


def cmd_evolve(cfg: ExperimentConfig, out: Path, seed: int) -> None:
    model = cfg.build_model()
    table = cfg.build_table(model)
    params = cfg.build_params(model, table)
    grid = _grid_from_config(cfg)
    t_start = cfg.get_float("grid", "t_start", default=0.0)
    t_end = cfg.get_float("grid", "t_end", required=True)
    dx = float(grid[1] - grid[0])
    cfl = cfg.get_float("grid", "cfl", default=0.9)
    econf = evolve.EvolveConfig(
        dt=cfl * dx, t_end=t_end,
        snapshot_every=cfg.get_int("grid", "snapshot_every", default=25))
    state = ansatz.multikink(params, t_start, grid)
    slab = evolve.evolve_nonlinear(state, model, econf)
    slab.save(out / "slab")
    energies = np.array([evolve.energy(slab.state(i), model) for i in range(len(slab))])
    _write_csv(out / "energy_series.csv", ["t", "E", "E_p", "E_k"],
               [slab.times, energies[:, 0], energies[:, 1], energies[:, 2]])
    drift = float(np.max(np.abs(energies[:, 0] - energies[0, 0])))
    _write_json(out / "evolve.json", {
        "energy_drift": drift,
        "energy_initial": float(energies[0, 0]),
        "sector": list(evolve.detect_sector(slab.state(len(slab) - 1), table)),
        "snapshots": len(slab),
    }, cfg, seed)


def _construct_from_config(cfg: ExperimentConfig, params):
    sconf = cfg.build_solver_config()
    psi, rep = construct.fixed_point(
        params, sconf,
        T=cfg.get_auto_float("construct", "T"),
        delta=cfg.get_auto_float("construct", "delta"),
        tol=cfg.get_float("construct", "tol", default=1e-8),
        max_iter=cfg.get_int("construct", "max_iter", default=25),
        t_final=cfg.get_auto_float("construct", "t_final"))
    return sconf, psi, rep


def cmd_construct(cfg: ExperimentConfig, out: Path, seed: int) -> None:
    model = cfg.build_model()
    table = cfg.build_table(model)
    params = cfg.build_params(model, table)
    sconf, psi, rep = _construct_from_config(cfg, params)
    psi.save(out / "psi_slab")
    _write_json(out / "report.json", {"report": rep.to_dict()}, cfg, seed)
    norms = construct._snapshot_energy_norms(psi)
    _write_csv(out / "decay_fit.csv", ["t", "energy_norm"], [psi.times, norms])


def cmd_boost(cfg: ExperimentConfig, out: Path, seed: int) -> None:
    model = cfg.build_model()
    table = cfg.build_table(model)
    params = cfg.build_params(model, table)
    boost = cfg.build_boost()
    boosted = lorentz.boost_params(params, boost)
    back = lorentz.boost_params(boosted, boost.inverse)
    round_trip = max(
        max(abs(a - b) for a, b in zip(back.velocities, params.velocities)),
        max(abs(a - b) for a, b in zip(back.shifts, params.shifts)))
    tp, xp = 2.0, -1.5
    t_, x_ = lorentz.BoostSpec(v=boost.v).unprimed(tp, xp)
    _write_json(out / "boosted_params.json", {
        "velocities": list(boosted.velocities),
        "shifts": list(boosted.shifts),
        "round_trip_error": round_trip,
        "interval_error": abs((t_ * t_ - x_ * x_) - (tp * tp - xp * xp)),
    }, cfg, seed)


def cmd_spectrum(cfg: ExperimentConfig, out: Path, seed: int) -> None:
    model = cfg.build_model()
    table = cfg.build_table(model)
    n = cfg.get_int("kink", "n", default=0)
    n_prime = cfg.get_int("kink", "n_prime", default=1)
    x_half = cfg.get_float("spectrum", "x_half", default=15.0)
    dx = cfg.get_float("spectrum", "dx", default=0.01)
    k = cfg.get_int("spectrum", "k", default=4)
    grid = np.arange(-x_half, x_half + 1e-9, dx)
    disc = spectral.build_operator(model, table, n, n_prime, grid)
    vals, vecs = spectral.low_spectrum(disc, k)
    _write_csv(out / "eigenpairs.csv", ["x"] + [f"v{i}" for i in range(k)],
               [grid] + [vecs[:, i] for i in range(k)])
    ker = disc.kernel_direction / np.linalg.norm(disc.kernel_direction)
    u0 = vecs[:, 0] / np.linalg.norm(vecs[:, 0])
    lam0 = spectral.coercivity_constant(disc, disc.kernel_direction, seed=seed)
    _write_json(out / "spectrum.json", {
        "eigenvalues": [float(v) for v in vals],
        "kernel_cosine_similarity": float(abs(np.dot(u0, ker))),
        "coercivity_lambda0": lam0,
    }, cfg, seed)


def cmd_verify(cfg: ExperimentConfig, out: Path, seed: int) -> None:
    model = cfg.build_model()
    table = cfg.build_table(model)
    params = cfg.build_params(model, table)
    rng = np.random.default_rng(seed)
    result: dict = {}

    if cfg.get_bool("verify", "energy_drift", default=True):
        grid = _grid_from_config(cfg)
        dx = float(grid[1] - grid[0])
        t_start = cfg.get_float("grid", "t_start", default=0.0)
        t_end = cfg.get_float("grid", "t_end", default=t_start + 10.0)
        econf = evolve.EvolveConfig(
            dt=cfg.get_float("grid", "cfl", default=0.9) * dx, t_end=t_end,
            snapshot_every=cfg.get_int("grid", "snapshot_every", default=25))
        state = ansatz.multikink(params, t_start, grid)
        slab = evolve.evolve_nonlinear(state, model, econf)
        energies = [evolve.energy(slab.state(i), model)[0] for i in range(len(slab))]
        result["energy_drift"] = {
            "initial": energies[0],
            "max_drift": float(np.max(np.abs(np.array(energies) - energies[0]))),
            "sector": list(evolve.detect_sector(slab.state(len(slab) - 1), table)),
        }

    if cfg.get_bool("verify", "zero_modes", default=True):
        grid = _grid_from_config(cfg)
        dx = float(grid[1] - grid[0])
        t0 = max(cfg.get_float("grid", "t_start", default=0.0), 1.0)
        if params.K >= 2:
            # the pairing laws hold once the kinks are well separated; start
            # where the free forcing has become small
            t0 = max(t0, construct.default_start_time(params, grid))
        econf = evolve.EvolveConfig(dt=0.9 * dx, t_end=t0 + 10.0, snapshot_every=10)
        h0 = random_pair_field(grid, rng)
        slab, pairings = evolve.zero_mode_drift(params, h0, grid, t0, econf)
        drift = {}
        for j in range(1, params.K + 1):
            p0 = pairings[:, j - 1, 0]
            p1 = pairings[:, j - 1, 1]
            integral = np.concatenate([[0.0], np.cumsum(
                0.5 * (p0[1:] + p0[:-1]) * np.diff(slab.times))])
            law = p1 - p1[0] + integral / params.gammas[j - 1]
            drift[f"kink_{j}"] = {
                "psi0_drift": float(np.max(np.abs(p0 - p0[0]))),
                "psi1_law_residual": float(np.max(np.abs(law))),
                "psi0_scale": float(np.max(np.abs(p0))),
            }
        result["zero_modes"] = drift

    if cfg.get_bool("verify", "coercivity", default=True):
        grid = _grid_from_config(cfg)
        dx = float(grid[1] - grid[0])
        n_samples = cfg.get_int("verify", "coercivity_samples", default=100)
        t_eval = max(cfg.get_float("grid", "t_end", default=10.0), 1.0)
        duals = []
        for j in range(1, params.K + 1):
            m = ansatz.zero_modes(params, j, t_eval, grid)
            duals.extend([m.psi0, m.psi1])
        edge = min(params.table.masses) ** 2
        worst = np.inf
        for _ in range(n_samples):
            h = random_pair_field(grid, rng)
            h = ansatz.remove_projections(h, duals, dx)
            if params.K == 1:
                q = ansatz.quad_form_single(params, t_eval, h, grid)
            else:
                q = ansatz.quad_form_multi(params, t_eval, h, grid)
            worst = min(worst, q / ansatz.energy_norm_sq(h, dx))
        result["coercivity"] = {"min_rayleigh_ratio": float(worst),
                                "continuum_edge": float(edge),
                                "samples": n_samples, "t": t_eval}

    if cfg.has("boost") and cfg.get_bool("verify", "covariance", default=True):
        boost = cfg.build_boost()
        sconf = cfg.build_solver_config()
        result["covariance"] = lorentz.verify_covariance(
            params, boost, sconf,
            window_t=cfg.get_float("verify", "window_t", default=5.0),
            tol=cfg.get_float("construct", "tol", default=1e-8),
            construct_kwargs={
                "T": cfg.get_auto_float("construct", "T"),
                "delta": cfg.get_auto_float("construct", "delta"),
                "t_final": cfg.get_auto_float("construct", "t_final"),
            })

    _write_json(out / "verification.json", result, cfg, seed)


_COMMANDS = {
    "kink": cmd_kink,
    "multikink": cmd_multikink,
    "evolve": cmd_evolve,
    "construct": cmd_construct,
    "boost": cmd_boost,
    "verify": cmd_verify,
    "spectrum": cmd_spectrum,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="multikink",
        description="Kinks, multikink fields and pure multi-soliton construction")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="path to the experiment config file")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    args = parser.parse_args(argv)
    try:
        cfg = ExperimentConfig(args.config)
        seed = cfg.seed(args.seed)
        out = Path(args.out) if args.out else Path(cfg.get_str("output", "directory", default="out"))
        _COMMANDS[args.command](cfg, out, seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except MultikinkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
