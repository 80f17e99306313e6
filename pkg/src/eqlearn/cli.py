"""Command-line front end.

Exit codes: 0 success, 1 configuration error, 2 numerical/solver failure.
Every run writes a manifest.json with the resolved configuration, seed,
package version, backend, and wall-clock runtime.  Existing output files are
never overwritten unless --force is given.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, kernel
from .engine import (
    run_ensemble,
    run_trajectory,
    write_band_csv,
    write_ensemble_csv,
    write_rows_csv,
    write_trajectory_csv,
)
from .equilibrium import SolverError
from .highdim import IdentifiabilityError
from .model import ConfigError, EconomyConfig
from .moments import expected_belief_path, pd_moments, pi_moments
from .scenarios import SCENARIO_NAMES, scenario

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2


def _load_config(path: str, seed_override: int | None) -> EconomyConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    config = EconomyConfig.from_json(text)
    if seed_override is not None:
        config = dataclasses.replace(config, seed=seed_override)
    return config


def _prepare_outdir(out: str, names: list[str], force: bool) -> Path:
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not force:
        clashes = [n for n in names if (out_dir / n).exists()]
        if clashes:
            raise ConfigError(
                f"refusing to overwrite {', '.join(clashes)} in {out_dir} (use --force)"
            )
    return out_dir


def _write_manifest(out_dir: Path, command: str, config_dict: dict, seed: int, t0: float) -> None:
    manifest = {
        "command": command,
        "config": config_dict,
        "seed": seed,
        "version": __version__,
        "backend": kernel.BACKEND,
        "runtime_seconds": time.monotonic() - t0,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _cmd_simulate(args: argparse.Namespace) -> int:
    t0 = time.monotonic()
    config = _load_config(args.config, args.seed)
    out_dir = _prepare_outdir(args.out, ["trajectory.csv", "manifest.json"], args.force)
    result = run_trajectory(config, replication=args.replication)
    write_trajectory_csv(out_dir / "trajectory.csv", result)
    _write_manifest(out_dir, "simulate", config.to_dict(), config.seed, t0)
    return EXIT_OK


def _cmd_ensemble(args: argparse.Namespace) -> int:
    t0 = time.monotonic()
    config = _load_config(args.config, args.seed)
    out_dir = _prepare_outdir(args.out, ["ensemble.csv", "zeta_band.csv", "manifest.json"], args.force)
    stats = run_ensemble(config, reps=args.reps, workers=args.workers)
    write_ensemble_csv(out_dir / "ensemble.csv", config, stats)
    write_band_csv(out_dir / "zeta_band.csv", stats)
    _write_manifest(out_dir, "ensemble", config.to_dict(), config.seed, t0)
    return EXIT_OK


def _cmd_moments(args: argparse.Namespace) -> int:
    t0 = time.monotonic()
    config = _load_config(args.config, args.seed)
    out_dir = _prepare_outdir(args.out, ["moments.csv", "manifest.json"], args.force)
    from .engine import mean_field_trajectory

    traj = mean_field_trajectory(config)
    z_mat = np.log(traj.labor)
    rows = []
    for i, sec in enumerate(config.sectors):
        expected = expected_belief_path(z_mat[:, i], sec, mode=config.learning_mode)
        for t in range(1, config.horizon + 1):
            if config.learning_mode == "PD":
                rep = pd_moments(z_mat[:t, i], sec)
            else:
                rep = pi_moments(expected[t - 1], z_mat[t - 1, i], sec)
            rows.append(
                [t, i, rep.expectation, rep.variance, rep.mode, rep.vbar, rep.phibar,
                 rep.Ftilde, rep.ftilde]
            )
    write_rows_csv(
        out_dir / "moments.csv",
        ["t", "sector", "expectation", "variance", "mode", "vbar", "phibar", "Ftilde", "ftilde"],
        rows,
    )
    _write_manifest(out_dir, "moments", config.to_dict(), config.seed, t0)
    return EXIT_OK


def _cmd_scenario(args: argparse.Namespace) -> int:
    t0 = time.monotonic()
    result = scenario(args.name, seed=args.seed or 0, reps=args.reps)
    names = list(result.tables) + ["manifest.json"]
    out_dir = _prepare_outdir(args.out, names, args.force)
    for fname, (header, rows) in result.tables.items():
        write_rows_csv(out_dir / fname, header, rows)
    _write_manifest(out_dir, f"scenario {args.name}", result.manifest, args.seed or 0, t0)
    return EXIT_OK


def _cmd_highdim(args: argparse.Namespace) -> int:
    t0 = time.monotonic()
    result = scenario("highdim_demo", seed=args.seed or 0, reps=1)
    names = list(result.tables) + ["manifest.json"]
    out_dir = _prepare_outdir(args.out, names, args.force)
    for fname, (header, rows) in result.tables.items():
        write_rows_csv(out_dir / fname, header, rows)
    _write_manifest(out_dir, "highdim", result.manifest, args.seed or 0, t0)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eqlearn",
        description="Multi-sector equilibrium simulation with technology learning",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p: argparse.ArgumentParser, needs_config: bool) -> None:
        if needs_config:
            p.add_argument("--config", required=True, help="path to a JSON economy config")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--force", action="store_true", help="overwrite existing outputs")

    p = sub.add_parser("simulate", help="run one trajectory and write it as CSV")
    add_common(p, needs_config=True)
    p.add_argument("--replication", type=int, default=0)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("ensemble", help="run replications and write summary CSVs")
    add_common(p, needs_config=True)
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_ensemble)

    p = sub.add_parser("moments", help="closed-form estimate moments on the mean-field path")
    add_common(p, needs_config=True)
    p.set_defaults(func=_cmd_moments)

    p = sub.add_parser("scenario", help="run a named preset")
    p.add_argument("name", choices=SCENARIO_NAMES)
    add_common(p, needs_config=False)
    p.add_argument("--reps", type=int, default=100)
    p.set_defaults(func=_cmd_scenario)

    p = sub.add_parser("highdim", help="elasticity-learning demonstration")
    add_common(p, needs_config=False)
    p.set_defaults(func=_cmd_highdim)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, IdentifiabilityError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
