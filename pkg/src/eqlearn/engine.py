"""Trajectory and ensemble drivers built on the trajectory kernel.

A trajectory alternates, each period, a decision stage (clip beliefs, clear
the labor market, choose inputs) with a learning stage (observe realized
production, update the estimate).  An ensemble runs independent replications
on keyed shock streams and aggregates in replication order, so results do not
depend on scheduling or worker count.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import kernel
from .equilibrium import SolverError
from .model import EconomyConfig, draw_shock_matrix, lognormal_moment, mean_productivity
from .moments import expected_belief_path

TRAJECTORY_COLUMNS = ("t", "sector", "w", "l", "x", "p", "zeta", "zeta_hat", "gdp", "labor_share")


@dataclass(frozen=True)
class TrajectoryRecord:
    """One period of one trajectory (per-sector vectors)."""

    t: int
    w: float
    labor: tuple[float, ...]
    output: tuple[float, ...]
    prices: tuple[float, ...]
    zeta: tuple[float, ...]
    zeta_hat: tuple[float, ...]
    gdp: float
    labor_share: float


@dataclass(frozen=True)
class TrajectoryResult:
    """Dense arrays for a whole trajectory plus final belief statistics."""

    w: np.ndarray  # (T,)
    delta: np.ndarray  # (T,) realized labor supply
    labor: np.ndarray  # (T, n)
    output: np.ndarray
    prices: np.ndarray
    profit: np.ndarray
    zeta: np.ndarray  # belief held when period t decisions were made
    zeta_hat: np.ndarray
    gdp: np.ndarray
    labor_share: np.ndarray
    final_zeta: np.ndarray  # (n,) belief after the last update
    sum_zs: np.ndarray  # (n,) PD running sums (zeros in PI / frozen runs)
    sum_zz: np.ndarray
    replication: int

    @property
    def horizon(self) -> int:
        return len(self.w)

    @property
    def n_sectors(self) -> int:
        return self.labor.shape[1]

    def records(self) -> Iterable[TrajectoryRecord]:
        for t in range(self.horizon):
            yield TrajectoryRecord(
                t=t + 1,
                w=float(self.w[t]),
                labor=tuple(self.labor[t]),
                output=tuple(self.output[t]),
                prices=tuple(self.prices[t]),
                zeta=tuple(self.zeta[t]),
                zeta_hat=tuple(self.zeta_hat[t]),
                gdp=float(self.gdp[t]),
                labor_share=float(self.labor_share[t]),
            )


def _mode_code(config: EconomyConfig, frozen_beliefs: bool) -> int:
    if frozen_beliefs:
        return kernel.MODE_FROZEN
    return kernel.MODE_PD if config.learning_mode == "PD" else kernel.MODE_PI


def _param_arrays(config: EconomyConfig, alpha: float) -> dict[str, np.ndarray]:
    sec = config.sectors
    return {
        "zeta_star": np.array([s.zeta_star for s in sec]),
        "m": np.array([s.m for s in sec]),
        "sigma": np.array([s.sigma for s in sec]),
        "tau": np.array([s.tau for s in sec]),
        "zeta0": np.array([s.zeta0 for s in sec]),
        "zeta_lo": np.array([s.zeta_lo for s in sec]),
        "zeta_hi": np.array([s.zeta_hi for s in sec]),
        "e_alpha": np.array([lognormal_moment(s.m, s.sigma, alpha) for s in sec]),
    }


def _run_kernel(
    config: EconomyConfig,
    eps: np.ndarray,
    replication: int,
    frozen_beliefs: bool,
    zeta_init: np.ndarray | None,
) -> TrajectoryResult:
    arrays = _param_arrays(config, config.alpha)
    if zeta_init is None:
        if frozen_beliefs:
            zeta_init = arrays["zeta_star"].copy()
        else:
            zeta_init = np.maximum(arrays["zeta0"], 0.0)
    endog_r = config.endogenous_labor if config.endogenous_labor is not None else 0.0
    try:
        out = kernel.simulate_trajectory(
            arrays["zeta_star"],
            arrays["m"],
            arrays["sigma"],
            arrays["tau"],
            arrays["zeta0"],
            arrays["zeta_lo"],
            arrays["zeta_hi"],
            arrays["e_alpha"],
            config.alpha,
            _mode_code(config, frozen_beliefs),
            config.resolve_delta(),
            config.resolve_l0(),
            eps,
            endog_r,
            zeta_init,
        )
    except kernel.KernelSolverError as exc:
        raise SolverError(str(exc)) from exc
    return TrajectoryResult(
        w=out["w"],
        delta=out["delta"],
        labor=out["labor"],
        output=out["output"],
        prices=out["prices"],
        profit=out["profit"],
        zeta=out["zeta"],
        zeta_hat=out["zeta_hat"],
        gdp=out["gdp"],
        labor_share=out["labor_share"],
        final_zeta=out["final_zeta"],
        sum_zs=out["sum_zs"],
        sum_zz=out["sum_zz"],
        replication=replication,
    )


def run_trajectory(
    config: EconomyConfig,
    replication: int = 0,
    frozen_beliefs: bool = False,
    zeta_init: Sequence[float] | None = None,
) -> TrajectoryResult:
    """Simulate one replication on its keyed shock stream.

    ``frozen_beliefs`` disables learning and pins the belief at the true
    elasticity (the perfect-knowledge baseline) unless ``zeta_init`` pins it
    elsewhere.
    """
    eps = draw_shock_matrix(config, replication)
    init = None if zeta_init is None else np.asarray(zeta_init, dtype=float)
    return _run_kernel(config, eps, replication, frozen_beliefs, init)


def mean_field_trajectory(config: EconomyConfig) -> TrajectoryResult:
    """Deterministic run with every shock pinned at its expectation."""
    log_q = np.array([math.log(mean_productivity(s)) for s in config.sectors])
    eps = np.tile(log_q, (config.horizon, 1))
    return _run_kernel(config, eps, replication=-1, frozen_beliefs=False, zeta_init=None)


@dataclass(frozen=True)
class EnsembleStats:
    """Aggregates over independent replications.

    ``mean_abs_err`` averages the realized terminal error |zeta(T) - truth|
    per sector; ``expected_path_err`` is its deterministic counterpart, the
    closed-form expected estimate evaluated on the mean-field labor path.
    Labor-share moments pool every (replication, period) sample.  The zeta
    band holds the per-period mean and standard deviation of the estimate
    across replications.
    """

    reps: int
    mean_abs_err: np.ndarray  # (n,)
    expected_path_err: np.ndarray  # (n,)
    labor_share_mean: float
    labor_share_sd: float
    zeta_band_mean: np.ndarray  # (T, n)
    zeta_band_sd: np.ndarray  # (T, n)
    terminal_zeta_mean: np.ndarray  # (n,)


def expected_terminal_error(config: EconomyConfig) -> np.ndarray:
    """|E[zeta(T+1)] - truth| per sector along the mean-field labor path."""
    traj = mean_field_trajectory(config)
    z_mat = np.log(traj.labor)
    out = np.empty(config.n_sectors)
    for i, sec in enumerate(config.sectors):
        path = expected_belief_path(z_mat[:, i], sec, mode=config.learning_mode)
        out[i] = abs(path[-1] - sec.zeta_star)
    return out


def run_ensemble(
    config: EconomyConfig,
    reps: int,
    workers: int = 1,
    frozen_beliefs: bool = False,
) -> EnsembleStats:
    """Run ``reps`` independent replications and aggregate deterministically.

    Replications own keyed shock streams, and aggregation happens in
    replication order after all workers finish, so the result is identical
    for any ``workers`` value.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")

    def one(rep: int) -> TrajectoryResult:
        return run_trajectory(config, replication=rep, frozen_beliefs=frozen_beliefs)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(reps)))
    else:
        results = [one(rep) for rep in range(reps)]

    n = config.n_sectors
    zeta_star = np.array([s.zeta_star for s in config.sectors])
    abs_err = np.zeros(n)
    terminal = np.zeros(n)
    share_sum = 0.0
    share_sq = 0.0
    share_count = 0
    band_sum = np.zeros((config.horizon, n))
    band_sq = np.zeros((config.horizon, n))
    for res in results:  # replication order: deterministic reduction
        abs_err += np.abs(res.final_zeta - zeta_star)
        terminal += res.final_zeta
        share_sum += float(np.sum(res.labor_share))
        share_sq += float(np.sum(res.labor_share**2))
        share_count += res.horizon
        band_sum += res.zeta
        band_sq += res.zeta**2
    abs_err /= reps
    terminal /= reps
    share_mean = share_sum / share_count
    share_var = max(0.0, share_sq / share_count - share_mean**2)
    band_mean = band_sum / reps
    band_var = np.maximum(0.0, band_sq / reps - band_mean**2)
    if frozen_beliefs:
        expected_err = np.zeros(n)
    else:
        expected_err = expected_terminal_error(config)
    return EnsembleStats(
        reps=reps,
        mean_abs_err=abs_err,
        expected_path_err=expected_err,
        labor_share_mean=share_mean,
        labor_share_sd=math.sqrt(share_var),
        zeta_band_mean=band_mean,
        zeta_band_sd=np.sqrt(band_var),
        terminal_zeta_mean=terminal,
    )


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------


def _fmt(value: float) -> str:
    return repr(float(value))


def write_trajectory_csv(path: str | Path, result: TrajectoryResult) -> None:
    """One row per (period, sector) with the documented column set."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRAJECTORY_COLUMNS)
        for t in range(result.horizon):
            for i in range(result.n_sectors):
                writer.writerow(
                    [
                        t + 1,
                        i,
                        _fmt(result.w[t]),
                        _fmt(result.labor[t, i]),
                        _fmt(result.output[t, i]),
                        _fmt(result.prices[t, i]),
                        _fmt(result.zeta[t, i]),
                        _fmt(result.zeta_hat[t, i]),
                        _fmt(result.gdp[t]),
                        _fmt(result.labor_share[t]),
                    ]
                )


def write_ensemble_csv(path: str | Path, config: EconomyConfig, stats: EnsembleStats) -> None:
    """Summary: one row per sector plus pooled labor-share moments."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "sector",
                "reps",
                "mean_abs_err",
                "expected_path_err",
                "terminal_zeta_mean",
                "labor_share_mean",
                "labor_share_sd",
            ]
        )
        for i in range(config.n_sectors):
            writer.writerow(
                [
                    i,
                    stats.reps,
                    _fmt(stats.mean_abs_err[i]),
                    _fmt(stats.expected_path_err[i]),
                    _fmt(stats.terminal_zeta_mean[i]),
                    _fmt(stats.labor_share_mean),
                    _fmt(stats.labor_share_sd),
                ]
            )


def write_band_csv(path: str | Path, stats: EnsembleStats) -> None:
    """Per-period cross-replication mean and sd of the estimate."""
    t_len, n = stats.zeta_band_mean.shape
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "sector", "zeta_mean", "zeta_sd"])
        for t in range(t_len):
            for i in range(n):
                writer.writerow(
                    [t + 1, i, _fmt(stats.zeta_band_mean[t, i]), _fmt(stats.zeta_band_sd[t, i])]
                )


def write_rows_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
