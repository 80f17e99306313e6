"""Named scenario presets and their CSV-ready outputs.

Each scenario resolves to a fully specified configuration (the sources for
these economies leave the labor-supply levels open, so the presets pin them
and the manifest records the choice), runs the engine, and returns tables as
(header, rows) pairs keyed by output filename.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .engine import mean_field_trajectory, run_ensemble, run_trajectory
from .highdim import PD as HD_PD
from .highdim import PI as HD_PI
from .highdim import ElasticityParams, build_signal, hd_map_update, initial_elasticity_state
from .model import ConfigError, EconomyConfig, Schedule, SectorParams
from .moments import expected_belief_path

Table = tuple[list[str], list[list]]


@dataclass
class ScenarioResult:
    name: str
    tables: dict[str, Table]
    manifest: dict = field(default_factory=dict)


# single-sector technology shared by the illustrative scenarios
_BASE_SECTOR = dict(zeta_star=0.5, m=0.0, sigma=0.1, tau=0.1, zeta0=0.1)

# labor-share scenario: slow learning keeps the average share near the level
# implied by the initial belief over the first hundred periods, while the
# belief channel still widens the share distribution relative to the
# perfect-knowledge baseline
_EXAMPLE2_TAU = 0.03
_EXAMPLE2_DELTA = 1.0
_EXAMPLE2_L0 = 0.1


def _single_sector_config(
    horizon: int,
    delta: float,
    l0: float,
    learning_mode: str,
    seed: int,
    **sector_overrides,
) -> EconomyConfig:
    sector = SectorParams(**{**_BASE_SECTOR, **sector_overrides})
    return EconomyConfig(
        alpha=0.5,
        sectors=(sector,),
        horizon=horizon,
        labor_supply=Schedule.constant(delta),
        l0=Schedule.constant(l0),
        learning_mode=learning_mode,
        seed=seed,
    )


def _scenario_example1(seed: int, reps: int, mode: str = "PD") -> ScenarioResult:
    name = "example1" if mode == "PD" else "example4"
    tables: dict[str, Table] = {}
    errors: list[list] = []
    for tau in (0.1, 0.01):
        for zeta0 in (0.1, 0.9):
            config = _single_sector_config(
                horizon=500, delta=10.0, l0=1.0, learning_mode=mode, seed=seed, tau=tau, zeta0=zeta0
            )
            traj = run_trajectory(config)
            rows = [[t + 1, float(traj.zeta[t, 0]), float(traj.zeta_hat[t, 0]), float(traj.w[t])]
                    for t in range(traj.horizon)]
            tables[f"path_tau{tau}_zeta0{zeta0}.csv"] = (["t", "zeta", "zeta_hat", "w"], rows)
            stats = run_ensemble(config, reps=reps)
            errors.append(
                [tau, zeta0, float(stats.mean_abs_err[0]), float(stats.expected_path_err[0])]
            )
    tables["terminal_errors.csv"] = (
        ["tau", "zeta0", "mean_abs_err", "expected_path_err"],
        errors,
    )
    return ScenarioResult(
        name=name,
        tables=tables,
        manifest={"delta": 10.0, "l0": 1.0, "mode": mode, "reps": reps, "horizon": 500},
    )


def _scenario_example2(seed: int, reps: int) -> ScenarioResult:
    tables: dict[str, Table] = {}
    summary: list[list] = []
    for zeta0 in (0.1, 0.5, 0.9):
        config = _single_sector_config(
            horizon=100,
            delta=_EXAMPLE2_DELTA,
            l0=_EXAMPLE2_L0,
            learning_mode="PD",
            seed=seed,
            tau=_EXAMPLE2_TAU,
            zeta0=zeta0,
        )
        stats = run_ensemble(config, reps=reps)
        rows: list[list] = []
        for rep in range(reps):
            traj = run_trajectory(config, replication=rep)
            rows.extend([rep, t + 1, float(traj.labor_share[t])] for t in range(traj.horizon))
        tables[f"labor_share_zeta0{zeta0}.csv"] = (["rep", "t", "labor_share"], rows)
        summary.append([f"learning_{zeta0}", stats.labor_share_mean, stats.labor_share_sd])
    baseline_cfg = _single_sector_config(
        horizon=100,
        delta=_EXAMPLE2_DELTA,
        l0=_EXAMPLE2_L0,
        learning_mode="PD",
        seed=seed,
        tau=_EXAMPLE2_TAU,
        zeta0=0.5,
    )
    baseline = run_ensemble(baseline_cfg, reps=reps, frozen_beliefs=True)
    summary.append(["perfect_knowledge", baseline.labor_share_mean, baseline.labor_share_sd])
    tables["labor_share_summary.csv"] = (["run", "mean", "sd"], summary)
    return ScenarioResult(
        name="example2",
        tables=tables,
        manifest={
            "delta": _EXAMPLE2_DELTA,
            "l0": _EXAMPLE2_L0,
            "tau": _EXAMPLE2_TAU,
            "reps": reps,
            "horizon": 100,
        },
    )


def _scenario_appendix_e(seed: int, reps: int) -> ScenarioResult:
    """Wage-to-price ratio paths at three pinned beliefs (no learning)."""
    tables: dict[str, Table] = {}
    levels: list[list] = []
    for belief in (0.1, 0.5, 0.9):
        config = _single_sector_config(
            horizon=100, delta=10.0, l0=1.0, learning_mode="PD", seed=seed, sigma=1.0
        )
        traj = run_trajectory(config, frozen_beliefs=True, zeta_init=[belief])
        ratio = traj.w / traj.prices[:, 0]
        rows = [[t + 1, float(traj.w[t]), float(traj.prices[t, 0]), float(ratio[t])]
                for t in range(traj.horizon)]
        tables[f"wage_price_belief{belief}.csv"] = (["t", "w", "p", "w_over_p"], rows)
        levels.append([belief, float(np.mean(ratio))])
    tables["wage_price_levels.csv"] = (["belief", "mean_w_over_p"], levels)
    return ScenarioResult(
        name="appendixE",
        tables=tables,
        manifest={"delta": 10.0, "l0": 1.0, "sigma": 1.0, "horizon": 100},
    )


def _scenario_demography(seed: int, reps: int) -> ScenarioResult:
    """Growing labor supply delta(t) = 10 + t keeps information accumulating."""
    sector = SectorParams(**_BASE_SECTOR)
    config = EconomyConfig(
        alpha=0.5,
        sectors=(sector,),
        horizon=500,
        labor_supply=Schedule.linear(start=11.0, growth=1.0),  # delta(t) = 10 + t
        l0=Schedule.constant(1.0),
        learning_mode="PD",
        seed=seed,
    )
    mf = mean_field_trajectory(config)
    z = np.log(mf.labor[:, 0])
    z1 = np.cumsum(z)
    z2 = np.cumsum(z * z)
    expected = expected_belief_path(z, sector, mode="PD")
    stochastic = run_trajectory(config)
    rows = [
        [
            t + 1,
            float(z[t]),
            float(z1[t]),
            float(z2[t]),
            float(expected[t + 1]),
            float(stochastic.zeta[t, 0]),
        ]
        for t in range(config.horizon)
    ]
    return ScenarioResult(
        name="demography",
        tables={
            "demography.csv": (["t", "z", "z_sum", "zsq_sum", "expected_belief", "zeta"], rows)
        },
        manifest={"delta": "10 + t", "l0": 1.0, "horizon": 500},
    )


def _scenario_highdim_demo(seed: int, reps: int) -> ScenarioResult:
    """Elasticity-vector learning traces on exogenous input paths."""
    n = 3
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 0x48D0], dtype=np.uint64)))
    beta_star = rng.uniform(0.1, 0.4, size=(n, n)) + 0.3 * np.eye(n)
    params = ElasticityParams(
        beta_star=beta_star,
        beta0=np.full((n, n), 0.2),
        phi=0.5,
        m=np.zeros(n),
        sigma=np.full(n, 0.1),
        tau=np.full(n, 0.2),
    )
    horizon = 40
    tables: dict[str, Table] = {}
    for memory in (HD_PD, HD_PI):
        rows: list[list] = []
        for i in range(n):
            firm = params.firm(i)
            state = initial_elasticity_state(firm)
            for t in range(horizon):
                y_row = np.exp(rng.uniform(-1.0, 1.0, size=n))
                eps = float(rng.standard_normal())
                s, z = build_signal(y_row, 1.0, firm.phi, eps, firm.beta_star, firm.sigma)
                state = hd_map_update(state, z, s, firm, memory=memory)
                err = float(np.max(np.abs(state.beta - firm.beta_star)))
                rows.append([i, t + 1, err] + [float(v) for v in state.beta])
        header = ["firm", "t", "max_abs_err"] + [f"beta_{j}" for j in range(n)]
        tables[f"elasticity_{memory.lower()}.csv"] = (header, rows)
    return ScenarioResult(
        name="highdim_demo",
        tables=tables,
        manifest={"n": n, "phi": 0.5, "sigma": 0.1, "tau": 0.2, "horizon": horizon},
    )


_SCENARIOS: dict[str, Callable[[int, int], ScenarioResult]] = {
    "example1": lambda seed, reps: _scenario_example1(seed, reps, mode="PD"),
    "example4": lambda seed, reps: _scenario_example1(seed, reps, mode="PI"),
    "example2": _scenario_example2,
    "appendixE": _scenario_appendix_e,
    "demography": _scenario_demography,
    "highdim_demo": _scenario_highdim_demo,
}

SCENARIO_NAMES = tuple(_SCENARIOS)


def scenario(name: str, seed: int = 0, reps: int = 100) -> ScenarioResult:
    """Run a named preset; unknown names are rejected."""
    if name not in _SCENARIOS:
        raise ConfigError(f"unknown scenario {name!r}; expected one of {sorted(_SCENARIOS)}")
    result = _SCENARIOS[name](seed, reps)
    result.manifest.setdefault("seed", seed)
    return result
