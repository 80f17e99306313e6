"""Core domain types: sector parameters, economy configuration, shocks.

Everything here is an immutable value object; all functions are pure, so
types and operations can be shared freely across threads and replications.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

DEFAULT_BELIEF_FLOOR = 0.05
DEFAULT_BELIEF_CEILING = 0.95


class ConfigError(ValueError):
    """Raised for invalid or malformed configuration input."""


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class SectorParams:
    """Technology and prior-knowledge parameters of one sector.

    ``zeta_star`` is the true output elasticity of labor (returns to scale),
    ``m``/``sigma`` parametrize the log-normal productivity shock, and
    ``zeta0``/``tau`` locate and scale the firm's initial knowledge.  Beliefs
    used for input decisions are clipped to ``[zeta_lo, zeta_hi]``.
    """

    zeta_star: float
    m: float = 0.0
    sigma: float = 0.1
    tau: float = 0.1
    zeta0: float = 0.1
    zeta_lo: float = DEFAULT_BELIEF_FLOOR
    zeta_hi: float = DEFAULT_BELIEF_CEILING

    def __post_init__(self) -> None:
        for name in ("zeta_star", "m", "sigma", "tau", "zeta0", "zeta_lo", "zeta_hi"):
            _require_finite(name, getattr(self, name))
        # sigma == 0 is the documented deterministic-shock degenerate case
        if self.sigma < 0.0:
            raise ConfigError(f"sigma must be >= 0, got {self.sigma}")
        if self.tau <= 0.0:
            raise ConfigError(f"tau must be > 0, got {self.tau}")
        if self.zeta0 < 0.0:
            raise ConfigError(f"zeta0 must be >= 0, got {self.zeta0}")
        if not (0.0 < self.zeta_lo <= self.zeta_star <= self.zeta_hi < 1.0):
            raise ConfigError(
                "need 0 < zeta_lo <= zeta_star <= zeta_hi < 1, got "
                f"lo={self.zeta_lo}, star={self.zeta_star}, hi={self.zeta_hi}"
            )

    @property
    def gamma(self) -> float:
        """Prior-to-noise precision ratio (tau/sigma)^2; inf when sigma == 0."""
        if self.sigma == 0.0:
            return math.inf
        return (self.tau / self.sigma) ** 2


@dataclass(frozen=True)
class ShockDraw:
    """A realized productivity shock: level ``eta`` and its log ``eps``."""

    eta: float
    eps: float


@dataclass(frozen=True)
class Schedule:
    """Per-period schedule: constant, linear growth, or an explicit list.

    Linear growth means value(t) = start + growth * (t - 1) for t = 1..T.
    """

    kind: str
    value: float = 0.0
    start: float = 0.0
    growth: float = 0.0
    values: tuple[float, ...] = ()

    _KINDS = ("constant", "linear-growth", "explicit")

    def __post_init__(self) -> None:
        if self.kind not in self._KINDS:
            raise ConfigError(f"unknown schedule kind {self.kind!r}, expected one of {self._KINDS}")

    def resolve(self, horizon: int) -> np.ndarray:
        if self.kind == "constant":
            return np.full(horizon, float(self.value))
        if self.kind == "linear-growth":
            return self.start + self.growth * np.arange(horizon, dtype=float)
        if len(self.values) < horizon:
            raise ConfigError(
                f"explicit schedule has {len(self.values)} entries, horizon is {horizon}"
            )
        return np.asarray(self.values[:horizon], dtype=float)

    @classmethod
    def constant(cls, value: float) -> "Schedule":
        return cls(kind="constant", value=float(value))

    @classmethod
    def linear(cls, start: float, growth: float) -> "Schedule":
        return cls(kind="linear-growth", start=float(start), growth=float(growth))

    @classmethod
    def explicit(cls, values: Sequence[float]) -> "Schedule":
        return cls(kind="explicit", values=tuple(float(v) for v in values))

    @classmethod
    def from_dict(cls, obj: dict, where: str) -> "Schedule":
        if not isinstance(obj, dict):
            raise ConfigError(f"{where} must be an object with a 'kind' field")
        kind = obj.get("kind")
        allowed = {
            "constant": {"kind", "value"},
            "linear-growth": {"kind", "start", "growth"},
            "explicit": {"kind", "values"},
        }
        if kind not in allowed:
            raise ConfigError(f"{where}.kind must be one of {sorted(allowed)}, got {kind!r}")
        unknown = set(obj) - allowed[kind]
        if unknown:
            raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
        if kind == "constant":
            return cls.constant(obj["value"])
        if kind == "linear-growth":
            return cls.linear(obj["start"], obj.get("growth", 0.0))
        return cls.explicit(obj["values"])

    def to_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value}
        if self.kind == "linear-growth":
            return {"kind": "linear-growth", "start": self.start, "growth": self.growth}
        return {"kind": "explicit", "values": list(self.values)}


# share of the labor supply absorbed by the exogenous sector when the config
# does not pin it down explicitly
DEFAULT_L0_FRACTION = 0.1

_SECTOR_KEYS = {"zeta_star", "m", "sigma", "tau", "zeta0", "zeta_lo", "zeta_hi"}
_CONFIG_KEYS = {
    "alpha",
    "sectors",
    "horizon",
    "labor_supply",
    "l0",
    "learning_mode",
    "endogenous_labor",
    "seed",
}


@dataclass(frozen=True)
class EconomyConfig:
    """Full description of one simulated economy."""

    alpha: float
    sectors: tuple[SectorParams, ...]
    horizon: int
    labor_supply: Schedule
    l0: Schedule | None = None  # None -> DEFAULT_L0_FRACTION * labor_supply
    learning_mode: str = "PD"
    endogenous_labor: float | None = None  # disutility exponent r, > 1
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha < 1.0):
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.sectors:
            raise ConfigError("at least one sector is required")
        if self.horizon < 1:
            raise ConfigError(f"horizon must be >= 1, got {self.horizon}")
        if self.learning_mode not in ("PD", "PI"):
            raise ConfigError(f"learning_mode must be 'PD' or 'PI', got {self.learning_mode!r}")
        if self.endogenous_labor is not None and not self.endogenous_labor > 1.0:
            raise ConfigError(f"endogenous_labor r must be > 1, got {self.endogenous_labor}")
        if not (0 <= int(self.seed) < 2**64):
            raise ConfigError("seed must fit in an unsigned 64-bit integer")
        if self.endogenous_labor is None:
            delta = self.labor_supply.resolve(self.horizon)
            l0 = self.resolve_l0()
            slack = delta - l0
            if np.any(slack <= 0.0) or np.any(l0 < 0.0):
                t = int(np.argmax(slack <= 0.0))
                raise ConfigError(
                    f"labor supply net of the exogenous sector must stay positive; "
                    f"violated at period {t + 1} (delta={delta[t]}, l0={l0[t]})"
                )

    @property
    def n_sectors(self) -> int:
        return len(self.sectors)

    def resolve_delta(self) -> np.ndarray:
        return self.labor_supply.resolve(self.horizon)

    def resolve_l0(self) -> np.ndarray:
        if self.l0 is None:
            return DEFAULT_L0_FRACTION * self.labor_supply.resolve(self.horizon)
        return self.l0.resolve(self.horizon)

    @classmethod
    def from_dict(cls, obj: dict) -> "EconomyConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(obj) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        missing = {"alpha", "sectors", "horizon", "labor_supply", "seed"} - set(obj)
        if missing:
            raise ConfigError(f"missing config keys: {sorted(missing)}")
        sectors = []
        for k, sec in enumerate(obj["sectors"]):
            if not isinstance(sec, dict):
                raise ConfigError(f"sectors[{k}] must be an object")
            unknown = set(sec) - _SECTOR_KEYS
            if unknown:
                raise ConfigError(f"unknown keys in sectors[{k}]: {sorted(unknown)}")
            sectors.append(SectorParams(**sec))
        endog = obj.get("endogenous_labor")
        if endog is not None:
            if not isinstance(endog, dict) or set(endog) != {"r"}:
                raise ConfigError("endogenous_labor must be an object {'r': <float>}")
            endog = float(endog["r"])
        return cls(
            alpha=float(obj["alpha"]),
            sectors=tuple(sectors),
            horizon=int(obj["horizon"]),
            labor_supply=Schedule.from_dict(obj["labor_supply"], "labor_supply"),
            l0=Schedule.from_dict(obj["l0"], "l0") if "l0" in obj else None,
            learning_mode=obj.get("learning_mode", "PD"),
            endogenous_labor=endog,
            seed=int(obj["seed"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "EconomyConfig":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
        return cls.from_dict(obj)

    def to_dict(self) -> dict:
        out: dict = {
            "alpha": self.alpha,
            "sectors": [
                {
                    "zeta_star": s.zeta_star,
                    "m": s.m,
                    "sigma": s.sigma,
                    "tau": s.tau,
                    "zeta0": s.zeta0,
                    "zeta_lo": s.zeta_lo,
                    "zeta_hi": s.zeta_hi,
                }
                for s in self.sectors
            ],
            "horizon": self.horizon,
            "labor_supply": self.labor_supply.to_dict(),
            "learning_mode": self.learning_mode,
            "seed": self.seed,
        }
        if self.l0 is not None:
            out["l0"] = self.l0.to_dict()
        if self.endogenous_labor is not None:
            out["endogenous_labor"] = {"r": self.endogenous_labor}
        return out


def lognormal_moment(m: float, sigma: float, a: float) -> float:
    """E[eta^a] for ln(eta) ~ Normal(m, sigma^2), in closed form.

    Exponents beyond double range yield inf (the moment exists but is not
    representable); downstream solvers reject the resulting demand as a
    numerical failure.
    """
    m = _require_finite("m", m)
    a = _require_finite("a", a)
    sigma = _require_finite("sigma", sigma)
    if sigma < 0.0:
        raise ConfigError(f"sigma must be >= 0, got {sigma}")
    exponent = a * m + 0.5 * (a * sigma) ** 2
    if exponent > 709.0:
        return math.inf
    return math.exp(exponent)


def mean_productivity(params: SectorParams) -> float:
    """Expected shock level q = E[eta] = exp(m + sigma^2 / 2)."""
    return lognormal_moment(params.m, params.sigma, 1.0)


def _stream_key(seed: int, sector: int, replication: int) -> np.ndarray:
    if not (0 <= sector < 2**32 and 0 <= replication < 2**32):
        raise ConfigError("sector and replication indices must fit in 32 bits")
    mixed = (np.uint64(sector) << np.uint64(32)) ^ np.uint64(replication)
    return np.array([np.uint64(seed), mixed], dtype=np.uint64)


@dataclass
class ShockStream:
    """Deterministic shock stream for one (seed, sector, replication) triple.

    Streams are keyed, not seeded sequentially: the Philox counter generator
    is keyed by (seed, sector, replication), so every triple owns an
    independent stream and Monte Carlo results do not depend on the order in
    which replications are evaluated.
    """

    params: SectorParams
    seed: int
    sector: int = 0
    replication: int = 0
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._gen = np.random.Generator(
            np.random.Philox(key=_stream_key(self.seed, self.sector, self.replication))
        )

    def eps(self, count: int) -> np.ndarray:
        """Next ``count`` log-shocks, eps ~ Normal(m, sigma^2)."""
        return self.params.m + self.params.sigma * self._gen.standard_normal(count)

    def draws(self, count: int) -> list[ShockDraw]:
        return [ShockDraw(eta=math.exp(e), eps=e) for e in self.eps(count)]

    def __iter__(self) -> Iterator[ShockDraw]:
        while True:
            yield self.draws(1)[0]


def shock_stream(params: SectorParams, seed: int, sector: int, replication: int) -> ShockStream:
    return ShockStream(params=params, seed=seed, sector=sector, replication=replication)


def draw_shock_matrix(config: EconomyConfig, replication: int) -> np.ndarray:
    """Log-shock matrix eps[t, i] for a whole trajectory, keyed per sector."""
    out = np.empty((config.horizon, config.n_sectors))
    for i, sec in enumerate(config.sectors):
        out[:, i] = shock_stream(sec, config.seed, i, replication).eps(config.horizon)
    return out
