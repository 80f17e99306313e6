"""Posterior-mode belief updates about the returns-to-scale parameter.

Two update rules are supported.  Long-memory ("PD") keeps running sums of the
full signal history against a fixed prior; short-memory ("PI") re-centers the
prior at the previous estimate each period and uses only the newest signal.
Both produce the maximizer of a zero-truncated Gaussian posterior, which has
the closed form max(0, (center + gamma * <signal terms>) / (1 + gamma * <scale>)).

Signals are in log space: z = ln(labor input), s = ln(output) - m.  A period
with zero labor carries no information and leaves the state unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

from .model import SectorParams
from .norm import norm_cdf

PD = "PD"
PI = "PI"


@dataclass(frozen=True)
class BeliefState:
    """Current estimate plus the sufficient statistics that produced it.

    ``zeta`` is the truncated-at-zero posterior mode itself (not clipped to
    the decision band; clipping happens only where the belief is acted on).
    The running sums are maintained for PD mode only.
    """

    zeta: float
    mode: str = PD
    pd_sum_zs: float = 0.0
    pd_sum_zz: float = 0.0
    history_len: int = 0

    def __post_init__(self) -> None:
        if self.mode not in (PD, PI):
            raise ValueError(f"mode must be {PD!r} or {PI!r}, got {self.mode!r}")
        if self.zeta < 0.0:
            raise ValueError(f"zeta must be >= 0, got {self.zeta}")
        if self.pd_sum_zz < 0.0:
            raise ValueError("pd_sum_zz cannot be negative")


def initial_belief(params: SectorParams, mode: str = PD) -> BeliefState:
    """Prior-only state: the first-period estimate is the prior location."""
    return BeliefState(zeta=max(0.0, params.zeta0), mode=mode)


def clamp_belief(zeta: float, params: SectorParams) -> float:
    """Clip the estimate to the rule-of-thumb band used for decisions."""
    if zeta < 0.0:
        raise ValueError(f"zeta must be >= 0, got {zeta}")
    return max(params.zeta_lo, min(params.zeta_hi, zeta))


def _check_signal(z: float, s: float) -> None:
    if not (math.isfinite(z) and math.isfinite(s)):
        raise ValueError(f"signals must be finite, got z={z}, s={s}")


def pd_ratio(params: SectorParams, sum_zs: float, sum_zz: float) -> float:
    """Untruncated posterior-mode ratio from PD sufficient statistics."""
    if params.sigma == 0.0:
        # exact-signal limit: the prior washes out entirely once z != 0
        return sum_zs / sum_zz if sum_zz > 0.0 else params.zeta0
    g = params.gamma
    return (params.zeta0 + g * sum_zs) / (1.0 + g * sum_zz)


def pd_update(state: BeliefState, z: float | None, s: float, params: SectorParams) -> BeliefState:
    """Absorb one (z, s) observation into the long-memory posterior.

    ``z=None`` signals a zero-labor period: no information, state unchanged.
    """
    if state.mode != PD:
        raise ValueError("pd_update requires a PD-mode state")
    if z is None:
        return state
    _check_signal(z, s)
    sum_zs = state.pd_sum_zs + z * s
    sum_zz = state.pd_sum_zz + z * z
    zeta = max(0.0, pd_ratio(params, sum_zs, sum_zz))
    return BeliefState(
        zeta=zeta,
        mode=PD,
        pd_sum_zs=sum_zs,
        pd_sum_zz=sum_zz,
        history_len=state.history_len + 1,
    )


def pi_update(state: BeliefState, z: float | None, s: float, params: SectorParams) -> BeliefState:
    """Short-memory update: prior re-centered at the previous estimate."""
    if state.mode != PI:
        raise ValueError("pi_update requires a PI-mode state")
    if z is None:
        return state
    _check_signal(z, s)
    if params.sigma == 0.0:
        raw = s / z if z != 0.0 else state.zeta
    else:
        g = params.gamma
        raw = (state.zeta + g * z * s) / (1.0 + g * z * z)
    return replace(state, zeta=max(0.0, raw), history_len=state.history_len + 1)


def update(state: BeliefState, z: float | None, s: float, params: SectorParams) -> BeliefState:
    return pd_update(state, z, s, params) if state.mode == PD else pi_update(state, z, s, params)


# ---------------------------------------------------------------------------
# unified one-step representation: both rules are a convex combination of the
# previous estimate and a synthetic observation centered at the truth
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UnifiedWeights:
    """Convex weight and reporting terms of the one-step recursion.

    ``noise_sd`` is the standard deviation of the synthetic observation
    (its square is the variance term built from A and B).
    """

    a: float
    center: float
    noise_sd: float
    A_val: float
    B_val: float

    def __post_init__(self) -> None:
        if not (0.0 < self.a <= 1.0):
            raise ValueError(f"weight a must lie in (0, 1], got {self.a}")
        if self.noise_sd < 0.0:
            raise ValueError("noise_sd must be >= 0")


def information_terms(u: float, w: float, alpha: float, params: SectorParams) -> tuple[float, float, float]:
    """Reporting terms (A, B, noise sd) of the unified recursion.

    A and B decompose the log of the demand response to the clipped belief u
    at wage w; the synthetic observation scatters with sd sigma / |A + B|.
    """
    from .model import lognormal_moment

    if not (0.0 < u < 1.0):
        raise ValueError(f"u must lie in (0, 1), got {u}")
    a_val = math.log(lognormal_moment(params.m, params.sigma, alpha)) / (1.0 - u)
    b_val = math.log(u / w) / ((1.0 - u) * alpha)
    denom = a_val + b_val
    noise_sd = math.inf if denom == 0.0 else abs(params.sigma / denom)
    return a_val, b_val, noise_sd


def pd_weight(params: SectorParams, prior_sum_zz: float, z: float) -> float:
    """PD one-step weight from the pre-update sum of squared signals."""
    g = params.gamma
    if math.isinf(g):
        return 1.0 if z == 0.0 else prior_sum_zz / (prior_sum_zz + z * z)
    return (1.0 + g * prior_sum_zz) / (1.0 + g * (prior_sum_zz + z * z))


def pi_weight(params: SectorParams, z: float) -> float:
    g = params.gamma
    if math.isinf(g):
        return 1.0 if z == 0.0 else 0.0
    return 1.0 / (1.0 + g * z * z)


def unified_step(zeta_t: float, weights: UnifiedWeights | float, eps_star: float) -> float:
    """One recursion step (a * zeta + (1 - a) * eps_star), truncated at zero.

    With z = 0 the weight is exactly 1 and the step is the identity, which is
    the convention for an information-free period (eps_star is then unused).
    """
    a = weights.a if isinstance(weights, UnifiedWeights) else float(weights)
    if not (0.0 < a <= 1.0):
        raise ValueError(f"weight a must lie in (0, 1], got {a}")
    if a == 1.0:
        return max(0.0, zeta_t)
    return max(0.0, a * zeta_t + (1.0 - a) * eps_star)


def rule_of_thumb_probability(
    params: SectorParams, z_history: Sequence[float], lower_bound: float
) -> float:
    """Probability that the next estimate falls at or below ``lower_bound``.

    Closed form for the PD estimator conditional on the labor history, with
    log-output entering the update uncentered (so a nonzero m contributes a
    drift term).  An empty history returns the truncated-prior mass below the
    bound.
    """
    if any(not math.isfinite(z) for z in z_history):
        raise ValueError("z_history must be finite")
    sum_z = math.fsum(z_history)
    sum_zz = math.fsum(z * z for z in z_history)
    if sum_zz == 0.0:
        # no information: the estimate is the prior draw, truncated at zero
        tau = params.tau
        lo_mass = norm_cdf((lower_bound - params.zeta0) / tau)
        neg_mass = norm_cdf((0.0 - params.zeta0) / tau)
        denom = 1.0 - neg_mass
        if denom <= 0.0:
            return 1.0
        return max(0.0, lo_mass - neg_mass) / denom
    sigma, tau = params.sigma, params.tau
    if sigma == 0.0:
        # deterministic signal: the estimate is below the bound with prob. 0/1
        center = (sigma**2 * (params.zeta0 - lower_bound)) + tau**2 * (
            params.zeta_star - lower_bound
        ) * sum_zz + params.m * tau**2 * sum_z
        return 1.0 if center <= 0.0 else 0.0
    t_stat = (
        sigma**2 * (params.zeta0 - lower_bound)
        + tau**2 * (params.zeta_star - lower_bound) * sum_zz
        + params.m * tau**2 * sum_z
    ) / (sigma * tau**2 * math.sqrt(sum_zz))
    return 1.0 - norm_cdf(t_stat)
