"""Closed-form moments and mode of the next-period estimate.

Conditional on the labor history, the untruncated next estimate is Gaussian
with a center and scale that are simple functions of the signal sums; the
truncation at zero mixes that Gaussian with a point mass.  This module
evaluates the resulting expectation, second moment, variance, and mode, the
limit classification of the long-memory dynamics, the deterministic mode
recursion of the short-memory dynamics, and the mean-field labor path that
feeds those formulas with deterministic inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import EconomyConfig, SectorParams
from .norm import SQRT_2PI, norm_cdf, norm_pdf


@dataclass(frozen=True)
class MomentReport:
    expectation: float
    second_moment: float
    variance: float
    mode: float
    vbar: float
    phibar: float
    Ftilde: float
    ftilde: float


@dataclass(frozen=True)
class LimitDescriptor:
    """Caller-stated limits of the signal sums (use math.inf for divergence).

    ``z1_limit``: limit of the plain signal sum (+/-inf allowed);
    ``z2_limit``: limit of the squared sum (>= 0, +inf allowed);
    ``ratio_limit``: limit of (zeta0 + gamma*zeta_star*S2)/(gamma*sigma*S1),
    required only when both sums diverge;
    ``z1_over_z2``: optional limit of |S1|/S2 for the both-divergent case
    (derived from ratio_limit when omitted).
    """

    z1_limit: float
    z2_limit: float
    ratio_limit: float | None = None
    z1_over_z2: float | None = None

    def __post_init__(self) -> None:
        if not (self.z2_limit >= 0.0):
            raise ValueError("z2_limit must be >= 0")


def _truncated_report(vbar: float, phibar: float) -> MomentReport:
    """Moments of max(0, vbar + phibar * N(0,1)) plus the mode rule.

    phibar == 0 is the degenerate point mass at vbar: the cdf/pdf factors are
    taken at their pointwise limits (1 and 0).
    """
    if phibar == 0.0:
        expectation = max(0.0, vbar)
        return MomentReport(
            expectation=expectation,
            second_moment=expectation * expectation,
            variance=0.0,
            mode=expectation,
            vbar=vbar,
            phibar=0.0,
            Ftilde=1.0,
            ftilde=0.0,
        )
    ratio = -abs(vbar / phibar)
    big_f = 1.0 - norm_cdf(ratio)
    small_f = norm_pdf(ratio)
    absphi = abs(phibar)
    expectation = vbar * big_f + absphi * small_f
    second = (vbar * vbar + phibar * phibar) * big_f + vbar * absphi * small_f
    variance = second - expectation * expectation
    mode = vbar if 1.0 / (absphi * SQRT_2PI) >= norm_cdf(ratio) else 0.0
    return MomentReport(
        expectation=expectation,
        second_moment=second,
        variance=variance,
        mode=mode,
        vbar=vbar,
        phibar=phibar,
        Ftilde=big_f,
        ftilde=small_f,
    )


def pd_center_scale(z_history: Sequence[float], params: SectorParams) -> tuple[float, float]:
    """Center and scale of the untruncated long-memory estimate.

    The noise term aggregates independent per-period shocks, so its standard
    deviation carries the root of the squared signal sum.  (For a single
    observation this equals gamma*sigma*|z| / (1 + gamma*z^2), the form the
    scale is usually displayed in.)
    """
    s2 = math.fsum(z * z for z in z_history)
    g = params.gamma
    if math.isinf(g):
        # exact-signal limit: a point mass at the truth once any z is nonzero
        return (params.zeta0 if s2 == 0.0 else params.zeta_star), 0.0
    denom = 1.0 + g * s2
    vbar = (params.zeta0 + g * params.zeta_star * s2) / denom
    phibar = g * params.sigma * math.sqrt(s2) / denom
    return vbar, phibar


def pd_moments(z_history: Sequence[float], params: SectorParams) -> MomentReport:
    """Moments of the long-memory estimate conditional on the labor history."""
    vbar, phibar = pd_center_scale(z_history, params)
    return _truncated_report(vbar, phibar)


def pd_mode(z_history: Sequence[float], params: SectorParams) -> float:
    return pd_moments(z_history, params).mode


def pi_center_scale(zeta_t: float, z: float, params: SectorParams) -> tuple[float, float]:
    g = params.gamma
    if math.isinf(g):
        return (params.zeta_star if z != 0.0 else zeta_t), 0.0
    denom = 1.0 + g * z * z
    vbar = (zeta_t + g * params.zeta_star * z * z) / denom
    phibar = g * params.sigma * z / denom
    return vbar, phibar


def pi_moments(zeta_t: float, z: float, params: SectorParams) -> MomentReport:
    """Moments of the short-memory estimate given the current one and z."""
    vbar, phibar = pi_center_scale(zeta_t, z, params)
    return _truncated_report(vbar, phibar)


def pi_mode(zeta_t: float, z: float, params: SectorParams) -> float:
    return pi_moments(zeta_t, z, params).mode


# ---------------------------------------------------------------------------
# limit classification
# ---------------------------------------------------------------------------


def classify_limit_case(desc: LimitDescriptor) -> int:
    z1_div = math.isinf(desc.z1_limit)
    z2_div = math.isinf(desc.z2_limit)
    if not z1_div and not z2_div:
        return 2
    if not z1_div and z2_div:
        return 3
    if z1_div and not z2_div:
        return 4
    if desc.ratio_limit is None:
        raise ValueError("ratio_limit is required when both signal sums diverge")
    return 5 if math.isinf(desc.ratio_limit) else 1


def pd_limit_expectation(desc: LimitDescriptor, params: SectorParams) -> tuple[int, float]:
    """Limit of the expected long-memory estimate, by case label 1-5.

    This reproduces the published five-case taxonomy, whose truncation
    factors are built from the plain signal sum S1 (see pd_center_scale for
    why the finite-history conditional distribution instead scales with
    sqrt(S2); the two agree for single-observation histories).  Case 4
    diverges and is reported as +inf.  Case 1 needs the auxiliary limit
    |S1|/S2, derived from the stated ratio when not supplied.
    """
    case = classify_limit_case(desc)
    g = params.gamma
    if case == 3 or case == 5:
        return case, params.zeta_star
    if case == 4:
        return case, math.inf
    if case == 2:
        l1, l2 = desc.z1_limit, desc.z2_limit
        center = (params.zeta0 + g * params.zeta_star * l2) / (1.0 + g * l2)
        if l1 == 0.0:
            return case, center
        scale = g * params.sigma * l1 / (1.0 + g * l2)
        ratio = -abs(center / scale)
        value = (
            (params.zeta0 + g * params.zeta_star * l2) * (1.0 - norm_cdf(ratio))
            + params.sigma * g * abs(l1) * norm_pdf(ratio)
        ) / (1.0 + g * l2)
        return case, value
    # case 1: both sums diverge with a finite standardized ratio L
    big_l = desc.ratio_limit
    assert big_l is not None
    r12 = desc.z1_over_z2
    if r12 is None:
        if big_l == 0.0:
            raise ValueError("z1_over_z2 must be supplied when ratio_limit is 0")
        r12 = params.zeta_star / (params.sigma * abs(big_l))
    value = params.zeta_star * (1.0 - norm_cdf(-big_l)) + params.sigma * norm_pdf(-big_l) * r12
    return case, value


def pi_limit_expectation(
    l_limit: float, z_history: Sequence[float], params: SectorParams
) -> float:
    """Limit of the expected short-memory estimate.

    Converges to the truth whenever labor does not settle at 1; otherwise the
    residual bias shrinks by the partial product over the supplied history
    (reported as a partial limit).
    """
    if l_limit != 1.0:
        return params.zeta_star
    g = params.gamma
    prod = 1.0
    for z in z_history:
        prod *= 1.0 + g * z * z
    return params.zeta_star + (params.zeta0 - params.zeta_star) / prod


# ---------------------------------------------------------------------------
# deterministic mode recursion (short memory)
# ---------------------------------------------------------------------------


def mode_indicator(vbar: float, phibar: float) -> bool:
    """True when the continuous peak dominates the point mass at zero."""
    if phibar == 0.0:
        return True
    return abs(phibar) * SQRT_2PI * norm_cdf(-abs(vbar / phibar)) <= 1.0


@dataclass(frozen=True)
class ModeSequenceState:
    psi_membership: bool
    current_vbar: float


def mode_sequence_pi(
    z_schedule: Sequence[float], params: SectorParams, zeta_start: float | None = None
) -> list[ModeSequenceState]:
    """Deterministic mode path of the short-memory estimate.

    Iterates vbar(t+1) = 1{peak wins} * (vbar(t) + g*zeta_star*z^2)/(1+g*z^2);
    the indicator zeroes the state whenever the point mass at zero dominates,
    after which the recursion restarts from zero.
    """
    if any(not math.isfinite(z) for z in z_schedule):
        raise ValueError("z_schedule must be finite")
    g = params.gamma
    v = params.zeta0 if zeta_start is None else float(zeta_start)
    out = []
    for z in z_schedule:
        zz = z * z
        denom = 1.0 + g * zz
        candidate = (v + g * params.zeta_star * zz) / denom
        scale = g * params.sigma * z / denom
        keep = mode_indicator(candidate, scale)
        v = candidate if keep else 0.0
        out.append(ModeSequenceState(psi_membership=keep, current_vbar=v))
    return out


def mode_sequence_closed_form(
    z_schedule: Sequence[float],
    indicators: Sequence[bool],
    params: SectorParams,
    zeta_start: float | None = None,
) -> float:
    """Product-sum expansion of the mode recursion (same value, no iteration)."""
    g = params.gamma
    v0 = params.zeta0 if zeta_start is None else float(zeta_start)
    t = len(z_schedule)
    factors = [(1.0 if ind else 0.0) / (1.0 + g * z * z) for z, ind in zip(z_schedule, indicators)]
    head = v0
    for f in factors:
        head *= f
    tail = 0.0
    for h in range(t):
        term = g * z_schedule[h] * z_schedule[h]
        for s in range(h, t):
            term *= factors[s]
        tail += term
    return head + params.zeta_star * tail


# ---------------------------------------------------------------------------
# mean-field labor path and diagnostics
# ---------------------------------------------------------------------------


def mean_field_labor_path(config: EconomyConfig) -> np.ndarray:
    """Deterministic per-sector log-labor schedule, shape (horizon, n).

    Runs the full decision-estimation loop with every realized shock replaced
    by its expectation, so the induced labor inputs (and their signal sums)
    are deterministic and usable by the closed-form moment operations.
    """
    from .engine import mean_field_trajectory

    traj = mean_field_trajectory(config)
    return np.log(traj.labor)


def expected_belief_path(
    z_schedule: Sequence[float], params: SectorParams, mode: str = "PD"
) -> np.ndarray:
    """Expected-estimate path along a deterministic z schedule.

    PD evaluates the closed form on growing histories; PI propagates the
    expectation one step at a time, feeding each period's expectation back as
    the next center (the truncation correction rides along in both).
    """
    t_len = len(z_schedule)
    out = np.empty(t_len + 1)
    out[0] = params.zeta0
    if mode == "PD":
        for t in range(1, t_len + 1):
            out[t] = pd_moments(z_schedule[:t], params).expectation
    else:
        v = params.zeta0
        for t in range(1, t_len + 1):
            v = pi_moments(v, z_schedule[t - 1], params).expectation
            out[t] = v
    return out


def limit_classifier_heuristic(z_schedule: Sequence[float]) -> LimitDescriptor:
    """Diagnostic-only guess of the limit descriptor from a finite path.

    Uses a log-log slope test on the last fifth of the cumulative sums; a
    slope above ~0.1 is read as divergence.  Finite data cannot certify
    limits, so this feeds no acceptance checks.
    """
    z = np.asarray(z_schedule, dtype=float)
    if len(z) < 10:
        raise ValueError("need at least 10 periods to guess limits")
    s1 = np.cumsum(z)
    s2 = np.cumsum(z * z)
    tail = slice(int(0.8 * len(z)), None)

    def slope(series: np.ndarray) -> float:
        y = np.abs(series[tail]) + 1e-300
        x = np.log(np.arange(1, len(z) + 1)[tail])
        coef = np.polyfit(x, np.log(y), 1)
        return float(coef[0])

    z1_div = slope(s1) > 0.1
    z2_div = slope(s2) > 0.1
    z1_lim = math.copysign(math.inf, s1[-1]) if z1_div else float(s1[-1])
    z2_lim = math.inf if z2_div else float(s2[-1])
    ratio = None
    if z1_div and z2_div:
        g = 1.0  # ratio trend only; gamma scaling irrelevant for the inf test
        series = (1.0 + g * s2[tail]) / (g * np.abs(s1[tail]) + 1e-300)
        ratio = math.inf if slope(series) > 0.1 else float(series[-1])
    return LimitDescriptor(z1_limit=z1_lim, z2_limit=z2_lim, ratio_limit=ratio)
