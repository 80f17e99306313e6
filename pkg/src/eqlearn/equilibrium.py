"""Per-period market clearing: labor demand, wage root-finding, prices, GDP.

The wage is pinned by equating aggregate labor demand with supply.  Demand is
continuous and strictly decreasing in the wage, so a bracket plus bisection
is unconditionally convergent; Newton steps are avoided because demand is
extremely steep for small wages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .model import SectorParams, lognormal_moment

# residual target: |L(w*) - target| <= WAGE_RTOL * max(1, target)
WAGE_RTOL = 1e-10
_MAX_EXPANSIONS = 200
_MAX_BISECTIONS = 300


class SolverError(RuntimeError):
    """Raised when market clearing cannot be solved numerically."""


@dataclass(frozen=True)
class EquilibriumOutcome:
    """One period's market outcome.

    ``output`` equals consumption by market clearing; ``profit0`` is the
    exogenous sector's profit l0 * (1 - w); ``c0`` is the budget residual
    spent on the numeraire good (recorded, unused downstream).
    """

    w: float
    labor: tuple[float, ...]
    prices: tuple[float, ...]
    output: tuple[float, ...]
    profit: tuple[float, ...]
    profit0: float
    gdp: float
    labor_share: float
    delta: float
    c0: float


@dataclass(frozen=True)
class DemandCoefficients:
    """Per-sector labor-demand curve l_i = chi_i * w^kappa_i."""

    kappa: tuple[float, ...]
    chi: tuple[float, ...]

    def __post_init__(self) -> None:
        if any(k >= -1.0 for k in self.kappa):
            raise ValueError("every demand exponent must be < -1")
        if any(c <= 0.0 for c in self.chi):
            raise ValueError("every demand coefficient must be > 0")

    @classmethod
    def from_beliefs(
        cls, params: Sequence[SectorParams], zeta_hats: Sequence[float], alpha: float
    ) -> "DemandCoefficients":
        kappa = []
        chi = []
        for p, zh in zip(params, zeta_hats):
            e_a = lognormal_moment(p.m, p.sigma, alpha)
            k = -1.0 / (1.0 - zh * alpha)
            kappa.append(k)
            chi.append((e_a * zh) ** (-k))
        return cls(kappa=tuple(kappa), chi=tuple(chi))


# ---------------------------------------------------------------------------
# scalar cores shared with the pure-Python kernel (index order matters for
# bit-reproducibility against the compiled kernel)
# ---------------------------------------------------------------------------


def labor_demand_core(e_alpha: float, zeta_hat: float, alpha: float, w: float) -> float:
    return math.pow(e_alpha * zeta_hat / w, 1.0 / (1.0 - zeta_hat * alpha))


def aggregate_demand_core(
    e_alpha: Sequence[float], zeta_hat: Sequence[float], alpha: float, w: float
) -> float:
    total = 0.0
    for i in range(len(e_alpha)):
        total += labor_demand_core(e_alpha[i], zeta_hat[i], alpha, w)
    return total


def solve_wage_core(
    e_alpha: Sequence[float], zeta_hat: Sequence[float], alpha: float, target: float
) -> float:
    """Unique w with aggregate demand equal to ``target``, by bracket + bisection."""
    if target <= 0.0:
        raise SolverError(f"labor-demand target must be > 0, got {target}")
    tol = WAGE_RTOL * max(1.0, target)

    w = 1.0
    total = aggregate_demand_core(e_alpha, zeta_hat, alpha, w)
    if not math.isfinite(total):
        raise SolverError("aggregate labor demand is not finite at w = 1")
    if abs(total - target) <= tol:
        return w

    # demand decreases in w: expand geometrically until the target is bracketed
    if total > target:
        lo = w
        hi = 2.0 * w
        for _ in range(_MAX_EXPANSIONS):
            total = aggregate_demand_core(e_alpha, zeta_hat, alpha, hi)
            if not math.isfinite(total):
                raise SolverError("aggregate labor demand lost finiteness during bracketing")
            if total <= target:
                break
            lo = hi
            hi *= 2.0
        else:
            raise SolverError("failed to bracket the clearing wage from above")
    else:
        hi = w
        lo = 0.5 * w
        for _ in range(_MAX_EXPANSIONS):
            total = aggregate_demand_core(e_alpha, zeta_hat, alpha, lo)
            if not math.isfinite(total):
                raise SolverError("aggregate labor demand lost finiteness during bracketing")
            if total >= target:
                break
            hi = lo
            lo *= 0.5
        else:
            raise SolverError("failed to bracket the clearing wage from below")

    mid = 0.5 * (lo + hi)
    for _ in range(_MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        total = aggregate_demand_core(e_alpha, zeta_hat, alpha, mid)
        if abs(total - target) <= tol:
            return mid
        if total > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * mid:
            break
    total = aggregate_demand_core(e_alpha, zeta_hat, alpha, mid)
    if abs(total - target) <= tol:
        return mid
    raise SolverError(f"bisection stalled with residual {total - target:.3e}")


def labor_supply_core(w: float, r: float) -> float:
    """Household labor supply (w/r)^(1/(r-1)) from the disutility exponent r."""
    return math.pow(w / r, 1.0 / (r - 1.0))


def solve_wage_endogenous_core(
    e_alpha: Sequence[float],
    zeta_hat: Sequence[float],
    alpha: float,
    r: float,
    l0: float,
) -> tuple[float, float]:
    """Root of the strictly increasing excess-supply function.

    G(w) = (w/r)^(1/(r-1)) - l0 - L(w) rises from -inf to +inf, so the root
    exists and is unique; returns (w*, delta*).
    """
    if r <= 1.0:
        raise SolverError(f"labor-disutility exponent must be > 1, got {r}")
    if l0 < 0.0:
        raise SolverError(f"exogenous labor must be >= 0, got {l0}")

    def excess(w: float) -> float:
        return labor_supply_core(w, r) - l0 - aggregate_demand_core(e_alpha, zeta_hat, alpha, w)

    w = 1.0
    g = excess(w)
    if not math.isfinite(g):
        raise SolverError("excess labor supply is not finite at w = 1")
    if g < 0.0:
        lo = w
        hi = 2.0 * w
        for _ in range(_MAX_EXPANSIONS):
            g = excess(hi)
            if not math.isfinite(g):
                raise SolverError("excess labor supply lost finiteness during bracketing")
            if g >= 0.0:
                break
            lo = hi
            hi *= 2.0
        else:
            raise SolverError("failed to bracket the endogenous-supply wage from above")
    else:
        hi = w
        lo = 0.5 * w
        for _ in range(_MAX_EXPANSIONS):
            g = excess(lo)
            if not math.isfinite(g):
                raise SolverError("excess labor supply lost finiteness during bracketing")
            if g <= 0.0:
                break
            hi = lo
            lo *= 0.5
        else:
            raise SolverError("failed to bracket the endogenous-supply wage from below")

    mid = 0.5 * (lo + hi)
    for _ in range(_MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        g = excess(mid)
        tol = WAGE_RTOL * max(1.0, labor_supply_core(mid, r))
        if abs(g) <= tol:
            break
        if g < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * mid:
            break
    delta_star = labor_supply_core(mid, r)
    if abs(excess(mid)) > WAGE_RTOL * max(1.0, delta_star):
        raise SolverError("endogenous-supply bisection stalled above tolerance")
    return mid, delta_star


# ---------------------------------------------------------------------------
# public operations on domain objects
# ---------------------------------------------------------------------------


def clamp(zeta: float, params: SectorParams) -> float:
    return max(params.zeta_lo, min(params.zeta_hi, zeta))


def _e_alphas(params: Sequence[SectorParams], alpha: float) -> list[float]:
    return [lognormal_moment(p.m, p.sigma, alpha) for p in params]


def labor_demand(params: SectorParams, zeta_hat: float, alpha: float, w: float) -> float:
    """Profit-maximizing labor input at wage w under the clipped belief."""
    if w <= 0.0:
        raise SolverError(f"wage must be > 0, got {w}")
    if not (params.zeta_lo <= zeta_hat <= params.zeta_hi):
        raise ValueError(f"zeta_hat {zeta_hat} outside [{params.zeta_lo}, {params.zeta_hi}]")
    return labor_demand_core(lognormal_moment(params.m, params.sigma, alpha), zeta_hat, alpha, w)


def aggregate_labor_demand(
    params: Sequence[SectorParams], zeta_hats: Sequence[float], alpha: float, w: float
) -> float:
    if w <= 0.0:
        raise SolverError(f"wage must be > 0, got {w}")
    return aggregate_demand_core(_e_alphas(params, alpha), zeta_hats, alpha, w)


def solve_wage(
    params: Sequence[SectorParams], zeta_hats: Sequence[float], alpha: float, target: float
) -> float:
    """Market-clearing wage for an exogenous net labor supply ``target``."""
    return solve_wage_core(_e_alphas(params, alpha), zeta_hats, alpha, target)


def solve_wage_endogenous(
    params: Sequence[SectorParams],
    zeta_hats: Sequence[float],
    alpha: float,
    r: float,
    l0: float,
) -> tuple[float, float]:
    """Clearing wage and realized supply when labor supply is endogenous."""
    return solve_wage_endogenous_core(_e_alphas(params, alpha), zeta_hats, alpha, r, l0)


def clear_period(
    params: Sequence[SectorParams],
    beliefs: Sequence[float],
    shocks: Sequence[float],
    delta: float,
    l0: float,
    alpha: float,
    endogenous_r: float | None = None,
) -> EquilibriumOutcome:
    """Solve one period given raw beliefs and realized log-shocks ``eps``.

    Beliefs are clipped to the rule-of-thumb band before entering labor
    demand; production uses the true elasticities.
    """
    zeta_hats = [clamp(z, p) for z, p in zip(beliefs, params)]
    e_alpha = _e_alphas(params, alpha)
    if endogenous_r is not None:
        w, delta = solve_wage_endogenous_core(e_alpha, zeta_hats, alpha, endogenous_r, l0)
    else:
        if delta - l0 <= 0.0:
            raise SolverError(f"need delta - l0 > 0, got {delta} - {l0}")
        w = solve_wage_core(e_alpha, zeta_hats, alpha, delta - l0)

    labor, output, prices, profit = [], [], [], []
    for i, p in enumerate(params):
        li = labor_demand_core(e_alpha[i], zeta_hats[i], alpha, w)
        xi = math.exp(shocks[i]) * math.pow(li, p.zeta_star)
        pi = math.pow(xi, alpha - 1.0)
        labor.append(li)
        output.append(xi)
        prices.append(pi)
        profit.append(pi * xi - w * li)
    profit0 = l0 * (1.0 - w)
    gdp = w * delta + profit0 + math.fsum(profit)
    labor_share = w * delta / gdp
    c0 = gdp - math.fsum(p * x for p, x in zip(prices, output))
    return EquilibriumOutcome(
        w=w,
        labor=tuple(labor),
        prices=tuple(prices),
        output=tuple(output),
        profit=tuple(profit),
        profit0=profit0,
        gdp=gdp,
        labor_share=labor_share,
        delta=delta,
        c0=c0,
    )


def labor_bounds_thresholds(
    params: Sequence[SectorParams],
    zeta_hats: Sequence[float],
    alpha: float,
    delta: float,
    l0: float,
    lambda_min: float,
    lambda_max: float,
) -> list[tuple[float, float]]:
    """Belief thresholds that guarantee per-sector labor bounds.

    For each sector returns (lower, upper): a clipped belief at or above
    ``lower`` guarantees l_i >= lambda_min, and at or below ``upper``
    guarantees l_i <= lambda_max, at the current beliefs of the others.
    """
    if lambda_min <= 0.0 or lambda_max <= 0.0:
        raise ValueError("lambda_min and lambda_max must be > 0")
    coeff = DemandCoefficients.from_beliefs(params, zeta_hats, alpha)
    e_alpha = _e_alphas(params, alpha)
    n = len(params)
    target = delta - l0
    wage_hi = max((target / (n * c)) ** (1.0 / k) for c, k in zip(coeff.chi, coeff.kappa))
    wage_lo = min((target / (n * c)) ** (1.0 / k) for c, k in zip(coeff.chi, coeff.kappa))
    out = []
    for i in range(n):
        lower = wage_hi * lambda_min ** (-1.0 / coeff.kappa[i]) / e_alpha[i]
        upper = wage_lo * lambda_max ** (-1.0 / coeff.kappa[i]) / e_alpha[i]
        out.append((lower, upper))
    return out
