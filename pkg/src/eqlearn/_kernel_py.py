"""Pure-Python trajectory kernel (fallback when the extension is absent).

Mirrors eqlearn._kernel operation for operation: same bracketing, same
bisection, same accumulation order, same libm calls, so both backends produce
bit-identical trajectories.  Any change here must be applied to the .pyx
twin as well.
"""

from __future__ import annotations

import math

import numpy as np

MODE_PD = 0
MODE_PI = 1
MODE_FROZEN = 2

_WAGE_RTOL = 1e-10
_MAX_EXPANSIONS = 200
_MAX_BISECTIONS = 300


class KernelSolverError(RuntimeError):
    pass


def _aggregate(e_alpha, zhat, alpha, w, n):
    total = 0.0
    for i in range(n):
        total += math.pow(e_alpha[i] * zhat[i] / w, 1.0 / (1.0 - zhat[i] * alpha))
    return total


def _solve_wage(e_alpha, zhat, alpha, target, n):
    tol = _WAGE_RTOL * max(1.0, target)
    w = 1.0
    total = _aggregate(e_alpha, zhat, alpha, w, n)
    if not math.isfinite(total):
        raise KernelSolverError("aggregate labor demand not finite at w = 1")
    if abs(total - target) <= tol:
        return w
    if total > target:
        lo = w
        hi = 2.0 * w
        ok = False
        for _ in range(_MAX_EXPANSIONS):
            total = _aggregate(e_alpha, zhat, alpha, hi, n)
            if not math.isfinite(total):
                raise KernelSolverError("labor demand lost finiteness during bracketing")
            if total <= target:
                ok = True
                break
            lo = hi
            hi *= 2.0
        if not ok:
            raise KernelSolverError("failed to bracket the clearing wage from above")
    else:
        hi = w
        lo = 0.5 * w
        ok = False
        for _ in range(_MAX_EXPANSIONS):
            total = _aggregate(e_alpha, zhat, alpha, lo, n)
            if not math.isfinite(total):
                raise KernelSolverError("labor demand lost finiteness during bracketing")
            if total >= target:
                ok = True
                break
            hi = lo
            lo *= 0.5
        if not ok:
            raise KernelSolverError("failed to bracket the clearing wage from below")
    mid = 0.5 * (lo + hi)
    for _ in range(_MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        total = _aggregate(e_alpha, zhat, alpha, mid, n)
        if abs(total - target) <= tol:
            return mid
        if total > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * mid:
            break
    total = _aggregate(e_alpha, zhat, alpha, mid, n)
    if abs(total - target) <= tol:
        return mid
    raise KernelSolverError("wage bisection stalled above tolerance")


def _solve_wage_endogenous(e_alpha, zhat, alpha, r, l0, n):
    w = 1.0
    g = math.pow(w / r, 1.0 / (r - 1.0)) - l0 - _aggregate(e_alpha, zhat, alpha, w, n)
    if not math.isfinite(g):
        raise KernelSolverError("excess labor supply not finite at w = 1")
    if g < 0.0:
        lo = w
        hi = 2.0 * w
        ok = False
        for _ in range(_MAX_EXPANSIONS):
            g = math.pow(hi / r, 1.0 / (r - 1.0)) - l0 - _aggregate(e_alpha, zhat, alpha, hi, n)
            if not math.isfinite(g):
                raise KernelSolverError("excess supply lost finiteness during bracketing")
            if g >= 0.0:
                ok = True
                break
            lo = hi
            hi *= 2.0
        if not ok:
            raise KernelSolverError("failed to bracket the endogenous wage from above")
    else:
        hi = w
        lo = 0.5 * w
        ok = False
        for _ in range(_MAX_EXPANSIONS):
            g = math.pow(lo / r, 1.0 / (r - 1.0)) - l0 - _aggregate(e_alpha, zhat, alpha, lo, n)
            if not math.isfinite(g):
                raise KernelSolverError("excess supply lost finiteness during bracketing")
            if g <= 0.0:
                ok = True
                break
            hi = lo
            lo *= 0.5
        if not ok:
            raise KernelSolverError("failed to bracket the endogenous wage from below")
    mid = 0.5 * (lo + hi)
    for _ in range(_MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        ds = math.pow(mid / r, 1.0 / (r - 1.0))
        g = ds - l0 - _aggregate(e_alpha, zhat, alpha, mid, n)
        if abs(g) <= _WAGE_RTOL * max(1.0, ds):
            return mid, ds
        if g < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * mid:
            break
    ds = math.pow(mid / r, 1.0 / (r - 1.0))
    g = ds - l0 - _aggregate(e_alpha, zhat, alpha, mid, n)
    if abs(g) <= _WAGE_RTOL * max(1.0, ds):
        return mid, ds
    raise KernelSolverError("endogenous wage bisection stalled above tolerance")


def simulate_trajectory(zeta_star, m, sigma, tau, zeta0, zeta_lo, zeta_hi,
                        e_alpha, alpha, mode, delta, l0, eps, endog_r, zeta_init):
    """Run the full decision/production/update loop for one replication.

    All array arguments are float64 numpy arrays; ``eps`` has shape (T, n)
    and holds realized log-shocks.  ``endog_r <= 1`` selects the exogenous
    labor-supply path.  Returns a dict of per-period and final arrays.
    """
    horizon = eps.shape[0]
    n = eps.shape[1]
    zs = [float(v) for v in zeta_star]
    mm = [float(v) for v in m]
    sg = [float(v) for v in sigma]
    ea = [float(v) for v in e_alpha]
    zl = [float(v) for v in zeta_lo]
    zh = [float(v) for v in zeta_hi]
    z0 = [float(v) for v in zeta0]
    gamma = [0.0] * n
    for i in range(n):
        if sg[i] > 0.0:
            ratio = float(tau[i]) / sg[i]
            gamma[i] = ratio * ratio
        else:
            gamma[i] = math.inf
    dl = [float(v) for v in delta]
    l0s = [float(v) for v in l0]
    ep = [[float(eps[t, i]) for i in range(n)] for t in range(horizon)]
    endogenous = endog_r > 1.0

    zeta_cur = [float(v) for v in zeta_init]
    sum_zs = [0.0] * n
    sum_zz = [0.0] * n
    zhat = [0.0] * n

    out_w = np.empty(horizon)
    out_delta = np.empty(horizon)
    out_labor = np.empty((horizon, n))
    out_output = np.empty((horizon, n))
    out_prices = np.empty((horizon, n))
    out_profit = np.empty((horizon, n))
    out_zeta = np.empty((horizon, n))
    out_zeta_hat = np.empty((horizon, n))
    out_gdp = np.empty(horizon)
    out_share = np.empty(horizon)

    for t in range(horizon):
        for i in range(n):
            z = zeta_cur[i]
            if z < zl[i]:
                z = zl[i]
            elif z > zh[i]:
                z = zh[i]
            zhat[i] = z

        if endogenous:
            w, delta_t = _solve_wage_endogenous(ea, zhat, alpha, endog_r, l0s[t], n)
        else:
            delta_t = dl[t]
            w = _solve_wage(ea, zhat, alpha, delta_t - l0s[t], n)

        profit_sum = 0.0
        for i in range(n):
            li = math.pow(ea[i] * zhat[i] / w, 1.0 / (1.0 - zhat[i] * alpha))
            xi = math.exp(ep[t][i]) * math.pow(li, zs[i])
            pi = math.pow(xi, alpha - 1.0)
            prof = pi * xi - w * li
            profit_sum += prof
            out_labor[t, i] = li
            out_output[t, i] = xi
            out_prices[t, i] = pi
            out_profit[t, i] = prof
            out_zeta[t, i] = zeta_cur[i]
            out_zeta_hat[t, i] = zhat[i]

            zlog = math.log(li)
            s = (ep[t][i] - mm[i]) + zs[i] * zlog
            if mode == MODE_PD:
                sum_zs[i] += zlog * s
                sum_zz[i] += zlog * zlog
                if sg[i] > 0.0:
                    raw = (z0[i] + gamma[i] * sum_zs[i]) / (1.0 + gamma[i] * sum_zz[i])
                else:
                    raw = sum_zs[i] / sum_zz[i] if sum_zz[i] > 0.0 else z0[i]
                zeta_cur[i] = raw if raw > 0.0 else 0.0
            elif mode == MODE_PI:
                if sg[i] > 0.0:
                    raw = (zeta_cur[i] + gamma[i] * zlog * s) / (1.0 + gamma[i] * zlog * zlog)
                else:
                    raw = s / zlog if zlog != 0.0 else zeta_cur[i]
                zeta_cur[i] = raw if raw > 0.0 else 0.0
            # MODE_FROZEN leaves zeta_cur untouched

        pi0 = l0s[t] * (1.0 - w)
        gdp = w * delta_t + pi0 + profit_sum
        out_w[t] = w
        out_delta[t] = delta_t
        out_gdp[t] = gdp
        out_share[t] = w * delta_t / gdp

    return {
        "w": out_w,
        "delta": out_delta,
        "labor": out_labor,
        "output": out_output,
        "prices": out_prices,
        "profit": out_profit,
        "zeta": out_zeta,
        "zeta_hat": out_zeta_hat,
        "gdp": out_gdp,
        "labor_share": out_share,
        "final_zeta": np.array(zeta_cur),
        "sum_zs": np.array(sum_zs),
        "sum_zz": np.array(sum_zz),
    }
