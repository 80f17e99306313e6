# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled trajectory kernel; the hot loop of every ensemble run.

Twin of eqlearn._kernel_py: identical bracketing, bisection, and
accumulation order (and the same libm calls), so the two backends produce
bit-identical trajectories.  Keep the two files in lockstep.
"""

import numpy as np

from libc.math cimport exp, fabs, isfinite, log, pow

cdef double _WAGE_RTOL = 1e-10
cdef int _MAX_EXPANSIONS = 200
cdef int _MAX_BISECTIONS = 300

MODE_PD = 0
MODE_PI = 1
MODE_FROZEN = 2


class KernelSolverError(RuntimeError):
    pass


cdef double _aggregate(double[::1] e_alpha, double[::1] zhat, double alpha,
                       double w, Py_ssize_t n) noexcept:
    cdef double total = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        total += pow(e_alpha[i] * zhat[i] / w, 1.0 / (1.0 - zhat[i] * alpha))
    return total


cdef double _solve_wage(double[::1] e_alpha, double[::1] zhat, double alpha,
                        double target, Py_ssize_t n) except? -1.0:
    cdef double tol = _WAGE_RTOL * (target if target > 1.0 else 1.0)
    cdef double w = 1.0
    cdef double total = _aggregate(e_alpha, zhat, alpha, w, n)
    cdef double lo, hi, mid
    cdef int k
    cdef bint ok
    if not isfinite(total):
        raise KernelSolverError("aggregate labor demand not finite at w = 1")
    if fabs(total - target) <= tol:
        return w
    if total > target:
        lo = w
        hi = 2.0 * w
        ok = False
        for k in range(_MAX_EXPANSIONS):
            total = _aggregate(e_alpha, zhat, alpha, hi, n)
            if not isfinite(total):
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
        for k in range(_MAX_EXPANSIONS):
            total = _aggregate(e_alpha, zhat, alpha, lo, n)
            if not isfinite(total):
                raise KernelSolverError("labor demand lost finiteness during bracketing")
            if total >= target:
                ok = True
                break
            hi = lo
            lo *= 0.5
        if not ok:
            raise KernelSolverError("failed to bracket the clearing wage from below")
    mid = 0.5 * (lo + hi)
    for k in range(_MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        total = _aggregate(e_alpha, zhat, alpha, mid, n)
        if fabs(total - target) <= tol:
            return mid
        if total > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * mid:
            break
    total = _aggregate(e_alpha, zhat, alpha, mid, n)
    if fabs(total - target) <= tol:
        return mid
    raise KernelSolverError("wage bisection stalled above tolerance")


cdef (double, double) _solve_wage_endogenous(double[::1] e_alpha, double[::1] zhat,
                                             double alpha, double r, double l0,
                                             Py_ssize_t n) except *:
    cdef double w = 1.0
    cdef double g = pow(w / r, 1.0 / (r - 1.0)) - l0 - _aggregate(e_alpha, zhat, alpha, w, n)
    cdef double lo, hi, mid, ds
    cdef int k
    cdef bint ok
    if not isfinite(g):
        raise KernelSolverError("excess labor supply not finite at w = 1")
    if g < 0.0:
        lo = w
        hi = 2.0 * w
        ok = False
        for k in range(_MAX_EXPANSIONS):
            g = pow(hi / r, 1.0 / (r - 1.0)) - l0 - _aggregate(e_alpha, zhat, alpha, hi, n)
            if not isfinite(g):
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
        for k in range(_MAX_EXPANSIONS):
            g = pow(lo / r, 1.0 / (r - 1.0)) - l0 - _aggregate(e_alpha, zhat, alpha, lo, n)
            if not isfinite(g):
                raise KernelSolverError("excess supply lost finiteness during bracketing")
            if g <= 0.0:
                ok = True
                break
            hi = lo
            lo *= 0.5
        if not ok:
            raise KernelSolverError("failed to bracket the endogenous wage from below")
    mid = 0.5 * (lo + hi)
    for k in range(_MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        ds = pow(mid / r, 1.0 / (r - 1.0))
        g = ds - l0 - _aggregate(e_alpha, zhat, alpha, mid, n)
        if fabs(g) <= _WAGE_RTOL * (ds if ds > 1.0 else 1.0):
            return mid, ds
        if g < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * mid:
            break
    ds = pow(mid / r, 1.0 / (r - 1.0))
    g = ds - l0 - _aggregate(e_alpha, zhat, alpha, mid, n)
    if fabs(g) <= _WAGE_RTOL * (ds if ds > 1.0 else 1.0):
        return mid, ds
    raise KernelSolverError("endogenous wage bisection stalled above tolerance")


def simulate_trajectory(zeta_star, m, sigma, tau, zeta0, zeta_lo, zeta_hi,
                        e_alpha, double alpha, int mode, delta, l0, eps,
                        double endog_r, zeta_init):
    """Run the full decision/production/update loop for one replication."""
    cdef double[:, ::1] ep = np.ascontiguousarray(eps, dtype=np.float64)
    cdef Py_ssize_t horizon = ep.shape[0]
    cdef Py_ssize_t n = ep.shape[1]

    cdef double[::1] zs = np.ascontiguousarray(zeta_star, dtype=np.float64)
    cdef double[::1] mm = np.ascontiguousarray(m, dtype=np.float64)
    cdef double[::1] sg = np.ascontiguousarray(sigma, dtype=np.float64)
    cdef double[::1] tu = np.ascontiguousarray(tau, dtype=np.float64)
    cdef double[::1] z0 = np.ascontiguousarray(zeta0, dtype=np.float64)
    cdef double[::1] zl = np.ascontiguousarray(zeta_lo, dtype=np.float64)
    cdef double[::1] zh = np.ascontiguousarray(zeta_hi, dtype=np.float64)
    cdef double[::1] ea = np.ascontiguousarray(e_alpha, dtype=np.float64)
    cdef double[::1] dl = np.ascontiguousarray(delta, dtype=np.float64)
    cdef double[::1] l0s = np.ascontiguousarray(l0, dtype=np.float64)

    gamma_arr = np.empty(n)
    cdef double[::1] gamma = gamma_arr
    cdef Py_ssize_t i
    cdef double ratio
    for i in range(n):
        if sg[i] > 0.0:
            ratio = tu[i] / sg[i]
            gamma[i] = ratio * ratio
        else:
            gamma[i] = float("inf")

    zeta_cur_arr = np.ascontiguousarray(zeta_init, dtype=np.float64).copy()
    cdef double[::1] zeta_cur = zeta_cur_arr
    sum_zs_arr = np.zeros(n)
    sum_zz_arr = np.zeros(n)
    cdef double[::1] sum_zs = sum_zs_arr
    cdef double[::1] sum_zz = sum_zz_arr
    zhat_arr = np.zeros(n)
    cdef double[::1] zhat = zhat_arr

    out_w_arr = np.empty(horizon)
    out_delta_arr = np.empty(horizon)
    out_labor_arr = np.empty((horizon, n))
    out_output_arr = np.empty((horizon, n))
    out_prices_arr = np.empty((horizon, n))
    out_profit_arr = np.empty((horizon, n))
    out_zeta_arr = np.empty((horizon, n))
    out_zeta_hat_arr = np.empty((horizon, n))
    out_gdp_arr = np.empty(horizon)
    out_share_arr = np.empty(horizon)
    cdef double[::1] out_w = out_w_arr
    cdef double[::1] out_delta = out_delta_arr
    cdef double[:, ::1] out_labor = out_labor_arr
    cdef double[:, ::1] out_output = out_output_arr
    cdef double[:, ::1] out_prices = out_prices_arr
    cdef double[:, ::1] out_profit = out_profit_arr
    cdef double[:, ::1] out_zeta = out_zeta_arr
    cdef double[:, ::1] out_zeta_hat = out_zeta_hat_arr
    cdef double[::1] out_gdp = out_gdp_arr
    cdef double[::1] out_share = out_share_arr

    cdef bint endogenous = endog_r > 1.0
    cdef Py_ssize_t t
    cdef double z, w, delta_t, profit_sum, li, xi, pi, prof, zlog, s, raw, pi0, gdp

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
            li = pow(ea[i] * zhat[i] / w, 1.0 / (1.0 - zhat[i] * alpha))
            xi = exp(ep[t, i]) * pow(li, zs[i])
            pi = pow(xi, alpha - 1.0)
            prof = pi * xi - w * li
            profit_sum += prof
            out_labor[t, i] = li
            out_output[t, i] = xi
            out_prices[t, i] = pi
            out_profit[t, i] = prof
            out_zeta[t, i] = zeta_cur[i]
            out_zeta_hat[t, i] = zhat[i]

            zlog = log(li)
            s = (ep[t, i] - mm[i]) + zs[i] * zlog
            if mode == 0:  # PD
                sum_zs[i] += zlog * s
                sum_zz[i] += zlog * zlog
                if sg[i] > 0.0:
                    raw = (z0[i] + gamma[i] * sum_zs[i]) / (1.0 + gamma[i] * sum_zz[i])
                else:
                    raw = sum_zs[i] / sum_zz[i] if sum_zz[i] > 0.0 else z0[i]
                zeta_cur[i] = raw if raw > 0.0 else 0.0
            elif mode == 1:  # PI
                if sg[i] > 0.0:
                    raw = (zeta_cur[i] + gamma[i] * zlog * s) / (1.0 + gamma[i] * zlog * zlog)
                else:
                    raw = s / zlog if zlog != 0.0 else zeta_cur[i]
                zeta_cur[i] = raw if raw > 0.0 else 0.0
            # mode 2 (frozen) leaves zeta_cur untouched

        pi0 = l0s[t] * (1.0 - w)
        gdp = w * delta_t + pi0 + profit_sum
        out_w[t] = w
        out_delta[t] = delta_t
        out_gdp[t] = gdp
        out_share[t] = w * delta_t / gdp

    return {
        "w": out_w_arr,
        "delta": out_delta_arr,
        "labor": out_labor_arr,
        "output": out_output_arr,
        "prices": out_prices_arr,
        "profit": out_profit_arr,
        "zeta": out_zeta_arr,
        "zeta_hat": out_zeta_hat_arr,
        "gdp": out_gdp_arr,
        "labor_share": out_share_arr,
        "final_zeta": zeta_cur_arr,
        "sum_zs": sum_zs_arr,
        "sum_zz": sum_zz_arr,
    }
