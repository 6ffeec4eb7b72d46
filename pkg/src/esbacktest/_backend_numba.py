"""numba kernels for the hot inner loops.

Random draws replicate the counter-stream arithmetic of ``_rng`` so
the numpy backend consumes identical uint64/uniform streams. Keys are
uint64 values already derived by ``_rng.stream_key``.

Condition encoding (see momentengine.encode_conditions): family codes
0 marg_sev, 1 marg_dur, 2 dur_dur, 3 sev_sev, 4 dur_sev_same,
5 dur_next_sev; marginal and same-index families average n terms,
lagged families n - 1.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

NAME = "numba"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_ONE = np.uint64(1)
_TWO_M53 = 2.0**-53
_LOG_HALF = math.log(0.5)


@njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def _child(key, i):
    return _mix(key ^ ((np.uint64(i) + _ONE) * _GOLDEN))


@njit(cache=True, inline="always")
def _unif(key, idx):
    z = _mix(key + (np.uint64(idx) + _ONE) * _GOLDEN)
    return (np.float64(z >> np.uint64(11)) + 1.0) * _TWO_M53


@njit(cache=True, inline="always")
def _geom(key, idx, log1m_alpha):
    d = int(math.ceil(math.log(_unif(key, idx)) / log1m_alpha))
    return d if d >= 1 else 1


@njit(cache=True, inline="always")
def _nb_duration(key, idx, r):
    # 1 + failures before r successes at p = 0.5
    sub = _child(key, idx)
    tot = 0
    for s in range(r):
        tot += int(math.floor(math.log(_unif(sub, s)) / _LOG_HALF))
    return 1 + tot


@njit(cache=True, inline="always")
def _std_t(key, idx, nu, scale):
    w = _unif(key, 2 * idx)
    v = _unif(key, 2 * idx + 1)
    x = math.sqrt(nu * (w ** (-2.0 / nu) - 1.0)) * math.cos(2.0 * math.pi * v)
    return x * scale


@njit(cache=True)
def _meixner_row(x, alpha, jmax, out):
    out[0] = 1.0
    if jmax == 0:
        return
    s = math.sqrt(1.0 - alpha)
    out[1] = (1.0 - alpha * x) / s
    for deg in range(1, jmax):
        coef = ((1.0 - alpha) * (2 * deg + 1) + alpha * (deg - x + 1)) / ((deg + 1) * s)
        out[deg + 1] = coef * out[deg] - (deg / (deg + 1)) * out[deg - 1]


@njit(cache=True)
def _legendre_row(y, jmax, out):
    out[0] = 1.0
    if jmax == 0:
        return
    z = 2.0 * y - 1.0
    l_prev = 1.0
    l_cur = z
    out[1] = math.sqrt(3.0) * l_cur
    for deg in range(1, jmax):
        l_cur, l_prev = ((2 * deg + 1) * z * l_cur - deg * l_prev) / (deg + 1), l_cur
        out[deg + 1] = math.sqrt(2.0 * (deg + 1) + 1.0) * l_cur


@njit(cache=True)
def _one_direct_stat(n, alpha, fam, kk, jj, jmax_p, jmax_q, dkey, hkey,
                     dur_kind, nb_r, sev_lo, sev_hi):
    ncond = fam.size
    sums = np.zeros(ncond)
    p_cur = np.empty(jmax_p + 1)
    p_prev = np.empty(jmax_p + 1)
    q_cur = np.empty(jmax_q + 1)
    q_prev = np.empty(jmax_q + 1)
    log1m = math.log1p(-alpha)
    span = sev_hi - sev_lo
    for i in range(n):
        if dur_kind == 0:
            d = _geom(dkey, i, log1m)
        else:
            d = _nb_duration(dkey, i, nb_r)
        h = sev_lo + span * _unif(hkey, i)
        _meixner_row(float(d), alpha, jmax_p, p_cur)
        _legendre_row(h, jmax_q, q_cur)
        for c in range(ncond):
            f = fam[c]
            if f == 0:
                sums[c] += q_cur[jj[c]]
            elif f == 1:
                sums[c] += p_cur[jj[c]]
            elif f == 4:
                sums[c] += p_cur[kk[c]] * q_cur[jj[c]]
            elif i > 0:
                if f == 2:
                    sums[c] += p_prev[kk[c]] * p_cur[jj[c]]
                elif f == 3:
                    sums[c] += q_cur[kk[c]] * q_prev[jj[c]]
                else:
                    sums[c] += p_cur[kk[c]] * q_prev[jj[c]]
        tmp = p_prev
        p_prev = p_cur
        p_cur = tmp
        tmp = q_prev
        q_prev = q_cur
        q_cur = tmp
    stat = 0.0
    for c in range(ncond):
        f = fam[c]
        m = n if (f == 0 or f == 1 or f == 4) else n - 1
        stat += sums[c] * sums[c] / m
    return stat


@njit(cache=True, parallel=True)
def direct_wald_stats(B, n, alpha, fam, kk, jj, jmax_p, jmax_q, key,
                      dur_kind, nb_r, sev_lo, sev_hi):
    """Wald statistics for B independent duration-severity samples.

    Durations: geometric(alpha) (dur_kind 0) or 1 + NB(nb_r, 0.5)
    (dur_kind 1). Severities: uniform on (sev_lo, sev_hi].
    """
    stats = np.empty(B)
    for b in prange(B):
        rep = _child(key, b)
        stats[b] = _one_direct_stat(n, alpha, fam, kk, jj, jmax_p, jmax_q,
                                    _child(rep, 0), _child(rep, 1),
                                    dur_kind, nb_r, sev_lo, sev_hi)
    return stats


@njit(cache=True)
def garch_simulate(d0, d1, g0, g1, g2, nu, eta_scale, T, burn, key):
    """One AR(1)-GARCH(1,1) path with Student-t innovations.

    eta_scale multiplies the raw t(nu) draws: sqrt((nu-2)/nu) gives
    unit-variance (standardized) innovations, 1.0 keeps them raw.
    Returns (y, sigma2, y_lag0) where sigma2[t] is the conditional
    variance recursion value for y[t] and y_lag0 the observation
    preceding y[0].
    """
    y = np.empty(T)
    s2arr = np.empty(T)
    mu = d0 / (1.0 - d1)
    s2 = g0 / (1.0 - g1 - g2)
    eps = 0.0
    yprev = mu
    y0 = mu
    scale = eta_scale
    for t in range(T + burn):
        s2 = g0 + g1 * eps * eps + g2 * s2
        eta = _std_t(key, t, nu, scale)
        eps = math.sqrt(s2) * eta
        ynew = d0 + d1 * yprev + eps
        if t >= burn:
            i = t - burn
            if i == 0:
                y0 = yprev
            y[i] = ynew
            s2arr[i] = s2
        yprev = ynew
    return y, s2arr, y0


@njit(cache=True, parallel=True)
def garch_simulate_batch(d0, d1, g0, g1, g2, nu, eta_scale, T, burn, key, B):
    Y = np.empty((B, T))
    S2 = np.empty((B, T))
    Y0 = np.empty(B)
    for b in prange(B):
        y, s2, y0 = garch_simulate(d0, d1, g0, g1, g2, nu, eta_scale, T, burn,
                                   _child(key, b))
        Y[b] = y
        S2[b] = s2
        Y0[b] = y0
    return Y, S2, Y0


@njit(cache=True)
def garch_filter(d0, d1, g0, g1, g2, y, y0, s2_init):
    """Conditional means, variances and residuals given parameters."""
    T = y.size
    m = np.empty(T)
    s2 = np.empty(T)
    eps = np.empty(T)
    m[0] = d0 + d1 * y0
    eps[0] = y[0] - m[0]
    s2[0] = s2_init
    for t in range(1, T):
        s2[t] = g0 + g1 * eps[t - 1] * eps[t - 1] + g2 * s2[t - 1]
        m[t] = d0 + d1 * y[t - 1]
        eps[t] = y[t] - m[t]
    return m, s2, eps


@njit(cache=True)
def garch_neg_loglik(d0, d1, g0, g1, g2, nu, y, y0, s2_init):
    """Negative log-likelihood under standardized-t innovations."""
    T = y.size
    const = (math.lgamma(0.5 * (nu + 1.0)) - math.lgamma(0.5 * nu)
             - 0.5 * math.log(math.pi * (nu - 2.0)))
    half_nup1 = 0.5 * (nu + 1.0)
    num2 = nu - 2.0
    ll = T * const
    e_prev = y[0] - (d0 + d1 * y0)
    s2 = s2_init
    ll += -0.5 * math.log(s2) - half_nup1 * math.log1p(e_prev * e_prev / (s2 * num2))
    for t in range(1, T):
        s2 = g0 + g1 * e_prev * e_prev + g2 * s2
        e = y[t] - (d0 + d1 * y[t - 1])
        ll += -0.5 * math.log(s2) - half_nup1 * math.log1p(e * e / (s2 * num2))
        e_prev = e
    return -ll
