"""Pure-numpy fallback for the hot kernels.

Functionally equivalent to ``_backend_numba`` and fed by the same
counter streams: uint64 draws are bit-identical, floating-point
results agree to rounding error (summation order differs). Batch
loops are vectorized across replications; per-path recursions are
vectorized across the batch dimension or, where linear, delegated to
``scipy.signal.lfilter``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import lfilter
from scipy.special import gammaln

from ._rng import GOLDEN, _mix64_arr

NAME = "numpy"

_U_GOLDEN = np.uint64(GOLDEN)
_LOG_HALF = math.log(0.5)


def _child_arr(key, ids) -> np.ndarray:
    ids = np.asarray(ids, dtype=np.uint64)
    return _mix64_arr(np.uint64(key) ^ ((ids + np.uint64(1)) * _U_GOLDEN))


def _unif_arr(keys: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Uniforms on (0,1] for every (key, index) pair (broadcasting)."""
    z = _mix64_arr(keys + (idx.astype(np.uint64) + np.uint64(1)) * _U_GOLDEN)
    return ((z >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53


def _poly_tables(d, h, alpha, jmax_p, jmax_q):
    # vectorized three-term recurrences over an arbitrary-shape grid
    P = np.empty((jmax_p + 1,) + d.shape)
    P[0] = 1.0
    if jmax_p >= 1:
        s = math.sqrt(1.0 - alpha)
        P[1] = (1.0 - alpha * d) / s
        for deg in range(1, jmax_p):
            coef = ((1.0 - alpha) * (2 * deg + 1) + alpha * (deg - d + 1)) / ((deg + 1) * s)
            P[deg + 1] = coef * P[deg] - (deg / (deg + 1)) * P[deg - 1]
    Q = np.empty((jmax_q + 1,) + h.shape)
    Q[0] = 1.0
    if jmax_q >= 1:
        z = 2.0 * h - 1.0
        l_prev = np.ones_like(z)
        l_cur = z
        Q[1] = math.sqrt(3.0) * l_cur
        for deg in range(1, jmax_q):
            l_cur, l_prev = ((2 * deg + 1) * z * l_cur - deg * l_prev) / (deg + 1), l_cur
            Q[deg + 1] = math.sqrt(2.0 * (deg + 1) + 1.0) * l_cur
    return P, Q


def direct_wald_stats(B, n, alpha, fam, kk, jj, jmax_p, jmax_q, key,
                      dur_kind, nb_r, sev_lo, sev_hi):
    """Wald statistics for B independent duration-severity samples."""
    stats = np.empty(B)
    per_rep = n * (nb_r if dur_kind == 1 else 1)
    chunk = max(1, int(1_500_000 // max(per_rep, 1)))
    obs_idx = np.arange(n, dtype=np.uint64)
    for b0 in range(0, B, chunk):
        b1 = min(B, b0 + chunk)
        rep = _child_arr(key, np.arange(b0, b1, dtype=np.uint64))
        dkeys = _child_arr(rep, np.zeros(rep.size, dtype=np.uint64))
        hkeys = _child_arr(rep, np.ones(rep.size, dtype=np.uint64))
        if dur_kind == 0:
            u = _unif_arr(dkeys[:, None], obs_idx[None, :])
            d = np.maximum(np.ceil(np.log(u) / math.log1p(-alpha)), 1.0)
        else:
            sub = _mix64_arr(dkeys[:, None] ^ ((obs_idx[None, :] + np.uint64(1)) * _U_GOLDEN))
            us = _unif_arr(sub[:, :, None], np.arange(nb_r, dtype=np.uint64)[None, None, :])
            d = 1.0 + np.floor(np.log(us) / _LOG_HALF).sum(axis=2)
        h = sev_lo + (sev_hi - sev_lo) * _unif_arr(hkeys[:, None], obs_idx[None, :])
        P, Q = _poly_tables(d, h, alpha, jmax_p, jmax_q)
        acc = np.zeros(b1 - b0)
        for c in range(fam.size):
            f = fam[c]
            k = kk[c]
            j = jj[c]
            if f == 0:
                vals = Q[j]
            elif f == 1:
                vals = P[j]
            elif f == 2:
                vals = P[k, :, :-1] * P[j, :, 1:]
            elif f == 3:
                vals = Q[k, :, 1:] * Q[j, :, :-1]
            elif f == 4:
                vals = P[k] * Q[j]
            else:
                vals = P[k, :, 1:] * Q[j, :, :-1]
            s = vals.sum(axis=1)
            acc += s * s / vals.shape[1]
        stats[b0:b1] = acc
    return stats


def _std_t_block(keys: np.ndarray, t_idx: np.ndarray, nu: float,
                 eta_scale: float) -> np.ndarray:
    """Scaled t(nu) draws for keys (B,) at time indices (T,)."""
    w = _unif_arr(keys[:, None], (2 * t_idx)[None, :].astype(np.uint64))
    v = _unif_arr(keys[:, None], (2 * t_idx + 1)[None, :].astype(np.uint64))
    x = np.sqrt(nu * (w ** (-2.0 / nu) - 1.0)) * np.cos(2.0 * np.pi * v)
    return x * eta_scale


def garch_simulate_batch(d0, d1, g0, g1, g2, nu, eta_scale, T, burn, key, B):
    """B AR(1)-GARCH(1,1) paths; time recursion vectorized across paths."""
    total = T + burn
    Y = np.empty((B, T))
    S2 = np.empty((B, T))
    Y0 = np.empty(B)
    mu = d0 / (1.0 - d1)
    uncond = g0 / (1.0 - g1 - g2)
    chunk = max(1, int(2_000_000 // max(total, 1)))
    t_idx = np.arange(total, dtype=np.int64)
    for b0 in range(0, B, chunk):
        b1 = min(B, b0 + chunk)
        rep = _child_arr(key, np.arange(b0, b1, dtype=np.uint64))
        eta = _std_t_block(rep, t_idx, nu, eta_scale)
        nb = b1 - b0
        s2 = np.full(nb, uncond)
        eps = np.zeros(nb)
        yprev = np.full(nb, mu)
        for t in range(total):
            s2 = g0 + g1 * eps * eps + g2 * s2
            eps = np.sqrt(s2) * eta[:, t]
            ynew = d0 + d1 * yprev + eps
            if t >= burn:
                i = t - burn
                if i == 0:
                    Y0[b0:b1] = yprev
                Y[b0:b1, i] = ynew
                S2[b0:b1, i] = s2
            yprev = ynew
    return Y, S2, Y0


def garch_simulate(d0, d1, g0, g1, g2, nu, eta_scale, T, burn, key):
    # key is the path key itself (the batch variant derives child keys)
    eta = _std_t_block(np.array([key], dtype=np.uint64),
                       np.arange(T + burn, dtype=np.int64), nu, eta_scale)[0]
    mu = d0 / (1.0 - d1)
    s2 = g0 / (1.0 - g1 - g2)
    eps = 0.0
    yprev = mu
    y0 = mu
    y_out = np.empty(T)
    s2_out = np.empty(T)
    for t in range(T + burn):
        s2 = g0 + g1 * eps * eps + g2 * s2
        eps = math.sqrt(s2) * eta[t]
        ynew = d0 + d1 * yprev + eps
        if t >= burn:
            i = t - burn
            if i == 0:
                y0 = yprev
            y_out[i] = ynew
            s2_out[i] = s2
        yprev = ynew
    return y_out, s2_out, y0


def garch_filter(d0, d1, g0, g1, g2, y, y0, s2_init):
    T = y.size
    m = np.empty(T)
    m[0] = d0 + d1 * y0
    m[1:] = d0 + d1 * y[:-1]
    eps = y - m
    # sigma2[t] = g0 + g1*eps[t-1]^2 + g2*sigma2[t-1] is linear in sigma2:
    # one IIR pass reproduces the scalar recursion exactly
    x = g0 + g1 * eps[:-1] ** 2
    s2 = np.empty(T)
    s2[0] = s2_init
    if T > 1:
        s2[1:] = lfilter([1.0], [1.0, -g2], x, zi=np.array([g2 * s2_init]))[0]
    return m, s2, eps


def garch_neg_loglik(d0, d1, g0, g1, g2, nu, y, y0, s2_init):
    _, s2, eps = garch_filter(d0, d1, g0, g1, g2, y, y0, s2_init)
    const = (gammaln(0.5 * (nu + 1.0)) - gammaln(0.5 * nu)
             - 0.5 * math.log(math.pi * (nu - 2.0)))
    ll = (y.size * const
          - 0.5 * np.log(s2).sum()
          - 0.5 * (nu + 1.0) * np.log1p(eps * eps / (s2 * (nu - 2.0))).sum())
    return -ll
