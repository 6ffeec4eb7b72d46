"""AR(1)-GARCH(1,1) maximum likelihood and out-of-sample forecasting.

All series handled here are losses (negated returns); the CLI does the
negation when reading return files. Fitting maximizes the
standardized-t likelihood by Nelder-Mead over transformed parameters
(log variance intercept, logistic persistence shares so that
gamma1 + gamma2 < 1, log(nu - 2), atanh AR coefficient), with
multi-start. Filtering initializes the variance at the sample variance
and the first conditional mean at the model's unconditional mean.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.stats import chi2

from . import _rng, backend, dgplab
from .dgplab import GarchParams
from .errors import DomainError, NonConvergenceError

_FIT_STREAM = 24


@dataclass(frozen=True)
class FitResult:
    params: GarchParams
    loglik: float
    converged: bool
    iterations: int
    start_points_tried: int


@dataclass(frozen=True)
class ForecastSeries:
    """One-step-ahead forecasts over an out-of-sample window."""

    mean: np.ndarray
    sigma: np.ndarray
    var: np.ndarray
    es: np.ndarray
    pit: np.ndarray
    alpha: float


def filter_series(params: GarchParams, y):
    """Conditional means, volatilities and standardized residuals.

    The variance recursion starts at the sample variance of y; the
    first conditional mean is the model's unconditional mean.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.size < 2:
        raise DomainError("series must have length >= 2")
    d0, d1, g0, g1, g2, _ = params.astuple()
    m, s2, eps = backend.garch_filter(d0, d1, g0, g1, g2, y,
                                      params.unconditional_mean, float(np.var(y)))
    if np.any(s2 <= 0):
        raise AssertionError("filtered variance is non-positive")  # unreachable for valid params
    vol = np.sqrt(s2)
    return m, vol, eps / vol


def loglik(params, y) -> float:
    """Log-likelihood; -inf (not an exception) for invalid parameters."""
    y = np.asarray(y, dtype=np.float64)
    if isinstance(params, GarchParams):
        p = params
    else:
        try:
            p = GarchParams(*params)
        except DomainError:
            return -math.inf
    nll = backend.garch_neg_loglik(*p.astuple(), y, p.unconditional_mean, float(np.var(y)))
    if not math.isfinite(nll):
        return -math.inf
    return -float(nll)


def _to_raw(p: GarchParams) -> np.ndarray:
    s = p.gamma1 + p.gamma2
    w = p.gamma1 / s if s > 0 else 0.5
    return np.array([
        p.delta0,
        math.atanh(p.delta1),
        math.log(p.gamma0),
        math.log(s / (1.0 - s)),
        math.log(w / (1.0 - w)) if 0 < w < 1 else 0.0,
        math.log(p.nu - 2.0),
    ])


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _from_raw(raw) -> GarchParams | None:
    d0 = raw[0]
    d1 = math.tanh(raw[1])
    g0 = math.exp(min(raw[2], 500.0))
    s = _sigmoid(raw[3])
    w = _sigmoid(raw[4])
    nu = 2.0 + math.exp(min(raw[5], 50.0))
    try:
        return GarchParams(d0, d1, g0, s * w, s * (1.0 - w), nu)
    except DomainError:
        return None


def _initial_raw(y: np.ndarray) -> np.ndarray:
    yc = y - y.mean()
    denom = float(yc @ yc)
    rho1 = float(yc[1:] @ yc[:-1]) / denom if denom > 0 else 0.0
    d1 = min(max(rho1, -0.9), 0.9)
    s, w = 0.9, 1.0 / 9.0
    g0 = max(float(np.var(y)) * (1.0 - s), 1e-12)
    p = GarchParams(float(y.mean()) * (1.0 - d1), d1, g0, s * w, s * (1.0 - w), 8.0)
    return _to_raw(p)


def fit(y, n_starts: int = 8, seed: int = 0, maxiter: int = 4000) -> FitResult:
    """Maximum likelihood fit with multi-start Nelder-Mead.

    Deterministic for a given seed: start points are the moment-based
    initial guess plus seeded perturbations in the raw coordinates.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.size < 2:
        raise DomainError("series must have length >= 2")
    if y.size < 100:
        warnings.warn(f"fitting on only {y.size} observations; estimates may be unstable")
    s2_init = float(np.var(y))

    def neg_ll(raw: np.ndarray) -> float:
        p = _from_raw(raw)
        if p is None:
            return 1e12
        val = backend.garch_neg_loglik(*p.astuple(), y, p.unconditional_mean, s2_init)
        return float(val) if math.isfinite(val) else 1e12

    base = _initial_raw(y)
    rng = np.random.default_rng(_rng.stream_key(seed, _FIT_STREAM))
    jitter = np.array([0.05, 0.10, 0.30, 0.50, 0.50, 0.30])
    starts = [base]
    for _ in range(max(0, n_starts - 1)):
        starts.append(base + rng.normal(0.0, jitter))

    best = None
    tried = 0
    for x0 in starts:
        tried += 1
        res = minimize(neg_ll, x0, method="Nelder-Mead",
                       options=dict(maxiter=maxiter, xatol=1e-6, fatol=1e-8, adaptive=True))
        if best is None or res.fun < best.fun:
            best = res
    # polish from the best vertex with a fresh simplex
    polish = minimize(neg_ll, best.x, method="Nelder-Mead",
                      options=dict(maxiter=maxiter, xatol=1e-7, fatol=1e-9, adaptive=True))
    if polish.fun <= best.fun:
        iterations = int(best.nit + polish.nit)
        best = polish
    else:
        iterations = int(best.nit)
    params = _from_raw(best.x)
    if params is None or not math.isfinite(best.fun) or best.fun >= 1e12:
        raise NonConvergenceError(
            f"no start converged to a valid parameter point ({tried} starts tried)"
        )
    return FitResult(params=params, loglik=-float(best.fun),
                     converged=bool(best.success or polish.success),
                     iterations=iterations, start_points_tried=tried)


def forecast(params: GarchParams, y_history, y_oos, alpha: float) -> ForecastSeries:
    """Fixed-parameter one-step-ahead rolling forecasts (no re-estimation).

    Filters the concatenated series and reports mean, volatility,
    (1-alpha) loss VaR, tail-mean ES and the PIT of each out-of-sample
    observation.
    """
    y_history = np.asarray(y_history, dtype=np.float64)
    y_oos = np.asarray(y_oos, dtype=np.float64)
    if y_history.size < 2:
        raise DomainError("history must have length >= 2")
    if y_oos.size < 1:
        raise DomainError("out-of-sample window is empty")
    full = np.concatenate([y_history, y_oos])
    d0, d1, g0, g1, g2, nu = params.astuple()
    m, s2, eps = backend.garch_filter(d0, d1, g0, g1, g2, full,
                                      params.unconditional_mean,
                                      float(np.var(y_history)))
    sl = slice(y_history.size, None)
    m_oos = m[sl]
    vol = np.sqrt(s2[sl])
    q = dgplab.std_t_ppf(1.0 - alpha, nu)
    tau = dgplab.std_t_tail_mean(nu, alpha)
    pit = dgplab.std_t_sf(eps[sl] / vol, nu)
    return ForecastSeries(mean=m_oos, sigma=vol, var=m_oos + vol * q,
                          es=m_oos + vol * tau, pit=pit, alpha=alpha)


def ljung_box(x, m: int):
    """Ljung-Box portmanteau statistic over lags 1..m with chi2(m) p-value."""
    x = np.asarray(x, dtype=np.float64)
    T = x.size
    if m < 1:
        raise DomainError(f"lag count must be >= 1, got {m}")
    if T <= m:
        raise DomainError(f"series of length {T} is too short for {m} lags")
    xc = x - x.mean()
    denom = float(xc @ xc)
    if denom == 0.0:
        raise DomainError("series is constant; autocorrelations are undefined")
    stat = 0.0
    for k in range(1, m + 1):
        rho = float(xc[k:] @ xc[:-k]) / denom
        stat += rho * rho / (T - k)
    stat *= T * (T + 2.0)
    return float(stat), float(chi2.sf(stat, m))
