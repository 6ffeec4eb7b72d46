"""Data generating processes for size and power experiments.

Two null DGPs: (i) durations and severities drawn directly from their
null distributions; (ii) an AR(1)-GARCH(1,1) model with standardized
Student-t innovations, from which reported PITs are computed.

Five alternatives: a1/a2/a3 distort the severity and/or duration
marginals directly; a4 is a bank applying the standard normal CDF to
correctly filtered residuals; a5 is a bank filtering the variance with
wrong persistence parameters.

Sign convention: simulated series are losses. VaR(alpha) is the
(1-alpha)-quantile of the loss distribution, ES the mean loss beyond
it, and the reported PIT is the survival value of the standardized
residual, so that a violation is exactly the event u_t <= alpha.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm, t as student_t

from . import _rng
from .errors import DomainError
from .orthopoly import check_alpha
from .sampletx import DurationSeveritySample, PitSeries
from . import backend

#: stream id namespace for this module (mctest uses 0-2)
_DGP_STREAM = 16

DEFAULT_BURN_IN = 1000


@dataclass(frozen=True)
class GarchParams:
    """AR(1)-GARCH(1,1) parameters with Student-t innovation dof."""

    delta0: float
    delta1: float
    gamma0: float
    gamma1: float
    gamma2: float
    nu: float

    def __post_init__(self):
        if not abs(self.delta1) < 1:
            raise DomainError(f"|delta1| must be < 1, got {self.delta1}")
        if self.gamma0 <= 0 or self.gamma1 < 0 or self.gamma2 < 0:
            raise DomainError("variance coefficients must be gamma0 > 0, gamma1, gamma2 >= 0")
        if self.gamma1 + self.gamma2 >= 1:
            raise DomainError(
                f"gamma1 + gamma2 = {self.gamma1 + self.gamma2} is not < 1; "
                "the variance recursion is non-stationary under unit-variance innovations"
            )
        if self.nu <= 2:
            raise DomainError(f"nu must exceed 2, got {self.nu}")

    @property
    def unconditional_variance(self) -> float:
        return self.gamma0 / (1.0 - self.gamma1 - self.gamma2)

    @property
    def unconditional_mean(self) -> float:
        return self.delta0 / (1.0 - self.delta1)

    def astuple(self):
        return (self.delta0, self.delta1, self.gamma0, self.gamma1, self.gamma2, self.nu)


#: calibration used throughout the experiments
CALIBRATED = GarchParams(0.0, 0.05, 0.05, 0.10, 0.85, 5.0)
#: the wrong variance persistence used by the a5 bank
A5_WRONG = GarchParams(0.0, 0.05, 0.05, 0.04, 0.91, 5.0)


class DgpKind(enum.Enum):
    NULL_DIRECT = "null_direct"
    NULL_GARCH = "null_garch"
    A1 = "a1"
    A2 = "a2"
    A3 = "a3"
    A4 = "a4"
    A5 = "a5"

    @property
    def is_direct(self) -> bool:
        return self in (DgpKind.NULL_DIRECT, DgpKind.A1, DgpKind.A2, DgpKind.A3)


@dataclass(frozen=True)
class GarchPath:
    """Simulated loss path with its conditional variance recursion.

    sigma2[t] is the variance recursion value for y[t] (the conditional
    variance when innovations are standardized); y_lag0 is the
    observation preceding y[0] (needed for the first conditional mean).
    standardized records the innovation scaling the path was built with.
    """

    y: np.ndarray
    sigma2: np.ndarray
    y_lag0: float
    params: GarchParams
    standardized: bool = True


def std_t_cdf(z, nu: float):
    """CDF of the unit-variance (standardized) Student-t."""
    return student_t.cdf(np.asarray(z) * math.sqrt(nu / (nu - 2.0)), nu)


def std_t_sf(z, nu: float):
    """Survival function of the standardized Student-t."""
    return student_t.sf(np.asarray(z) * math.sqrt(nu / (nu - 2.0)), nu)


def std_t_ppf(p, nu: float):
    """Quantile of the standardized Student-t."""
    return student_t.ppf(p, nu) * math.sqrt((nu - 2.0) / nu)


def raw_t_tail_mean(nu: float, alpha: float) -> float:
    """E[X | X >= q] for raw Student-t(nu) X at its upper-alpha quantile.

    Closed form: the partial expectation over (q, inf) equals
    f_nu(q) * (nu + q^2) / (nu - 1).
    """
    alpha = check_alpha(alpha)
    if nu <= 1:
        raise DomainError(f"nu must exceed 1 for a finite tail mean, got {nu}")
    q = student_t.ppf(1.0 - alpha, nu)
    return float(student_t.pdf(q, nu) * (nu + q * q) / ((nu - 1.0) * alpha))


def std_t_tail_mean(nu: float, alpha: float) -> float:
    """tau(alpha) = E[eta | eta >= q] at the upper-alpha quantile q of
    the standardized Student-t (tail expectation of a unit-variance t)."""
    if nu <= 2:
        raise DomainError(f"nu must exceed 2, got {nu}")
    return raw_t_tail_mean(nu, alpha) * math.sqrt((nu - 2.0) / nu)


def normal_tail_mean(alpha: float) -> float:
    """E[Z | Z >= q] for standard normal Z at the upper-alpha quantile."""
    alpha = check_alpha(alpha)
    q = norm.ppf(1.0 - alpha)
    return float(norm.pdf(q) / alpha)


def _rep_key(seed: int, index: int) -> int:
    return _rng.stream_key(seed, _DGP_STREAM, index)


def simulate_direct_null(n: int, alpha: float, seed: int, index: int = 0) -> DurationSeveritySample:
    """n i.i.d. geometric(alpha) durations and n independent uniform severities."""
    alpha = check_alpha(alpha)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    key = _rep_key(seed, index)
    d = _rng.geometric(_rng.stream_key_child(key, 0), 0, n, alpha)
    h = _rng.uniforms(_rng.stream_key_child(key, 1), 0, n)
    return DurationSeveritySample(durations=d, severities=h, alpha=alpha)


def _negative_binomial_plus_one(key: int, n: int, r: float) -> np.ndarray:
    """1 + NB(r, 0.5) failure counts; integer r uses r summed geometric
    substream draws, non-integer r falls back to a gamma-Poisson mixture."""
    if abs(r - round(r)) < 1e-9:
        r = int(round(r))
        sub = np.array([_rng.stream_key_child(key, i) for i in range(n)], dtype=np.uint64)
        u = _mix_grid_uniforms(sub, r)
        fails = np.floor(np.log(u) / math.log(0.5)).sum(axis=1)
        return (1 + fails).astype(np.int64)
    rng = np.random.default_rng(key)
    lam = rng.gamma(shape=r, scale=1.0, size=n)  # (1-p)/p = 1 at p = 0.5
    return (1 + rng.poisson(lam)).astype(np.int64)


def _mix_grid_uniforms(keys: np.ndarray, count: int) -> np.ndarray:
    idx = np.arange(1, count + 1, dtype=np.uint64)
    z = keys[:, None] + idx[None, :] * np.uint64(_rng.GOLDEN)
    return ((_rng._mix64_arr(z) >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53


def simulate_alternative(kind, n: int, alpha: float, seed: int, index: int = 0) -> DurationSeveritySample:
    """Direct-sample alternatives a1, a2, a3."""
    kind = DgpKind(kind) if not isinstance(kind, DgpKind) else kind
    alpha = check_alpha(alpha)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    key = _rep_key(seed, index)
    dkey = _rng.stream_key_child(key, 0)
    hkey = _rng.stream_key_child(key, 1)
    u = _rng.uniforms(hkey, 0, n)
    if kind is DgpKind.A1:
        d = _rng.geometric(dkey, 0, n, alpha)
        h = 0.2 + 0.6 * u
    elif kind is DgpKind.A2:
        d = _negative_binomial_plus_one(dkey, n, (1.0 - alpha) / alpha)
        h = u
    elif kind is DgpKind.A3:
        d = _negative_binomial_plus_one(dkey, n, (1.0 - alpha) / alpha)
        h = 0.2 + 0.6 * u
    else:
        raise DomainError(f"{kind} is not a direct-sample alternative")
    return DurationSeveritySample(durations=d, severities=h, alpha=alpha)


def _eta_scale(params: GarchParams, standardized: bool) -> float:
    return math.sqrt((params.nu - 2.0) / params.nu) if standardized else 1.0


def simulate_garch(params: GarchParams, T: int, burn_in: int = DEFAULT_BURN_IN,
                   seed: int = 0, index: int = 0, standardized: bool = True) -> GarchPath:
    """Simulate one loss path of length T after discarding burn_in steps.

    standardized=True (default) scales the t(nu) innovations to unit
    variance, making gamma0/(1-gamma1-gamma2) the unconditional
    variance; standardized=False keeps raw t(nu) draws.
    """
    if T < 1:
        raise DomainError(f"T must be >= 1, got {T}")
    key = np.uint64(_rep_key(seed, index))
    d0, d1, g0, g1, g2, nu = params.astuple()
    y, s2, y0 = backend.garch_simulate(d0, d1, g0, g1, g2, nu,
                                       _eta_scale(params, standardized),
                                       int(T), int(burn_in), key)
    return GarchPath(y=y, sigma2=s2, y_lag0=float(y0), params=params,
                     standardized=standardized)


def simulate_garch_batch(params: GarchParams, T: int, B: int,
                         burn_in: int = DEFAULT_BURN_IN, seed: int = 0,
                         stream: int = 0, standardized: bool = True):
    """B independent paths; returns (Y, Sigma2, Y0) arrays of shape (B, T)."""
    key = np.uint64(_rng.stream_key(seed, _DGP_STREAM + 1, stream))
    d0, d1, g0, g1, g2, nu = params.astuple()
    return backend.garch_simulate_batch(d0, d1, g0, g1, g2, nu,
                                        _eta_scale(params, standardized),
                                        int(T), int(burn_in), key, int(B))


def _conditional_means(y: np.ndarray, y_lag0: float, params: GarchParams) -> np.ndarray:
    m = np.empty_like(y)
    m[0] = params.delta0 + params.delta1 * y_lag0
    m[1:] = params.delta0 + params.delta1 * y[:-1]
    return m


def _resolve_path(y, params: GarchParams, standardized: bool) -> GarchPath:
    if isinstance(y, GarchPath):
        return y
    y = np.asarray(y, dtype=np.float64)
    d0, d1, g0, g1, g2, _ = params.astuple()
    y0 = params.unconditional_mean
    m, s2, _ = backend.garch_filter(d0, d1, g0, g1, g2, y, y0,
                                    params.unconditional_variance)
    return GarchPath(y=y, sigma2=s2, y_lag0=y0, params=params,
                     standardized=standardized)


def _t_survival(z, nu: float, standardized: bool):
    if standardized:
        return std_t_sf(z, nu)
    return student_t.sf(np.asarray(z), nu)


def pit_true(y, params: GarchParams, standardized: bool = True) -> PitSeries:
    """Reported PITs under the true model (loss convention: survival of
    the scaled residual, so violations are u <= alpha).

    Accepts a GarchPath (exact simulator variances, which also fixes
    the innovation scaling) or a plain loss series, which is
    re-filtered from the unconditional state.
    """
    path = _resolve_path(y, params, standardized)
    m = _conditional_means(path.y, path.y_lag0, params)
    eta = (path.y - m) / np.sqrt(path.sigma2)
    return PitSeries(_t_survival(eta, params.nu, path.standardized))


def pit_bank_a4(y, params: GarchParams) -> PitSeries:
    """PITs of a bank with correct filtering but a standard normal
    innovation CDF (independent of the innovation scaling convention)."""
    path = _resolve_path(y, params, True)
    m = _conditional_means(path.y, path.y_lag0, params)
    eta = (path.y - m) / np.sqrt(path.sigma2)
    return PitSeries(norm.sf(eta))


def wrong_filter_sigma2(eps: np.ndarray, wrong_params: GarchParams) -> np.ndarray:
    """Variance path a bank obtains by filtering the observed residuals
    with wrong parameters, starting at the wrong unconditional variance."""
    w = wrong_params
    s2 = np.empty_like(eps)
    s2[0] = w.unconditional_variance
    if eps.size > 1:
        from scipy.signal import lfilter

        x = w.gamma0 + w.gamma1 * eps[:-1] ** 2
        s2[1:] = lfilter([1.0], [1.0, -w.gamma2], x, zi=np.array([w.gamma2 * s2[0]]))[0]
    return s2


def pit_bank_a5(y, true_params: GarchParams, wrong_params: GarchParams = A5_WRONG) -> PitSeries:
    """PITs of a bank filtering the variance with wrong parameters.

    The conditional mean uses the true mean parameters; the variance
    path is rebuilt under wrong_params from the observed residuals. The
    innovation CDF follows the path's scaling convention.
    """
    path = _resolve_path(y, true_params, True)
    m = _conditional_means(path.y, path.y_lag0, true_params)
    eps = path.y - m
    s2 = wrong_filter_sigma2(eps, wrong_params)
    return PitSeries(_t_survival(eps / np.sqrt(s2), wrong_params.nu, path.standardized))


def true_var_es(params: GarchParams, alpha: float, y_prev: float, sigma_t: float):
    """One-step-ahead (VaR, ES) of the loss under the model.

    VaR is the (1-alpha) loss quantile m + sigma * q; ES adds the
    standardized-t tail mean instead of the quantile.
    """
    alpha = check_alpha(alpha)
    if sigma_t < 0:
        raise DomainError("sigma_t must be non-negative")
    m = params.delta0 + params.delta1 * y_prev
    q = std_t_ppf(1.0 - alpha, params.nu)
    var = m + sigma_t * q
    es = m + sigma_t * std_t_tail_mean(params.nu, alpha)
    return float(var), float(es)


def bank_var_es_a4(params: GarchParams, alpha: float, m: np.ndarray, sigma: np.ndarray):
    """VaR/ES series the a4 bank reports (normal quantile and tail mean)."""
    alpha = check_alpha(alpha)
    q = norm.ppf(1.0 - alpha)
    return m + sigma * q, m + sigma * normal_tail_mean(alpha)
