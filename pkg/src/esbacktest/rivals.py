"""Competitor backtests used in the power comparisons.

* du_uc: mean of the cumulative-violation series against alpha/2,
  standardized by its null variance alpha/3 - alpha^2/4 (H is 0 with
  probability 1-alpha and uniform given a violation).
* du_bp: Box-Pierce statistic on the cumulative-violation series.
* acerbi_zc: tail-loss-to-ES comparison normalized by the expected
  violation count T*alpha, significance by Monte-Carlo simulation
  under a caller-supplied null model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.stats import chi2, norm

from . import _rng
from .errors import DomainError, InputError, NoViolationsError
from .orthopoly import check_alpha
from .sampletx import cumulative_violations

_BP_STREAM = 48


@dataclass(frozen=True)
class RivalOutcome:
    name: str
    statistic: float
    p_asymptotic: Optional[float] = None
    p_mc: Optional[float] = None

    def __post_init__(self):
        if self.p_asymptotic is None and self.p_mc is None:
            raise DomainError("a rival outcome must carry at least one p-value")


def du_uc(u, alpha: float) -> RivalOutcome:
    """Unconditional ES coverage test on the cumulative violations."""
    alpha = check_alpha(alpha)
    H = cumulative_violations(u, alpha).values
    T = H.size
    sd = math.sqrt(alpha / 3.0 - alpha * alpha / 4.0)
    stat = math.sqrt(T) * (H.mean() - alpha / 2.0) / sd
    return RivalOutcome(name="du_uc", statistic=float(stat),
                        p_asymptotic=float(2.0 * norm.sf(abs(stat))))


def box_pierce_stat(H: np.ndarray, m: int) -> float:
    """T * sum of squared sample autocorrelations over lags 1..m."""
    T = H.size
    if T <= m:
        raise DomainError(f"series of length {T} is too short for {m} lags")
    Hc = H - H.mean()
    denom = float(Hc @ Hc)
    if denom == 0.0:
        raise DomainError("cumulative-violation series is degenerate (no violations)")
    return float(T * sum((float(Hc[k:] @ Hc[:-k]) / denom) ** 2 for k in range(1, m + 1)))


def bp_null_stats(T: int, alpha: float, m: int, B: int, seed: int = 0) -> np.ndarray:
    """Null Box-Pierce statistics from i.i.d. uniform PIT series.

    Parameter-free given T: used both for Monte-Carlo p-values and for
    size-corrected critical values.
    """
    key = _rng.stream_key(seed, _BP_STREAM, T)
    out = np.empty(B)
    chunk = max(1, int(2_000_000 // max(T, 1)))
    pos = 0
    for b0 in range(0, B, chunk):
        b1 = min(B, b0 + chunk)
        u = _rng.uniforms(key, pos, (b1 - b0) * T).reshape(b1 - b0, T)
        pos += (b1 - b0) * T
        H = np.where(u <= alpha, (alpha - u) / alpha, 0.0)
        Hc = H - H.mean(axis=1, keepdims=True)
        denom = np.einsum("ij,ij->i", Hc, Hc)
        acc = np.zeros(b1 - b0)
        for k in range(1, m + 1):
            rho = np.einsum("ij,ij->i", Hc[:, k:], Hc[:, :-k]) / denom
            acc += rho * rho
        out[b0:b1] = T * acc
    return out


def du_bp(u, alpha: float, m: int = 5, mc_reps: Optional[int] = None,
          seed: int = 0) -> RivalOutcome:
    """Box-Pierce independence test on the cumulative violations."""
    alpha = check_alpha(alpha)
    H = cumulative_violations(u, alpha).values
    stat = box_pierce_stat(H, m)
    p_mc = None
    if mc_reps is not None:
        sims = bp_null_stats(H.size, alpha, m, mc_reps, seed)
        p_mc = float((1 + np.count_nonzero(sims >= stat)) / (mc_reps + 1))
    return RivalOutcome(name="du_bp", statistic=stat,
                        p_asymptotic=float(chi2.sf(stat, m)), p_mc=p_mc)


def acerbi_zc_statistic(losses, var_forecasts, es_forecasts, alpha: float) -> float:
    """1 - sum over violation days of loss/ES, normalized by T*alpha.

    Violations are loss >= VaR. Normalizing by the expected violation
    count makes frequency and severity mis-specification offset each
    other when the forecasts are internally consistent at some
    effective coverage level; this is the statistic's known blind spot.
    """
    alpha = check_alpha(alpha)
    losses = np.asarray(losses, dtype=np.float64)
    var_forecasts = np.asarray(var_forecasts, dtype=np.float64)
    es_forecasts = np.asarray(es_forecasts, dtype=np.float64)
    if not losses.size == var_forecasts.size == es_forecasts.size:
        raise InputError("losses and forecast series must have equal length")
    viol = losses >= var_forecasts
    if not viol.any():
        raise NoViolationsError("no VaR violations; the tail-loss statistic is undefined")
    if np.any(es_forecasts[viol] == 0.0):
        raise DomainError("ES forecast is zero on a violation day")
    return float(1.0 - np.sum(losses[viol] / es_forecasts[viol]) / (losses.size * alpha))


def acerbi_zc(losses, var_forecasts, es_forecasts, alpha: float,
              null_simulator: Callable[[int, int], np.ndarray],
              B: int = 999, seed: int = 0, two_sided: bool = False) -> RivalOutcome:
    """Tail-loss/ES backtest with a Monte-Carlo p-value.

    null_simulator(B, seed) must return B statistics simulated under
    the model the forecasts claim to follow. The default p-value is
    one-sided against risk underestimation (low statistic values), the
    test's original orientation; two_sided doubles the smaller tail.
    """
    stat = acerbi_zc_statistic(losses, var_forecasts, es_forecasts, alpha)
    if null_simulator is None:
        raise InputError("a null simulator is required for the Monte-Carlo p-value")
    sims = np.asarray(null_simulator(B, seed), dtype=np.float64)
    lo = (1 + np.count_nonzero(sims <= stat)) / (len(sims) + 1)
    if two_sided:
        hi = (1 + np.count_nonzero(sims >= stat)) / (len(sims) + 1)
        p = min(1.0, 2.0 * min(lo, hi))
    else:
        p = lo
    return RivalOutcome(name="acerbi_zc", statistic=stat, p_mc=float(p))
