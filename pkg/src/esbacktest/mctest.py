"""Wald test with asymptotic and Monte-Carlo exact p-values.

The statistic is sum_c m_c * mean_c^2 over the selected conditions,
where m_c is the per-condition sample size (n, or n-1 for lagged
pairs). Under a correct model it is asymptotically chi-squared with
one degree of freedom per condition.

Because the null distribution of the statistic depends on nothing but
the number of violations n, finite-sample exact p-values follow from
simulating the null at the observed n and applying a randomized
lexicographic rank (statistic first, an auxiliary uniform breaking
ties), which makes the p-value exactly uniform on its attainable grid
even when the statistic is discrete.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import chi2

from . import _rng, backend, momentengine
from .errors import DomainError, SampleTooSmallError
from .momentengine import MomentSpec, MomentVector
from .sampletx import DurationSeveritySample

DEFAULT_MC_REPS = 9999
SWEEP_MC_REPS = 999

# stream ids under the user seed
_SIM_STREAM = 0
_TIE_STREAM = 1
_CRIT_STREAM = 2


@dataclass(frozen=True)
class TestOutcome:
    statistic: float
    df: int
    p_asymptotic: float
    p_mc: Optional[float]
    mc_reps: Optional[int]
    n: int
    spec: MomentSpec
    seed: int


def wald_statistic(mv: MomentVector) -> float:
    """sum_c m_c * mean_c^2 over the evaluated conditions."""
    if len(mv) == 0:
        raise DomainError("moment vector is empty")
    return float(np.sum(mv.ms * mv.means**2))


def chi2_pvalue(s: float, q: int) -> float:
    """Survival function of chi-squared(q) at s."""
    if s < 0:
        raise DomainError(f"statistic must be non-negative, got {s}")
    if q < 1:
        raise DomainError(f"degrees of freedom must be positive, got {q}")
    return float(chi2.sf(s, q))


def _check_n(n: int, spec: MomentSpec) -> int:
    n = int(n)
    if n < 1 or (spec.has_lagged and n < 2):
        raise SampleTooSmallError(
            f"null simulation needs n >= {2 if spec.has_lagged else 1}, got {n}"
        )
    return n


def simulate_null_statistics(n: int, spec: MomentSpec, B: int, seed: int,
                             key: Optional[int] = None) -> np.ndarray:
    """B statistics under the null: geometric(alpha) durations and
    uniform severities, evaluated on the selected conditions."""
    n = _check_n(n, spec)
    _, fam, kk, jj = momentengine.encode_conditions(spec)
    jmax_p, jmax_q = momentengine._required_orders(spec)
    if key is None:
        key = _rng.stream_key(seed, _SIM_STREAM)
    return backend.direct_wald_stats(int(B), n, spec.alpha, fam, kk, jj,
                                     jmax_p, jmax_q, np.uint64(key),
                                     0, 0, 0.0, 1.0)


def null_sample(n: int, spec_alpha: float, rep_key: int) -> DurationSeveritySample:
    """The null sample a replication key maps to: n geometric(alpha)
    durations and n uniform severities from the key's two substreams."""
    dkey = _rng.stream_key_child(rep_key, 0)
    hkey = _rng.stream_key_child(rep_key, 1)
    d = _rng.geometric(dkey, 0, n, spec_alpha)
    h = _rng.uniforms(hkey, 0, n)
    return DurationSeveritySample(durations=d, severities=h, alpha=spec_alpha)


def simulate_null_statistic(n: int, spec: MomentSpec, seed: int, index: int = 0) -> float:
    """One null statistic: replication `index` of the stream at `seed`.

    Matches simulate_null_statistics(n, spec, B, seed)[index] up to
    floating-point summation order.
    """
    n = _check_n(n, spec)
    key = _rng.stream_key(seed, _SIM_STREAM)
    sample = null_sample(n, spec.alpha, _rng.stream_key_child(key, index))
    return wald_statistic(momentengine.evaluate(sample, spec))


def dufour_pvalue(s_obs: float, sims: np.ndarray, w_obs: float,
                  w_sims: np.ndarray) -> float:
    """Randomized-rank Monte-Carlo p-value.

    Counts simulated pairs (S_b, W_b) lexicographically >= the
    observed (s_obs, w_obs); ties in S are broken by the auxiliary
    uniforms, which restores exactness for discrete statistics.
    """
    geq = np.count_nonzero((sims > s_obs) | ((sims == s_obs) & (w_sims >= w_obs)))
    return (1 + geq) / (len(sims) + 1)


def mc_pvalue(s_obs: float, n: int, spec: MomentSpec, B: int = DEFAULT_MC_REPS,
              seed: int = 0) -> float:
    """Finite-sample exact p-value from B null replications."""
    if B < 19:
        raise DomainError(f"B must be at least 19, got {B}")
    sims = simulate_null_statistics(n, spec, B, seed)
    w = _rng.uniforms(_rng.stream_key(seed, _TIE_STREAM), 0, B + 1)
    return dufour_pvalue(s_obs, sims, w[0], w[1:])


def size_corrected_critical(spec: MomentSpec, n: int, level: float,
                            B: int = 10_000, seed: int = 0) -> float:
    """Empirical (1 - level) quantile of B simulated null statistics."""
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must be in (0, 1), got {level}")
    key = _rng.stream_key(seed, _CRIT_STREAM, n)
    stats = simulate_null_statistics(n, spec, B, seed, key=key)
    return float(np.quantile(stats, 1.0 - level))


def run_test(sample: DurationSeveritySample, spec: MomentSpec,
             mc_reps: Optional[int] = DEFAULT_MC_REPS, seed: int = 0):
    """Full test on an observed sample.

    Returns (TestOutcome, MomentVector). Set mc_reps=None to skip the
    Monte-Carlo p-value.
    """
    mv = momentengine.evaluate(sample, spec)
    stat = wald_statistic(mv)
    df = len(mv)
    p_asy = chi2_pvalue(stat, df)
    p_mc = None
    if mc_reps is not None:
        p_mc = mc_pvalue(stat, sample.n, spec, B=mc_reps, seed=seed)
    outcome = TestOutcome(statistic=stat, df=df, p_asymptotic=p_asy, p_mc=p_mc,
                          mc_reps=mc_reps, n=sample.n, spec=spec, seed=seed)
    return outcome, mv
