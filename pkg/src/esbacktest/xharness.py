"""Size and power experiment harness.

Runs rejection-rate tables over grids of (sample size, K, K') for the
null DGPs and the five alternatives, with optional size correction by
empirical null quantiles (conditioned on the realized violation count).

Conventions mirroring the reference experiments:

* direct DGPs draw n = round(T * alpha) duration/severity pairs per
  replication (half-up rounding);
* GARCH alternatives (a4, a5) simulate raw t(nu) innovations by
  default; the null GARCH DGP and everything else use standardized
  (unit-variance) innovations;
* the tail-loss rival (z_c) is evaluated in the standardized world,
  where its frequency/severity cancellation behaves as documented;
* replications whose sample is too small to evaluate (possible at
  small T with alpha = 0.01) are redrawn and the redraw count reported,
  keeping the denominator at the configured replication count.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2, norm

from . import _rng, backend, dgplab, mctest, momentengine, rivals
from .dgplab import A5_WRONG, CALIBRATED, DgpKind, GarchParams
from .errors import DomainError
from .momentengine import MomentSpec
from .sampletx import DurationSeveritySample, PitSeries, extract_sample

_SIZE_STREAM = 32
_POWER_STREAM = 33
_ZC_NULL_STREAM = 34
_ZC_ALT_STREAM = 35
_BP_ALT_STREAM = 36

_MAX_REDRAW_FACTOR = 100


@dataclass(frozen=True)
class ExperimentConfig:
    dgp: DgpKind
    alpha: float
    sample_sizes: tuple
    K_values: tuple = (1, 2, 3, 4)
    Kprime_values: tuple = (2, 3)
    replications: int = 1000
    level: float = 0.05
    size_corrected: bool = False
    preset: str = "global"
    seed: int = 0
    crit_reps: int = 10_000
    burn_in: int = dgplab.DEFAULT_BURN_IN
    sizes_are_n: bool = False
    raw_innovations: bool = True  # scaling for the a4/a5 data worlds
    params: GarchParams = CALIBRATED

    def __post_init__(self):
        object.__setattr__(self, "dgp", DgpKind(self.dgp))
        object.__setattr__(self, "sample_sizes", tuple(int(t) for t in self.sample_sizes))
        object.__setattr__(self, "K_values", tuple(int(k) for k in self.K_values))
        object.__setattr__(self, "Kprime_values", tuple(int(k) for k in self.Kprime_values))
        if self.replications < 1:
            raise DomainError("replications must be >= 1")
        if not 0.0 < self.level < 1.0:
            raise DomainError("level must be in (0, 1)")


def direct_n(T: int, alpha: float) -> int:
    """Violation count used by the direct DGPs for a T-day sample."""
    return max(int(math.floor(T * alpha + 0.5)), 1)


def _spec(cfg: ExperimentConfig, K: int, Kp: int) -> MomentSpec:
    return momentengine.preset(cfg.preset, K, Kp, cfg.alpha)


_DIRECT_KERNEL_ARGS = {
    DgpKind.NULL_DIRECT: (0, 0.0, 1.0),
    DgpKind.A1: (0, 0.2, 0.8),
    DgpKind.A2: (1, 0.0, 1.0),
    DgpKind.A3: (1, 0.2, 0.8),
}


def _direct_stats(kind: DgpKind, n: int, spec: MomentSpec, B: int, key: int) -> np.ndarray:
    dur_kind, lo, hi = _DIRECT_KERNEL_ARGS[kind]
    nb_r = 0
    if dur_kind == 1:
        r = (1.0 - spec.alpha) / spec.alpha
        if abs(r - round(r)) > 1e-9:
            raise DomainError(
                f"negative-binomial duration alternatives need (1-alpha)/alpha "
                f"integral; alpha={spec.alpha} gives r={r}"
            )
        nb_r = int(round(r))
    _, fam, kk, jj = momentengine.encode_conditions(spec)
    jp, jq = momentengine._required_orders(spec)
    return backend.direct_wald_stats(B, n, spec.alpha, fam, kk, jj, jp, jq,
                                     np.uint64(key), dur_kind, nb_r, lo, hi)


class _CritCache:
    """Size-corrected critical values, one null pass per (spec, n)."""

    def __init__(self, level: float, crit_reps: int, seed: int):
        self.level = level
        self.crit_reps = crit_reps
        self.seed = seed
        self._cache: dict = {}

    def get(self, spec: MomentSpec, n: int) -> float:
        key = (spec.preset, spec.K, spec.Kprime, spec.alpha, n)
        if key not in self._cache:
            self._cache[key] = mctest.size_corrected_critical(
                spec, n, self.level, B=self.crit_reps, seed=self.seed)
        return self._cache[key]


def _min_violations(cfg: ExperimentConfig) -> int:
    probe = _spec(cfg, cfg.K_values[0], cfg.Kprime_values[0])
    return 2 if probe.has_lagged else 1


def _garch_path_at(cfg: ExperimentConfig, T: int, key: int, idx: int,
                   standardized: bool) -> dgplab.GarchPath:
    d0, d1, g0, g1, g2, nu = cfg.params.astuple()
    scale = math.sqrt((nu - 2.0) / nu) if standardized else 1.0
    y, s2, y0 = backend.garch_simulate(d0, d1, g0, g1, g2, nu, scale, T,
                                       cfg.burn_in,
                                       np.uint64(_rng.stream_key_child(key, idx)))
    return dgplab.GarchPath(y=y, sigma2=s2, y_lag0=float(y0), params=cfg.params,
                            standardized=standardized)


def _bank_pit(cfg: ExperimentConfig, path: dgplab.GarchPath) -> PitSeries:
    if cfg.dgp is DgpKind.NULL_GARCH:
        return dgplab.pit_true(path, cfg.params)
    if cfg.dgp is DgpKind.A4:
        return dgplab.pit_bank_a4(path, cfg.params)
    if cfg.dgp is DgpKind.A5:
        return dgplab.pit_bank_a5(path, cfg.params, A5_WRONG)
    raise DomainError(f"{cfg.dgp} is not a GARCH DGP")


def _garch_samples(cfg: ExperimentConfig, T: int, stream: int,
                   standardized: bool) -> tuple[list[DurationSeveritySample], int]:
    """One duration-severity sample per replication, redrawing paths
    whose violation count is too small to evaluate."""
    key = _rng.stream_key(cfg.seed, stream, T)
    min_n = _min_violations(cfg)
    d0, d1, g0, g1, g2, nu = cfg.params.astuple()
    scale = math.sqrt((nu - 2.0) / nu) if standardized else 1.0
    Y, S2, Y0 = backend.garch_simulate_batch(d0, d1, g0, g1, g2, nu, scale, T,
                                             cfg.burn_in, np.uint64(key),
                                             cfg.replications)
    samples: list[DurationSeveritySample] = []
    redraws = 0
    next_idx = cfg.replications
    budget = _MAX_REDRAW_FACTOR * cfg.replications
    for b in range(cfg.replications):
        path = dgplab.GarchPath(Y[b], S2[b], Y0[b], cfg.params, standardized)
        while True:
            u = _bank_pit(cfg, path)
            hits = int(np.count_nonzero(u.values <= cfg.alpha))
            if hits >= min_n:
                samples.append(extract_sample(u, cfg.alpha))
                break
            redraws += 1
            if redraws > budget:
                raise DomainError("too many degenerate replications; check the configuration")
            path = _garch_path_at(cfg, T, key, next_idx, standardized)
            next_idx += 1
    return samples, redraws


def size_experiment(cfg: ExperimentConfig) -> list[dict]:
    """Rejection rates of the asymptotic test under a null DGP."""
    if cfg.dgp not in (DgpKind.NULL_DIRECT, DgpKind.NULL_GARCH):
        raise DomainError(f"size experiments need a null DGP, got {cfg.dgp}")
    rows: list[dict] = []
    for T in cfg.sample_sizes:
        if cfg.dgp is DgpKind.NULL_DIRECT:
            n = T if cfg.sizes_are_n else direct_n(T, cfg.alpha)
            key = _rng.stream_key(cfg.seed, _SIZE_STREAM, T)
            for K in cfg.K_values:
                for Kp in cfg.Kprime_values:
                    spec = _spec(cfg, K, Kp)
                    stats = _direct_stats(cfg.dgp, n, spec, cfg.replications, key)
                    crit = chi2.ppf(1.0 - cfg.level, spec.n_conditions)
                    rows.append(_row(cfg, T, n, K, Kp, float(np.mean(stats > crit)), 0))
        else:
            samples, redraws = _garch_samples(cfg, T, _SIZE_STREAM, standardized=True)
            for K in cfg.K_values:
                for Kp in cfg.Kprime_values:
                    spec = _spec(cfg, K, Kp)
                    crit = chi2.ppf(1.0 - cfg.level, spec.n_conditions)
                    hits = sum(
                        mctest.wald_statistic(momentengine.evaluate(s, spec)) > crit
                        for s in samples
                    )
                    n_bar = float(np.mean([s.n for s in samples]))
                    rows.append(_row(cfg, T, n_bar, K, Kp, hits / cfg.replications, redraws))
    return rows


def power_experiment(cfg: ExperimentConfig) -> list[dict]:
    """Rejection rates under an alternative DGP (size-corrected when
    cfg.size_corrected, otherwise against the asymptotic threshold)."""
    if cfg.dgp in (DgpKind.NULL_DIRECT, DgpKind.NULL_GARCH):
        raise DomainError(f"power experiments need an alternative DGP, got {cfg.dgp}")
    crits = _CritCache(cfg.level, cfg.crit_reps, cfg.seed)
    rows: list[dict] = []
    for T in cfg.sample_sizes:
        if cfg.dgp.is_direct:
            n = T if cfg.sizes_are_n else direct_n(T, cfg.alpha)
            key = _rng.stream_key(cfg.seed, _POWER_STREAM, T)
            for K in cfg.K_values:
                for Kp in cfg.Kprime_values:
                    spec = _spec(cfg, K, Kp)
                    stats = _direct_stats(cfg.dgp, n, spec, cfg.replications, key)
                    crit = (crits.get(spec, n) if cfg.size_corrected
                            else chi2.ppf(1.0 - cfg.level, spec.n_conditions))
                    rows.append(_row(cfg, T, n, K, Kp, float(np.mean(stats > crit)), 0))
        else:
            samples, redraws = _garch_samples(cfg, T, _POWER_STREAM,
                                              standardized=not cfg.raw_innovations)
            for K in cfg.K_values:
                for Kp in cfg.Kprime_values:
                    spec = _spec(cfg, K, Kp)
                    asym = chi2.ppf(1.0 - cfg.level, spec.n_conditions)
                    hits = 0
                    for s in samples:
                        stat = mctest.wald_statistic(momentengine.evaluate(s, spec))
                        crit = crits.get(spec, s.n) if cfg.size_corrected else asym
                        hits += stat > crit
                    n_bar = float(np.mean([s.n for s in samples]))
                    rows.append(_row(cfg, T, n_bar, K, Kp, hits / cfg.replications, redraws))
    return rows


def _row(cfg: ExperimentConfig, T, n, K, Kp, rate, redraws) -> dict:
    return {
        "dgp": cfg.dgp.value,
        "alpha": cfg.alpha,
        "T": T,
        "n": n,
        "K": K,
        "Kprime": Kp,
        "preset": cfg.preset,
        "level": cfg.level,
        "size_corrected": cfg.size_corrected,
        "rate": rate,
        "redraws": redraws,
    }


def _zc_stats_from_paths(Y, Y0, sig, params: GarchParams, mult_var, mult_es, alpha):
    m = np.empty_like(Y)
    m[:, 0] = params.delta0 + params.delta1 * Y0
    m[:, 1:] = params.delta0 + params.delta1 * Y[:, :-1]
    var = m + sig * mult_var
    es = m + sig * mult_es
    viol = Y >= var
    sums = np.where(viol, Y / es, 0.0).sum(axis=1)
    nviol = viol.sum(axis=1)
    z = 1.0 - sums / (Y.shape[1] * alpha)
    return z, nviol


def _zc_null_quantiles(cfg: ExperimentConfig, T: int, level: float):
    """One-sided empirical critical value of the tail-loss statistic
    under the correctly specified (standardized) model: the level
    quantile of the lower (risk-underestimation) tail."""
    params = cfg.params
    d0, d1, g0, g1, g2, nu = params.astuple()
    scale = math.sqrt((nu - 2.0) / nu)
    q_std = dgplab.std_t_ppf(1.0 - cfg.alpha, nu)
    tau_std = dgplab.std_t_tail_mean(nu, cfg.alpha)
    key = _rng.stream_key(cfg.seed, _ZC_NULL_STREAM, T)
    stats = []
    chunk = max(1, int(4_000_000 // max(T, 1)))
    done = 0
    while done < cfg.crit_reps:
        b = min(chunk, cfg.crit_reps - done)
        Y, S2, Y0 = backend.garch_simulate_batch(
            d0, d1, g0, g1, g2, nu, scale, T, cfg.burn_in,
            np.uint64(_rng.stream_key_child(key, done)), b)
        z, nviol = _zc_stats_from_paths(Y, Y0, np.sqrt(S2), params, q_std, tau_std, cfg.alpha)
        stats.append(z[nviol > 0])
        done += b
    stats = np.concatenate(stats)
    return float(np.quantile(stats, level))


def rival_power_experiment(cfg: ExperimentConfig, test: str, m: int = 5) -> list[dict]:
    """Size-corrected power of a competitor test against a4 or a5.

    test 'bp_es' runs on the same (raw-innovation) data world as the
    polynomial test; test 'z_c' runs in the standardized world with
    model-consistent forecasts.
    """
    if cfg.dgp not in (DgpKind.A4, DgpKind.A5):
        raise DomainError(f"rival experiments cover a4/a5, got {cfg.dgp}")
    params = cfg.params
    d0, d1, g0, g1, g2, nu = params.astuple()
    rows: list[dict] = []
    for T in cfg.sample_sizes:
        if test == "bp_es":
            crit = float(np.quantile(
                rivals.bp_null_stats(T, cfg.alpha, m, cfg.crit_reps, cfg.seed),
                1.0 - cfg.level))
            key = _rng.stream_key(cfg.seed, _BP_ALT_STREAM, T)
            scale = 1.0 if cfg.raw_innovations else math.sqrt((nu - 2.0) / nu)
            Y, S2, Y0 = backend.garch_simulate_batch(d0, d1, g0, g1, g2, nu, scale,
                                                     T, cfg.burn_in, np.uint64(key),
                                                     cfg.replications)
            hits = 0
            redraws = 0
            next_idx = cfg.replications
            for b in range(cfg.replications):
                path = dgplab.GarchPath(Y[b], S2[b], Y0[b], params,
                                        standardized=not cfg.raw_innovations)
                while True:
                    u = _bank_pit(cfg, path).values
                    H = np.where(u <= cfg.alpha, (cfg.alpha - u) / cfg.alpha, 0.0)
                    if np.any(H > 0):
                        hits += rivals.box_pierce_stat(H, m) > crit
                        break
                    redraws += 1
                    path = _garch_path_at(cfg, T, key, next_idx,
                                          standardized=not cfg.raw_innovations)
                    next_idx += 1
            rows.append({"dgp": cfg.dgp.value, "alpha": cfg.alpha, "T": T,
                         "test": f"bp_es({m})", "level": cfg.level,
                         "rate": hits / cfg.replications, "redraws": redraws})
        elif test == "z_c":
            crit_lo = _zc_null_quantiles(cfg, T, cfg.level)
            key = _rng.stream_key(cfg.seed, _ZC_ALT_STREAM, T)
            scale = math.sqrt((nu - 2.0) / nu)  # standardized world
            Y, S2, Y0 = backend.garch_simulate_batch(d0, d1, g0, g1, g2, nu, scale,
                                                     T, cfg.burn_in, np.uint64(key),
                                                     cfg.replications)
            sig = np.sqrt(S2)
            if cfg.dgp is DgpKind.A4:
                mult_var = float(norm.ppf(1.0 - cfg.alpha))
                mult_es = dgplab.normal_tail_mean(cfg.alpha)
                z, nviol = _zc_stats_from_paths(Y, Y0, sig, params, mult_var, mult_es, cfg.alpha)
            else:
                q5 = dgplab.std_t_ppf(1.0 - cfg.alpha, A5_WRONG.nu)
                tau5 = dgplab.std_t_tail_mean(A5_WRONG.nu, cfg.alpha)
                M = np.empty_like(Y)
                M[:, 0] = params.delta0 + params.delta1 * Y0
                M[:, 1:] = params.delta0 + params.delta1 * Y[:, :-1]
                zs = np.empty(cfg.replications)
                nviol = np.empty(cfg.replications, dtype=np.int64)
                for b in range(cfg.replications):
                    s2w = dgplab.wrong_filter_sigma2(Y[b] - M[b], A5_WRONG)
                    sw = np.sqrt(s2w)
                    var = M[b] + sw * q5
                    es = M[b] + sw * tau5
                    v = Y[b] >= var
                    nviol[b] = v.sum()
                    zs[b] = 1.0 - np.sum(Y[b][v] / es[v]) / (T * cfg.alpha) if v.any() else np.nan
                z = zs
            redraws = 0
            next_idx = cfg.replications
            hits = 0
            for b in range(cfg.replications):
                zb, nb = z[b], nviol[b]
                while nb == 0 or not np.isfinite(zb):
                    redraws += 1
                    path = _garch_path_at(cfg, T, key, next_idx, standardized=True)
                    next_idx += 1
                    zb, nb = _zc_alt_single(cfg, path, T)
                hits += zb < crit_lo
            rows.append({"dgp": cfg.dgp.value, "alpha": cfg.alpha, "T": T,
                         "test": "z_c", "level": cfg.level,
                         "rate": hits / cfg.replications, "redraws": redraws})
        else:
            raise DomainError(f"unknown rival test {test!r}")
    return rows


def _zc_alt_single(cfg: ExperimentConfig, path: dgplab.GarchPath, T: int):
    params = cfg.params
    Y = path.y[None, :]
    Y0 = np.array([path.y_lag0])
    sig = np.sqrt(path.sigma2)[None, :]
    if cfg.dgp is DgpKind.A4:
        z, nv = _zc_stats_from_paths(Y, Y0, sig, params,
                                     float(norm.ppf(1.0 - cfg.alpha)),
                                     dgplab.normal_tail_mean(cfg.alpha), cfg.alpha)
        return float(z[0]), int(nv[0])
    m = np.empty(T)
    m[0] = params.delta0 + params.delta1 * path.y_lag0
    m[1:] = params.delta0 + params.delta1 * path.y[:-1]
    s2w = dgplab.wrong_filter_sigma2(path.y - m, A5_WRONG)
    sw = np.sqrt(s2w)
    var = m + sw * dgplab.std_t_ppf(1.0 - cfg.alpha, A5_WRONG.nu)
    es = m + sw * dgplab.std_t_tail_mean(A5_WRONG.nu, cfg.alpha)
    v = path.y >= var
    if not v.any():
        return math.nan, 0
    return float(1.0 - np.sum(path.y[v] / es[v]) / (T * cfg.alpha)), int(v.sum())


def rows_to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def rows_to_json(rows: list[dict]) -> str:
    return json.dumps(rows, indent=2)
