import math

import numpy as np
import pytest
from scipy.stats import kstest

from esbacktest import dgplab, riskmodels
from esbacktest.dgplab import CALIBRATED, GarchParams
from esbacktest.errors import DomainError


def manual_filter(params, y):
    """Hand-rolled recursion oracle following the documented conventions."""
    d0, d1, g0, g1, g2, _ = params.astuple()
    T = len(y)
    m = [0.0] * T
    s2 = [0.0] * T
    eps = [0.0] * T
    m[0] = d0 + d1 * (d0 / (1 - d1))
    eps[0] = y[0] - m[0]
    s2[0] = float(np.var(y))
    for t in range(1, T):
        s2[t] = g0 + g1 * eps[t - 1] ** 2 + g2 * s2[t - 1]
        m[t] = d0 + d1 * y[t - 1]
        eps[t] = y[t] - m[t]
    return np.array(m), np.array(s2), np.array(eps)


def manual_loglik(params, y):
    """Independent scalar log-likelihood implementation."""
    _, s2, eps = manual_filter(params, y)
    nu = params.nu
    const = (math.lgamma((nu + 1) / 2) - math.lgamma(nu / 2)
             - 0.5 * math.log(math.pi * (nu - 2)))
    ll = 0.0
    for t in range(len(y)):
        z2 = eps[t] ** 2 / s2[t]
        ll += const - 0.5 * math.log(s2[t]) - (nu + 1) / 2 * math.log(1 + z2 / (nu - 2))
    return ll


class TestFilter:
    def test_constant_variance_case(self):
        p = GarchParams(0.0, 0.0, 0.49, 0.0, 0.0, 5.0)
        y = np.array([0.1, -0.2, 0.3, 0.0, 0.5])
        m, vol, resid = riskmodels.filter_series(p, y)
        assert np.allclose(vol[1:], 0.7)
        assert np.allclose(m, 0.0)

    def test_white_noise_residuals(self):
        rng = np.random.default_rng(0)
        y = rng.normal(size=500)
        p = GarchParams(0.0, 0.0, 1.0, 0.0, 0.0, 8.0)
        _, vol, resid = riskmodels.filter_series(p, y)
        assert np.allclose(resid[1:], y[1:] / vol[1:])

    def test_matches_hand_rolled_recursion(self):
        rng = np.random.default_rng(1)
        y = rng.normal(size=10)
        m, vol, resid = riskmodels.filter_series(CALIBRATED, y)
        me_, s2e, epse = manual_filter(CALIBRATED, y)
        assert np.allclose(m, me_, atol=1e-12)
        assert np.allclose(vol**2, s2e, atol=1e-12)
        assert np.allclose(resid * vol, epse, atol=1e-12)

    def test_short_series_rejected(self):
        with pytest.raises(DomainError):
            riskmodels.filter_series(CALIBRATED, [1.0])


class TestLoglik:
    def test_matches_independent_implementation(self):
        rng = np.random.default_rng(2)
        y = rng.normal(size=20)
        got = riskmodels.loglik(CALIBRATED, y)
        assert got == pytest.approx(manual_loglik(CALIBRATED, y), rel=1e-10)

    def test_large_dof_approaches_gaussian(self):
        rng = np.random.default_rng(3)
        y = rng.normal(size=200)
        p = GarchParams(0.0, 0.1, 0.3, 0.05, 0.6, 1e6)
        _, s2, eps = manual_filter(p, y)
        gauss = float(np.sum(-0.5 * np.log(2 * np.pi * s2) - 0.5 * eps**2 / s2))
        assert riskmodels.loglik(p, y) == pytest.approx(gauss, abs=0.01)

    def test_location_shift_invariance(self):
        rng = np.random.default_rng(4)
        y = rng.normal(size=100)
        base = GarchParams(0.0, 0.0, 0.5, 0.1, 0.7, 6.0)
        shifted = GarchParams(2.5, 0.0, 0.5, 0.1, 0.7, 6.0)
        assert riskmodels.loglik(base, y) == pytest.approx(
            riskmodels.loglik(shifted, y + 2.5), rel=1e-12)
        # with AR persistence the intercept shifts by c*(1 - delta1)
        base = GarchParams(0.0, 0.3, 0.5, 0.1, 0.7, 6.0)
        shifted = GarchParams(2.5 * 0.7, 0.3, 0.5, 0.1, 0.7, 6.0)
        assert riskmodels.loglik(base, y) == pytest.approx(
            riskmodels.loglik(shifted, y + 2.5), rel=1e-10)

    def test_invalid_params_yield_minus_infinity(self):
        assert riskmodels.loglik((0, 0.05, 0.05, 0.3, 0.8, 5), [0.1, 0.2]) == -math.inf
        assert riskmodels.loglik((0, 0.05, -1.0, 0.1, 0.8, 5), [0.1, 0.2]) == -math.inf


class TestFit:
    def test_recovery_moderate_sample(self):
        path = dgplab.simulate_garch(CALIBRATED, 20_000, seed=42)
        fr = riskmodels.fit(path.y, n_starts=3, seed=0)
        assert fr.converged
        assert fr.params.gamma1 == pytest.approx(0.10, abs=0.04)
        assert fr.params.gamma2 == pytest.approx(0.85, abs=0.05)
        assert fr.params.nu == pytest.approx(5.0, abs=1.2)
        assert fr.loglik >= riskmodels.loglik(CALIBRATED, path.y) - 1e-6

    def test_deterministic_for_seed(self):
        path = dgplab.simulate_garch(CALIBRATED, 3000, seed=43)
        a = riskmodels.fit(path.y, n_starts=2, seed=5, maxiter=800)
        b = riskmodels.fit(path.y, n_starts=2, seed=5, maxiter=800)
        assert a.params == b.params
        assert a.loglik == b.loglik

    def test_refit_on_own_simulation_consistent(self):
        path = dgplab.simulate_garch(CALIBRATED, 20_000, seed=44)
        first = riskmodels.fit(path.y, n_starts=2, seed=0)
        repath = dgplab.simulate_garch(first.params, 20_000, seed=45)
        second = riskmodels.fit(repath.y, n_starts=2, seed=0)
        assert second.params.gamma2 == pytest.approx(first.params.gamma2, abs=0.06)
        assert second.params.gamma1 == pytest.approx(first.params.gamma1, abs=0.04)

    def test_short_series_warns(self):
        rng = np.random.default_rng(6)
        with pytest.warns(UserWarning):
            riskmodels.fit(rng.normal(size=60), n_starts=1, maxiter=50)


class TestForecast:
    def test_correct_model_pit_uniform_and_coverage(self):
        path = dgplab.simulate_garch(CALIBRATED, 12_000, seed=46)
        fc = riskmodels.forecast(CALIBRATED, path.y[:9000], path.y[9000:], 0.05)
        assert kstest(fc.pit, "uniform").pvalue > 0.01
        rate = (fc.pit <= 0.05).mean()
        assert rate == pytest.approx(0.05, abs=3 * math.sqrt(0.05 * 0.95 / 3000))

    def test_es_beyond_var_everywhere(self):
        path = dgplab.simulate_garch(CALIBRATED, 2000, seed=47)
        fc = riskmodels.forecast(CALIBRATED, path.y[:1500], path.y[1500:], 0.05)
        assert np.all(fc.es > fc.var)
        assert np.all(fc.sigma > 0)

    def test_matches_manual_one_step_recursion(self):
        rng = np.random.default_rng(7)
        hist = rng.normal(size=50)
        oos = rng.normal(size=5)
        fc = riskmodels.forecast(CALIBRATED, hist, oos, 0.05)
        m2, s22, eps2 = manual_filter(CALIBRATED, np.concatenate([hist, oos]))
        # the concatenated filter's variance seed is var(hist), not var(full)
        s22[0] = float(np.var(hist))
        for t in range(1, len(s22)):
            s22[t] = (CALIBRATED.gamma0 + CALIBRATED.gamma1 * eps2[t - 1] ** 2
                      + CALIBRATED.gamma2 * s22[t - 1])
        assert np.allclose(fc.mean, m2[50:], atol=1e-12)
        assert np.allclose(fc.sigma**2, s22[50:], atol=1e-12)
        q = dgplab.std_t_ppf(0.95, CALIBRATED.nu)
        assert np.allclose(fc.var, m2[50:] + np.sqrt(s22[50:]) * q, atol=1e-12)

    def test_violation_days_align_with_var_exceedances(self):
        path = dgplab.simulate_garch(CALIBRATED, 4000, seed=48)
        fc = riskmodels.forecast(CALIBRATED, path.y[:3000], path.y[3000:], 0.05)
        oos = path.y[3000:]
        assert np.array_equal(fc.pit <= 0.05, oos >= fc.var)


class TestLjungBox:
    def test_null_pvalues_uniform(self):
        rng = np.random.default_rng(8)
        ps = [riskmodels.ljung_box(rng.normal(size=2000), 10)[1] for _ in range(300)]
        assert kstest(ps, "uniform").pvalue > 0.01

    def test_constant_series_rejected(self):
        with pytest.raises(DomainError):
            riskmodels.ljung_box(np.ones(100), 5)

    def test_detects_strong_autocorrelation(self):
        rng = np.random.default_rng(9)
        x = np.empty(1000)
        x[0] = rng.normal()
        for t in range(1, 1000):
            x[t] = 0.9 * x[t - 1] + rng.normal()
        assert riskmodels.ljung_box(x, 5)[1] < 0.01

    def test_lag_count_validated(self):
        with pytest.raises(DomainError):
            riskmodels.ljung_box(np.arange(10.0), 10)
