import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import kstest, norm, t as student_t

from esbacktest import dgplab
from esbacktest.dgplab import A5_WRONG, CALIBRATED, DgpKind, GarchParams
from esbacktest.errors import DomainError
from esbacktest.sampletx import cumulative_violations


class TestGarchParams:
    def test_non_stationary_rejected(self):
        with pytest.raises(DomainError):
            GarchParams(0, 0.05, 0.05, 0.2, 0.8, 5)

    def test_low_dof_rejected(self):
        with pytest.raises(DomainError):
            GarchParams(0, 0.05, 0.05, 0.1, 0.85, 2.0)

    def test_negative_variance_coeff_rejected(self):
        with pytest.raises(DomainError):
            GarchParams(0, 0.05, -0.01, 0.1, 0.85, 5)

    def test_unconditional_moments(self):
        assert CALIBRATED.unconditional_variance == pytest.approx(1.0)
        assert CALIBRATED.unconditional_mean == 0.0


class TestDirectNull:
    def test_duration_mean(self):
        s = dgplab.simulate_direct_null(1_000_000, 0.05, seed=1)
        se = math.sqrt((1 - 0.05) / 0.05**2 / s.n)
        assert abs(s.durations.mean() - 20.0) < 3 * se

    def test_severity_mean(self):
        s = dgplab.simulate_direct_null(1_000_000, 0.05, seed=2)
        assert abs(s.severities.mean() - 0.5) < 3 * math.sqrt(1 / 12 / s.n)

    def test_fixed_seed_identical(self):
        a = dgplab.simulate_direct_null(100, 0.05, seed=3)
        b = dgplab.simulate_direct_null(100, 0.05, seed=3)
        assert np.array_equal(a.durations, b.durations)
        assert np.array_equal(a.severities, b.severities)
        c = dgplab.simulate_direct_null(100, 0.05, seed=4)
        assert not np.array_equal(a.severities, c.severities)


class TestAlternatives:
    def test_a1_severity_moments(self):
        s = dgplab.simulate_alternative(DgpKind.A1, 1_000_000, 0.05, seed=5)
        assert s.severities.mean() == pytest.approx(0.5, abs=3 * 0.1733 / 1000)
        assert s.severities.var() == pytest.approx(0.6**2 / 12, rel=0.01)
        assert s.severities.min() >= 0.2 and s.severities.max() <= 0.8

    def test_a2_duration_moments_match_negative_binomial(self):
        s = dgplab.simulate_alternative(DgpKind.A2, 1_000_000, 0.05, seed=6)
        r = 19  # (1 - alpha)/alpha successes at p = 0.5
        mean, var = 1 + r, r * 0.5 / 0.25
        assert s.durations.mean() == pytest.approx(mean, abs=3 * math.sqrt(var / s.n))
        assert s.durations.var() == pytest.approx(var, rel=0.02)

    def test_a3_composes_a1_severities_with_a2_durations(self):
        a1 = dgplab.simulate_alternative(DgpKind.A1, 500, 0.05, seed=7)
        a2 = dgplab.simulate_alternative(DgpKind.A2, 500, 0.05, seed=7)
        a3 = dgplab.simulate_alternative(DgpKind.A3, 500, 0.05, seed=7)
        assert np.array_equal(a3.durations, a2.durations)
        assert np.array_equal(a3.severities, a1.severities)

    def test_non_integer_success_count_uses_mixture_fallback(self):
        s = dgplab.simulate_alternative(DgpKind.A2, 200_000, 0.03, seed=8)
        r = (1 - 0.03) / 0.03
        assert s.durations.min() >= 1
        assert s.durations.mean() == pytest.approx(1 + r, rel=0.02)

    def test_null_direct_kind_not_an_alternative(self):
        with pytest.raises(DomainError):
            dgplab.simulate_alternative(DgpKind.NULL_DIRECT, 10, 0.05, seed=0)


class TestGarchSimulation:
    def test_degenerate_recursion_is_iid_with_variance_gamma0(self):
        p = GarchParams(0.0, 0.0, 0.7, 0.0, 0.0, 6.0)
        path = dgplab.simulate_garch(p, 1_000_000, burn_in=100, seed=9)
        assert path.y.var() == pytest.approx(0.7, rel=0.02)
        assert np.allclose(path.sigma2, 0.7)
        rho = np.corrcoef(path.y[:-1], path.y[1:])[0, 1]
        assert abs(rho) < 3 / math.sqrt(path.y.size)

    def test_calibrated_unconditional_variance(self):
        path = dgplab.simulate_garch(CALIBRATED, 1_000_000, seed=10)
        assert path.y.var() == pytest.approx(1.0, abs=0.05)

    def test_fixed_seed_reproducible(self):
        a = dgplab.simulate_garch(CALIBRATED, 500, seed=11)
        b = dgplab.simulate_garch(CALIBRATED, 500, seed=11)
        assert np.array_equal(a.y, b.y)

    def test_batch_variance_sane(self):
        Y, S2, Y0 = dgplab.simulate_garch_batch(CALIBRATED, 2000, 32, seed=12)
        assert Y.shape == (32, 2000)
        assert abs(Y.var() - 1.0) < 0.1

    def test_raw_innovations_have_larger_tails(self):
        std = dgplab.simulate_garch(CALIBRATED, 200_000, seed=13, standardized=True)
        raw = dgplab.simulate_garch(CALIBRATED, 200_000, seed=13, standardized=False)
        assert raw.y.var() > std.y.var()


class TestPits:
    def test_true_pit_uniform_and_serially_uncorrelated(self):
        path = dgplab.simulate_garch(CALIBRATED, 100_000, seed=14)
        u = dgplab.pit_true(path, CALIBRATED).values
        assert kstest(u, "uniform").pvalue > 0.01
        rho = np.corrcoef(u[:-1], u[1:])[0, 1]
        assert abs(rho) < 3 / math.sqrt(u.size)

    def test_constant_variance_case_matches_direct_cdf(self):
        p = GarchParams(0.1, 0.0, 0.5, 0.0, 0.0, 7.0)
        path = dgplab.simulate_garch(p, 2000, seed=15)
        u = dgplab.pit_true(path, p).values
        eta = (path.y - 0.1) / math.sqrt(0.5)
        expect = student_t.sf(eta * math.sqrt(7 / 5), 7)
        assert np.allclose(u, expect, atol=1e-12)

    def test_a4_pit_iid_but_not_uniform(self):
        path = dgplab.simulate_garch(CALIBRATED, 100_000, seed=16)
        u = dgplab.pit_bank_a4(path, CALIBRATED).values
        assert kstest(u, "uniform").pvalue < 1e-6
        # violation frequency at alpha: survival of standardized t5 at z_{0.95}
        expect = student_t.sf(norm.ppf(0.95) * math.sqrt(5 / 3), 5)
        rate = (u <= 0.05).mean()
        assert rate == pytest.approx(expect, abs=3 * math.sqrt(expect * (1 - expect) / u.size))

    def test_a4_approaches_uniform_for_large_dof(self):
        p = GarchParams(0.0, 0.05, 0.05, 0.1, 0.85, 1e6)
        path = dgplab.simulate_garch(p, 50_000, seed=17)
        u = dgplab.pit_bank_a4(path, p).values
        assert kstest(u, "uniform").pvalue > 0.01

    def test_a5_induces_positive_severity_autocorrelation(self):
        path = dgplab.simulate_garch(CALIBRATED, 100_000, seed=18)
        u = dgplab.pit_bank_a5(path, CALIBRATED).values
        H = cumulative_violations(u, 0.05).values
        rho = np.corrcoef(H[:-1], H[1:])[0, 1]
        assert rho > 3 / math.sqrt(H.size)

    def test_a5_with_true_params_equals_true_pit_modulo_initialization(self):
        path = dgplab.simulate_garch(CALIBRATED, 5000, seed=19)
        u5 = dgplab.pit_bank_a5(path, CALIBRATED, CALIBRATED).values
        ut = dgplab.pit_true(path, CALIBRATED).values
        # the bank filter re-initializes at the unconditional variance, so
        # the two agree once the filter has forgotten its start
        assert np.allclose(u5[500:], ut[500:], atol=1e-8)

    def test_a5_reproducible(self):
        path = dgplab.simulate_garch(CALIBRATED, 1000, seed=20)
        a = dgplab.pit_bank_a5(path, CALIBRATED).values
        b = dgplab.pit_bank_a5(path, CALIBRATED).values
        assert np.array_equal(a, b)


class TestTailMeans:
    def test_closed_form_matches_two_independent_quadratures(self):
        for nu, alpha in [(5.0, 0.05), (7.0, 0.01), (4.0, 0.025)]:
            c = math.sqrt((nu - 2) / nu)
            q = student_t.ppf(1 - alpha, nu)
            # oracle 1: adaptive quadrature of the raw-t partial expectation
            m1 = c * quad(lambda x: x * student_t.pdf(x, nu), q, np.inf)[0] / alpha
            # oracle 2: quadrature of the quantile function over the tail
            m2 = c * quad(lambda p: student_t.ppf(p, nu), 1 - alpha, 1)[0] / alpha
            assert m1 == pytest.approx(m2, abs=1e-8)
            assert dgplab.std_t_tail_mean(nu, alpha) == pytest.approx(m1, abs=1e-8)

    def test_large_dof_limit_matches_normal(self):
        expect = dgplab.normal_tail_mean(0.5)
        assert expect == pytest.approx(norm.pdf(0) / 0.5)
        assert dgplab.std_t_tail_mean(1e6, 0.5) == pytest.approx(expect, abs=1e-4)

    def test_var_es_offsets(self):
        var, es = dgplab.true_var_es(CALIBRATED, 0.05, y_prev=2.0, sigma_t=0.0)
        assert var == es == pytest.approx(0.05 * 2.0)
        var, es = dgplab.true_var_es(CALIBRATED, 0.05, y_prev=0.0, sigma_t=1.5)
        assert es > var > 0
