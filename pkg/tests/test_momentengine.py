import numpy as np
import pytest
from scipy.stats import kstest, norm

from esbacktest import dgplab, momentengine as me, orthopoly as op
from esbacktest.errors import DomainError, SampleTooSmallError
from esbacktest.momentengine import MomentFamily, MomentSpec
from esbacktest.sampletx import DurationSeveritySample


def naive_moment_vector(durations, severities, spec):
    """Independent double-loop re-implementation used as the oracle."""
    d = list(map(float, durations))
    h = list(map(float, severities))
    n = len(d)
    out = []
    for c in me.enumerate_conditions(spec):
        vals = []
        if c.family is MomentFamily.MARG_SEV:
            vals = [op.legendre(c.j, h[i]) for i in range(n)]
        elif c.family is MomentFamily.MARG_DUR:
            vals = [op.meixner(c.j, d[i], spec.alpha) for i in range(n)]
        elif c.family is MomentFamily.DUR_DUR:
            vals = [op.meixner(c.k, d[i], spec.alpha) * op.meixner(c.j, d[i + 1], spec.alpha)
                    for i in range(n - 1)]
        elif c.family is MomentFamily.SEV_SEV:
            vals = [op.legendre(c.k, h[i + 1]) * op.legendre(c.j, h[i]) for i in range(n - 1)]
        elif c.family is MomentFamily.DUR_SEV_SAME:
            vals = [op.meixner(c.k, d[i], spec.alpha) * op.legendre(c.j, h[i])
                    for i in range(n)]
        else:
            vals = [op.meixner(c.k, d[i + 1], spec.alpha) * op.legendre(c.j, h[i])
                    for i in range(n - 1)]
        out.append((sum(vals) / len(vals), len(vals)))
    return out


class TestEnumeration:
    def test_minimal_global_set_has_six_conditions(self):
        spec = me.preset("global", 1, 2, 0.05)
        assert spec.n_conditions == 6

    def test_count_formula_example(self):
        spec = me.preset("global", 4, 3, 0.05)
        assert spec.n_conditions == 2 * 4 + 2 * 3 * (3 - 1)

    def test_marginal_only_count(self):
        spec = MomentSpec(K=2, Kprime=None,
                          families=(MomentFamily.MARG_SEV, MomentFamily.MARG_DUR),
                          alpha=0.05)
        assert spec.n_conditions == 4

    @pytest.mark.parametrize("K", range(1, 7))
    @pytest.mark.parametrize("Kp", range(2, 7))
    def test_count_identity_on_grid(self, K, Kp):
        spec = me.preset("global", K, Kp, 0.05)
        assert spec.n_conditions == 2 * K + 2 * Kp * (Kp - 1)

    def test_deterministic_ordering(self):
        labels = [c.label() for c in me.enumerate_conditions(me.preset("global", 2, 3, 0.05))]
        assert labels == [
            "marg_sev(1)", "marg_sev(2)", "marg_dur(1)", "marg_dur(2)",
            "dur_dur(1,1)", "dur_dur(1,2)", "dur_dur(2,1)",
            "sev_sev(1,1)", "sev_sev(1,2)", "sev_sev(2,1)",
            "dur_sev_same(1,1)", "dur_sev_same(1,2)", "dur_sev_same(2,1)",
            "dur_next_sev(1,1)", "dur_next_sev(1,2)", "dur_next_sev(2,1)",
        ]


class TestPresets:
    def test_family_sets(self):
        assert set(me.preset("global", 1, 2, 0.05).families) == set(MomentFamily)
        assert set(me.preset("uc_var_es", 1, None, 0.05).families) == {
            MomentFamily.MARG_SEV, MomentFamily.MARG_DUR}
        assert set(me.preset("cc_var_dur", 1, 2, 0.05).families) == {
            MomentFamily.MARG_DUR, MomentFamily.DUR_DUR}
        assert set(me.preset("cc_var", 1, 2, 0.05).families) == {
            MomentFamily.MARG_DUR, MomentFamily.DUR_DUR, MomentFamily.DUR_NEXT_SEV}
        assert set(me.preset("cc_var_es", 1, 2, 0.05).families) == {
            MomentFamily.MARG_SEV, MomentFamily.MARG_DUR, MomentFamily.SEV_SEV}

    def test_preset_condition_counts(self):
        assert me.preset("cc_var_dur", 1, 2, 0.05).n_conditions == 2
        assert me.preset("uc_var_es", 4, None, 0.05).n_conditions == 8
        assert me.preset("global", 1, 2, 0.05).n_conditions == 6

    def test_unknown_preset(self):
        with pytest.raises(DomainError):
            me.preset("nope", 1, 2, 0.05)

    def test_joint_family_requires_kprime(self):
        with pytest.raises(DomainError):
            me.preset("cc_var_dur", 1, None, 0.05)
        with pytest.raises(DomainError):
            me.preset("global", 1, 1, 0.05)


class TestEvaluate:
    def test_mean_duration_condition_vanishes_at_twenty(self):
        s = DurationSeveritySample([20, 20], [0.5, 0.5], 0.05)
        mv = me.evaluate(s, me.preset("global", 1, 2, 0.05))
        by_label = {c.label(): m for c, m, _ in mv.entries()}
        assert by_label["marg_dur(1)"] == pytest.approx(0.0, abs=1e-14)
        assert by_label["marg_sev(1)"] == pytest.approx(0.0, abs=1e-14)

    def test_same_index_cross_condition_matches_scalar_arithmetic(self):
        s = DurationSeveritySample([1, 2], [0.6, 0.4], 0.05)
        spec = MomentSpec(K=1, Kprime=2, families=(MomentFamily.DUR_SEV_SAME,), alpha=0.05)
        mv = me.evaluate(s, spec)
        expect = np.mean([op.meixner(1, 1, 0.05) * op.legendre(1, 0.6),
                          op.meixner(1, 2, 0.05) * op.legendre(1, 0.4)])
        assert mv.means[0] == pytest.approx(expect, rel=1e-14)

    def test_sample_sizes_per_family(self):
        s = DurationSeveritySample([1, 2, 3], [0.6, 0.4, 0.2], 0.05)
        mv = me.evaluate(s, me.preset("global", 1, 2, 0.05))
        ms = {c.label(): m for c, _, m in mv.entries()}
        assert ms["marg_sev(1)"] == 3
        assert ms["marg_dur(1)"] == 3
        assert ms["dur_sev_same(1,1)"] == 3
        assert ms["dur_dur(1,1)"] == 2
        assert ms["sev_sev(1,1)"] == 2
        assert ms["dur_next_sev(1,1)"] == 2

    def test_oracle_equivalence_on_random_tiny_samples(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            n = int(rng.integers(2, 11))
            d = rng.integers(1, 60, size=n)
            h = rng.random(n)
            alpha = float(rng.choice([0.01, 0.05, 0.1]))
            K = int(rng.integers(1, 5))
            Kp = int(rng.integers(2, 5))
            spec = me.preset("global", K, Kp, alpha)
            mv = me.evaluate(DurationSeveritySample(d, h, alpha), spec)
            expect = naive_moment_vector(d, h, spec)
            for (got_mean, got_m), (exp_mean, exp_m) in zip(
                    zip(mv.means, mv.ms), expect):
                assert got_m == exp_m
                assert got_mean == pytest.approx(exp_mean, rel=1e-12, abs=1e-12)

    def test_single_violation_rejected_for_lagged_families(self):
        s = DurationSeveritySample([5], [0.5], 0.05)
        with pytest.raises(SampleTooSmallError):
            me.evaluate(s, me.preset("global", 1, 2, 0.05))
        mv = me.evaluate(s, me.preset("uc_var_es", 2, None, 0.05))
        assert len(mv) == 4

    def test_alpha_mismatch_rejected(self):
        s = DurationSeveritySample([5, 6], [0.5, 0.4], 0.05)
        with pytest.raises(DomainError):
            me.evaluate(s, me.preset("global", 1, 2, 0.01))


class TestNullMomentDistribution:
    def test_standardized_means_are_standard_normal_and_uncorrelated(self):
        spec = me.preset("global", 1, 2, 0.05)
        reps, n = 10_000, 250
        vecs = np.empty((reps, spec.n_conditions))
        scale = np.empty(spec.n_conditions)
        for r in range(reps):
            s = dgplab.simulate_direct_null(n, 0.05, seed=21, index=r)
            mv = me.evaluate(s, spec)
            vecs[r] = mv.means
            scale = np.sqrt(mv.ms)
        z = vecs * scale
        for c in range(z.shape[1]):
            assert kstest(z[:, c], norm.cdf).pvalue > 0.01
        corr = np.corrcoef(z.T)
        off = corr[~np.eye(corr.shape[0], dtype=bool)]
        assert np.abs(off).max() < 0.05
