"""Equivalence of the numba kernels and the numpy fallback, and the
environment-flag selection mechanism."""

import os
import subprocess
import sys

import numpy as np
import pytest

from esbacktest import _rng, momentengine as me
from esbacktest._accel import ENV_FLAG
from esbacktest.backend import get_backend

nb = get_backend("numba")
npb = get_backend("numpy")

CAL = (0.0, 0.05, 0.05, 0.1, 0.85, 5.0)
STD_SCALE = np.sqrt(3.0 / 5.0)


def _cond(preset, K, Kp, alpha=0.05):
    spec = me.preset(preset, K, Kp, alpha)
    _, fam, kk, jj = me.encode_conditions(spec)
    jp, jq = me._required_orders(spec)
    return fam, kk, jj, jp, jq


class TestKernelEquivalence:
    @pytest.mark.parametrize("preset,K,Kp,alpha,durkind,nbr,lo,hi", [
        ("global", 1, 2, 0.05, 0, 0, 0.0, 1.0),
        ("global", 4, 3, 0.01, 0, 0, 0.0, 1.0),
        ("cc_var_dur", 2, 3, 0.05, 0, 0, 0.0, 1.0),
        ("global", 1, 2, 0.05, 0, 0, 0.2, 0.8),
        ("global", 2, 2, 0.05, 1, 19, 0.0, 1.0),
    ])
    def test_direct_wald_stats(self, preset, K, Kp, alpha, durkind, nbr, lo, hi):
        fam, kk, jj, jp, jq = _cond(preset, K, Kp, alpha)
        key = np.uint64(_rng.stream_key(42, 0))
        a = nb.direct_wald_stats(64, 37, alpha, fam, kk, jj, jp, jq, key,
                                 durkind, nbr, lo, hi)
        b = npb.direct_wald_stats(64, 37, alpha, fam, kk, jj, jp, jq, key,
                                  durkind, nbr, lo, hi)
        np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-10)

    def test_garch_single_path(self):
        key = np.uint64(_rng.stream_key(7, 1))
        ya, va, y0a = nb.garch_simulate(*CAL, STD_SCALE, 1500, 700, key)
        yb, vb, y0b = npb.garch_simulate(*CAL, STD_SCALE, 1500, 700, key)
        np.testing.assert_allclose(ya, yb, rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(va, vb, rtol=1e-10)
        assert y0a == pytest.approx(y0b, rel=1e-12)

    def test_garch_batch(self):
        key = np.uint64(_rng.stream_key(7, 2))
        A = nb.garch_simulate_batch(*CAL, 1.0, 400, 100, key, 33)
        B = npb.garch_simulate_batch(*CAL, 1.0, 400, 100, key, 33)
        for a, b in zip(A, B):
            np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-11)

    def test_filter_and_loglik(self):
        key = np.uint64(_rng.stream_key(7, 3))
        y, _, y0 = nb.garch_simulate(*CAL, STD_SCALE, 3000, 500, key)
        s2i = float(np.var(y))
        fa = nb.garch_filter(CAL[0], CAL[1], CAL[2], CAL[3], CAL[4], y, y0, s2i)
        fb = npb.garch_filter(CAL[0], CAL[1], CAL[2], CAL[3], CAL[4], y, y0, s2i)
        for a, b in zip(fa, fb):
            np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)
        la = nb.garch_neg_loglik(*CAL, y, y0, s2i)
        lb = npb.garch_neg_loglik(*CAL, y, y0, s2i)
        assert la == pytest.approx(lb, rel=1e-10)

    def test_batch_entry_matches_single_path(self):
        key = _rng.stream_key(9, 4)
        Y, V, Y0 = nb.garch_simulate_batch(*CAL, STD_SCALE, 200, 50, np.uint64(key), 5)
        y, v, y0 = nb.garch_simulate(*CAL, STD_SCALE, 200, 50,
                                     np.uint64(_rng.stream_key_child(key, 3)))
        np.testing.assert_array_equal(Y[3], y)
        np.testing.assert_array_equal(V[3], v)


class TestCounterStreams:
    def test_uniforms_are_open_closed_unit(self):
        u = _rng.uniforms(_rng.stream_key(1, 1), 0, 100_000)
        assert u.min() > 0.0 and u.max() <= 1.0

    def test_streams_do_not_overlap(self):
        a = _rng.uniforms(_rng.stream_key(1, 1), 0, 1000)
        b = _rng.uniforms(_rng.stream_key(1, 2), 0, 1000)
        assert not np.array_equal(a, b)

    def test_counter_windows_are_consistent(self):
        key = _rng.stream_key(2, 5)
        whole = _rng.uniforms(key, 0, 100)
        part = _rng.uniforms(key, 40, 30)
        np.testing.assert_array_equal(whole[40:70], part)

    def test_stream_key_children_compose(self):
        assert _rng.stream_key(3, 4, 5) == _rng.stream_key_child(_rng.stream_key(3, 4), 5)


class TestEnvFlagSelection:
    def test_flag_forces_numpy_backend(self):
        env = dict(os.environ, **{ENV_FLAG: "1"})
        out = subprocess.run(
            [sys.executable, "-c", "import esbacktest; print(esbacktest.BACKEND_NAME)"],
            capture_output=True, text=True, env=env, check=True)
        assert out.stdout.strip() == "numpy"

    def test_default_uses_numba_when_available(self):
        env = {k: v for k, v in os.environ.items() if k != ENV_FLAG}
        out = subprocess.run(
            [sys.executable, "-c", "import esbacktest; print(esbacktest.BACKEND_NAME)"],
            capture_output=True, text=True, env=env, check=True)
        assert out.stdout.strip() == "numba"

    def test_numpy_backend_passes_pipeline_smoke(self):
        env = dict(os.environ, **{ENV_FLAG: "1"})
        code = (
            "import esbacktest as es, numpy as np\n"
            "s = es.DurationSeveritySample(np.array([12, 30, 9]),"
            " np.array([0.3, 0.8, 0.5]), 0.05)\n"
            "out, mv = es.run_test(s, es.preset('global', 1, 2, 0.05),"
            " mc_reps=99, seed=1)\n"
            "assert 0 < out.p_mc <= 1 and out.df == 6\n"
            "print('ok')\n"
        )
        out = subprocess.run([sys.executable, "-c", code], capture_output=True,
                             text=True, env=env, check=True)
        assert out.stdout.strip() == "ok"
