"""Counter-based random streams.

Every simulation in this package draws from splitmix64-style counter
streams: a 64-bit stream key plus a draw index maps to one uint64,
with no sequential state. Replications can therefore run in any order
(or in parallel) and still produce identical output for a given seed.

The numba backend re-implements the same scalar arithmetic inside its
kernels; the vectorized functions here are the numpy reference path.
Both produce bit-identical uint64/uniform streams.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

_U_GOLDEN = np.uint64(GOLDEN)
_U_MIX1 = np.uint64(_MIX1)
_U_MIX2 = np.uint64(_MIX2)


def mix64(z: int) -> int:
    """splitmix64 finalizer on a python int, mod 2**64."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return (z ^ (z >> 31)) & _MASK


def stream_key(seed: int, *ids: int) -> int:
    """Derive a child stream key from a seed and a path of stream ids."""
    key = mix64((seed & _MASK) + GOLDEN)
    for i in ids:
        key = mix64(key ^ (((i + 1) * GOLDEN) & _MASK))
    return key


def stream_key_child(key: int, i: int) -> int:
    """One derivation step below an existing stream key (matches the
    in-kernel child derivation of the numba backend)."""
    return mix64((key & _MASK) ^ (((i + 1) * GOLDEN) & _MASK))


def _mix64_arr(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _U_MIX1
    z = (z ^ (z >> np.uint64(27))) * _U_MIX2
    return z ^ (z >> np.uint64(31))


def raw_at(key: int, start: int, count: int) -> np.ndarray:
    """uint64 draws at counter positions start..start+count-1."""
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    return _mix64_arr(np.uint64(key) + idx * _U_GOLDEN)


def uniforms(key: int, start: int, count: int) -> np.ndarray:
    """i.i.d. uniforms on (0, 1], 53-bit resolution."""
    z = raw_at(key, start, count)
    return ((z >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53


def geometric(key: int, start: int, count: int, alpha: float) -> np.ndarray:
    """i.i.d. geometric(alpha) draws on {1, 2, ...} by inverse CDF."""
    u = uniforms(key, start, count)
    d = np.ceil(np.log(u) / np.log1p(-alpha))
    return np.maximum(d, 1.0).astype(np.int64)


def student_t_std(key: int, start: int, count: int, nu: float) -> np.ndarray:
    """i.i.d. standardized Student-t(nu) draws (unit variance, nu > 2).

    Polar construction: with W, V independent uniforms,
    sqrt(nu * (W**(-2/nu) - 1)) * cos(2*pi*V) is Student-t(nu); the
    result is scaled by sqrt((nu-2)/nu). Uses counter positions
    2*start .. 2*(start+count)-1 (two uniforms per draw).
    """
    u = uniforms(key, 2 * start, 2 * count)
    w = u[0::2]
    v = u[1::2]
    x = np.sqrt(nu * (w ** (-2.0 / nu) - 1.0)) * np.cos(2.0 * np.pi * v)
    return x * np.sqrt((nu - 2.0) / nu)
