"""Backend selection for the hot numeric kernels.

The package ships two implementations of its inner loops: numba
``@njit`` kernels (default) and a vectorized pure-numpy fallback.
Set the environment variable ``ESBACKTEST_NO_NUMBA=1`` before import
to force the numpy path, e.g. on platforms where numba is unavailable
or for debugging. ``benchmarks/bench_backends.py`` compares the two.
"""

from __future__ import annotations

import os

ENV_FLAG = "ESBACKTEST_NO_NUMBA"


def _flag_set() -> bool:
    return os.environ.get(ENV_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


def numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def numba_enabled() -> bool:
    return not _flag_set() and numba_available()


BACKEND_NAME = "numba" if numba_enabled() else "numpy"
