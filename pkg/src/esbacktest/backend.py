"""Selected numeric backend (numba kernels or pure numpy).

Importing this module binds the hot-loop functions used by the rest
of the package to whichever backend ``_accel`` selected. Use
:func:`get_backend` to obtain a specific implementation regardless of
the environment flag (benchmarks, equivalence tests).
"""

from __future__ import annotations

from . import _accel

if _accel.numba_enabled():
    from . import _backend_numba as _impl
else:
    from . import _backend_numpy as _impl

NAME = _impl.NAME

direct_wald_stats = _impl.direct_wald_stats
garch_simulate = _impl.garch_simulate
garch_simulate_batch = _impl.garch_simulate_batch
garch_filter = _impl.garch_filter
garch_neg_loglik = _impl.garch_neg_loglik


def get_backend(name: str):
    """Return a backend module by name ('numba' or 'numpy')."""
    if name == "numpy":
        from . import _backend_numpy
        return _backend_numpy
    if name == "numba":
        if not _accel.numba_available():
            raise RuntimeError("numba is not importable in this environment")
        from . import _backend_numba
        return _backend_numba
    raise ValueError(f"unknown backend {name!r}")
