"""Marginal-Expected-Shortfall backtesting from bivariate PIT inputs.

The market PIT series u2 defines the violation events (u2 <= alpha)
and hence the durations, exactly as in the ES case; the severity of
each event is the firm's conditional PIT u12 on that day, which under
a correct model is i.i.d. uniform and independent of the durations.
The core duration-severity test then applies unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InputError, NoViolationsError
from .orthopoly import check_alpha
from .sampletx import DurationSeveritySample


@dataclass(frozen=True)
class BivariatePitSeries:
    """Market PITs u2 with firm-conditional PITs u12.

    u12 entries may be NaN on dates without a market violation; they
    are required (and validated) wherever u2 <= alpha.
    """

    u2: np.ndarray
    u12: np.ndarray
    dates: Optional[tuple] = None

    def __post_init__(self):
        u2 = np.asarray(self.u2, dtype=np.float64)
        u12 = np.asarray(self.u12, dtype=np.float64)
        if u2.ndim != 1 or u2.size < 1:
            raise InputError("market PIT series must be a non-empty 1-d sequence")
        if u2.size != u12.size:
            raise InputError("u2 and u12 must have equal length")
        if not np.all(np.isfinite(u2)) or u2.min() < 0.0 or u2.max() > 1.0:
            raise InputError("market PITs must be finite values in [0, 1]")
        finite12 = np.isfinite(u12)
        if np.any((u12[finite12] < 0.0) | (u12[finite12] > 1.0)):
            raise InputError("firm-conditional PITs must lie in [0, 1]")
        object.__setattr__(self, "u2", u2)
        object.__setattr__(self, "u12", u12)
        if self.dates is not None:
            dates = tuple(self.dates)
            if len(dates) != u2.size:
                raise InputError("dates and PITs must have equal length")
            object.__setattr__(self, "dates", dates)

    def __len__(self) -> int:
        return self.u2.size


def mes_sample(b: BivariatePitSeries, alpha: float) -> DurationSeveritySample:
    """Durations between market VaR violations paired with the firm's
    conditional PIT at each violation.

    Unlike the ES case the severity is the conditional PIT itself (no
    (alpha - u)/alpha transform); it is uniform on [0, 1] under the
    null. u12 values on non-violation dates are ignored.
    """
    alpha = check_alpha(alpha)
    idx = np.flatnonzero(b.u2 <= alpha)
    if idx.size == 0:
        raise NoViolationsError(
            f"no market VaR violations at coverage level alpha={alpha}"
        )
    sev = b.u12[idx]
    missing = ~np.isfinite(sev)
    if missing.any():
        where = int(idx[missing][0])
        raise InputError(
            f"firm-conditional PIT missing on market violation date (row {where + 1})"
        )
    durations = np.diff(idx + 1, prepend=0)
    return DurationSeveritySample(durations=durations, severities=sev, alpha=alpha)
