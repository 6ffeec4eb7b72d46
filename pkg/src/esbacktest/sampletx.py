"""From reported PIT series to the duration-severity sample.

A reported PIT value u_t is the model-implied quantile level of the
realized return. A VaR violation at level alpha is the event
u_t <= alpha (inclusive; under a continuous model the boundary has
probability zero, one convention is fixed for determinism). On each
violation day the cumulative violation (alpha - u_t)/alpha measures
severity in (0, 1]; between violations the elapsed time is a duration.

Conventions: d_1 is the time to the first violation (d_1 = 1 when the
series starts with a violation); the open spell after the last
violation is right-censored and dropped. A violation at exactly
u_t = alpha yields severity 0, which is kept and counted as a boundary
observation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, InputError, NoViolationsError
from .orthopoly import check_alpha


@dataclass(frozen=True)
class PitSeries:
    """Ordered daily PIT values in [0, 1], with optional date labels."""

    values: np.ndarray
    dates: Optional[tuple] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size < 1:
            raise InputError("PIT series must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(values)):
            raise InputError("PIT series contains missing or non-finite values")
        if values.min() < 0.0 or values.max() > 1.0:
            raise InputError("PIT values must lie in [0, 1]")
        object.__setattr__(self, "values", values)
        if self.dates is not None:
            dates = tuple(self.dates)
            if len(dates) != values.size:
                raise InputError("dates and values must have equal length")
            if any(a >= b for a, b in zip(dates, dates[1:])):
                raise InputError("dates must be strictly increasing")
            object.__setattr__(self, "dates", dates)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class ViolationSeries:
    """Boolean hit sequence h_t = (u_t <= alpha)."""

    hits: np.ndarray
    alpha: float


@dataclass(frozen=True)
class CumulativeViolationSeries:
    """H_t = (alpha - u_t)/alpha on violation days, 0 elsewhere."""

    values: np.ndarray
    alpha: float


@dataclass(frozen=True)
class DurationSeveritySample:
    """Paired inter-violation durations and violation severities.

    ``durations[i]`` is the number of days from the previous violation
    (or from the series start) to the i-th violation; ``severities[i]``
    is the cumulative violation on that day.
    """

    durations: np.ndarray
    severities: np.ndarray
    alpha: float
    n: int = field(init=False)

    def __post_init__(self):
        d = np.asarray(self.durations, dtype=np.int64)
        h = np.asarray(self.severities, dtype=np.float64)
        if d.size != h.size:
            raise InputError("durations and severities must have equal length")
        if d.size and d.min() < 1:
            raise InputError("durations must be positive integers")
        if h.size and (h.min() < 0.0 or h.max() > 1.0):
            raise InputError("severities must lie in [0, 1]")
        object.__setattr__(self, "durations", d)
        object.__setattr__(self, "severities", h)
        object.__setattr__(self, "n", int(d.size))

    @property
    def n_boundary(self) -> int:
        """Violations recorded with severity exactly 0 (u_t == alpha)."""
        return int(np.count_nonzero(self.severities == 0.0))


def _as_pit(u) -> PitSeries:
    return u if isinstance(u, PitSeries) else PitSeries(np.asarray(u, dtype=np.float64))


def violations(u, alpha: float) -> ViolationSeries:
    """VaR violation indicators h_t = (u_t <= alpha)."""
    alpha = check_alpha(alpha)
    pit = _as_pit(u)
    return ViolationSeries(hits=pit.values <= alpha, alpha=alpha)


def cumulative_violations(u, alpha: float) -> CumulativeViolationSeries:
    """Cumulative violation process H_t = (alpha - u_t)/alpha * 1(u_t <= alpha)."""
    alpha = check_alpha(alpha)
    pit = _as_pit(u)
    vals = np.where(pit.values <= alpha, (alpha - pit.values) / alpha, 0.0)
    return CumulativeViolationSeries(values=vals, alpha=alpha)


def extract_sample(u, alpha: float) -> DurationSeveritySample:
    """Build the duration-severity sample from a PIT series.

    Raises
    ------
    NoViolationsError
        If no u_t falls at or below alpha.
    """
    alpha = check_alpha(alpha)
    pit = _as_pit(u)
    idx = np.flatnonzero(pit.values <= alpha)
    if idx.size == 0:
        raise NoViolationsError(
            f"no VaR violations at coverage level alpha={alpha}; the backtest "
            "requires at least one violation"
        )
    times = idx + 1  # 1-based violation dates
    durations = np.diff(times, prepend=0)
    severities = (alpha - pit.values[idx]) / alpha
    return DurationSeveritySample(durations=durations, severities=severities, alpha=alpha)


def rebuild_hits(durations: Sequence[int], total_length: int) -> np.ndarray:
    """Reconstruct the boolean hit series implied by a duration sequence.

    Inverse of :func:`extract_sample` up to the dropped censored tail.
    """
    times = np.cumsum(np.asarray(durations, dtype=np.int64))
    if times.size and times[-1] > total_length:
        raise DomainError("durations exceed the stated series length")
    hits = np.zeros(total_length, dtype=bool)
    hits[times - 1] = True
    return hits
