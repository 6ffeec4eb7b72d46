"""Orthonormal polynomial families for durations and severities.

Two families are used throughout the package:

* shifted Meixner polynomials ``P_j(x, alpha)``, orthonormal for the
  geometric(alpha) distribution on {1, 2, ...} (inter-violation
  durations under a correct model);
* shifted, normalized Legendre polynomials ``Q_j(y)``, orthonormal for
  the uniform distribution on [0, 1] (violation severities under a
  correct model).

Both are evaluated by their three-term recurrences, which are the
authoritative definitions here. Orders above 8 are permitted but not
validated for numerical stability.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

#: orders above this are allowed but untested for stability
SOFT_MAX_ORDER = 8


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0 or not math.isfinite(alpha):
        raise DomainError(f"coverage level must be in (0, 1), got {alpha!r}")
    return alpha


def _check_order(j: int) -> int:
    if j != int(j) or j < 0:
        raise DomainError(f"polynomial order must be a non-negative integer, got {j!r}")
    return int(j)


def meixner(j: int, x: float, alpha: float) -> float:
    """Shifted Meixner polynomial P_j(x, alpha) at a single point.

    Orthonormal family for the geometric(alpha) distribution on
    {1, 2, ...}: P_0 = 1, P_1(x) = (1 - alpha*x)/sqrt(1 - alpha), and

        P_{j+1}(x) = [((1-a)(2j+1) + a(j - x + 1)) / ((j+1) sqrt(1-a))] P_j(x)
                     - [j/(j+1)] P_{j-1}(x).

    Parameters
    ----------
    j : int
        Polynomial degree, >= 0.
    x : float
        Evaluation point, >= 1 (duration support).
    alpha : float
        Coverage level in (0, 1).
    """
    j = _check_order(j)
    alpha = check_alpha(alpha)
    if x < 1:
        raise DomainError(f"duration argument must be >= 1, got {x!r}")
    s = math.sqrt(1.0 - alpha)
    p_prev = 1.0
    if j == 0:
        return p_prev
    p = (1.0 - alpha * x) / s
    for deg in range(1, j):
        p, p_prev = (
            (((1.0 - alpha) * (2 * deg + 1) + alpha * (deg - x + 1)) / ((deg + 1) * s)) * p
            - (deg / (deg + 1)) * p_prev,
            p,
        )
    return p


def legendre(j: int, y: float) -> float:
    """Shifted normalized Legendre polynomial Q_j(y) at a single point.

    Orthonormal family for the uniform distribution on [0, 1]:
    Q_j(y) = sqrt(2j+1) * L_j(2y - 1) with L_j the standard Legendre
    recurrence.
    """
    j = _check_order(j)
    if not 0.0 <= y <= 1.0:
        raise DomainError(f"severity argument must be in [0, 1], got {y!r}")
    if j == 0:
        return 1.0
    z = 2.0 * y - 1.0
    l_prev = 1.0
    l_cur = z
    for deg in range(1, j):
        l_cur, l_prev = ((2 * deg + 1) * z * l_cur - deg * l_prev) / (deg + 1), l_cur
    return math.sqrt(2 * j + 1) * l_cur


def meixner_table(x: np.ndarray, alpha: float, jmax: int) -> np.ndarray:
    """P_j(x_i, alpha) for all j = 0..jmax, shape (jmax+1, len(x))."""
    alpha = check_alpha(alpha)
    x = np.asarray(x, dtype=np.float64)
    out = np.empty((jmax + 1, x.size), dtype=np.float64)
    out[0] = 1.0
    if jmax == 0:
        return out
    s = math.sqrt(1.0 - alpha)
    out[1] = (1.0 - alpha * x) / s
    for deg in range(1, jmax):
        coef = ((1.0 - alpha) * (2 * deg + 1) + alpha * (deg - x + 1)) / ((deg + 1) * s)
        out[deg + 1] = coef * out[deg] - (deg / (deg + 1)) * out[deg - 1]
    return out


def legendre_table(y: np.ndarray, jmax: int) -> np.ndarray:
    """Q_j(y_i) for all j = 0..jmax, shape (jmax+1, len(y))."""
    y = np.asarray(y, dtype=np.float64)
    out = np.empty((jmax + 1, y.size), dtype=np.float64)
    out[0] = 1.0
    if jmax == 0:
        return out
    z = 2.0 * y - 1.0
    l_prev = np.ones_like(z)
    l_cur = z.copy()
    out[1] = math.sqrt(3.0) * l_cur
    for deg in range(1, jmax):
        l_cur, l_prev = ((2 * deg + 1) * z * l_cur - deg * l_prev) / (deg + 1), l_cur
        out[deg + 1] = math.sqrt(2 * (deg + 1) + 1) * l_cur
    return out
