"""Orthogonal moment conditions on the duration-severity sample.

Under a correct model the durations are i.i.d. geometric(alpha), the
severities i.i.d. uniform, and all pairs (d_i, d_{i+1}), (H_i, H_{i+1}),
(d_i, H_i), (d_{i+1}, H_i) are independent. Each such statement maps to
a family of zero-mean orthonormal moment conditions built from the
Meixner/Legendre polynomials; this module enumerates and evaluates
them, and exposes the named subtest presets.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import orthopoly
from .errors import DomainError, SampleTooSmallError
from .orthopoly import check_alpha
from .sampletx import DurationSeveritySample


class MomentFamily(enum.Enum):
    """The six condition families, in canonical order."""

    MARG_SEV = "marg_sev"          # E[Q_j(H_i)] = 0
    MARG_DUR = "marg_dur"          # E[P_j(d_i)] = 0
    DUR_DUR = "dur_dur"            # E[P_k(d_i) P_j(d_{i+1})] = 0
    SEV_SEV = "sev_sev"            # E[Q_k(H_{i+1}) Q_j(H_i)] = 0
    DUR_SEV_SAME = "dur_sev_same"  # E[P_k(d_i) Q_j(H_i)] = 0
    DUR_NEXT_SEV = "dur_next_sev"  # E[P_k(d_{i+1}) Q_j(H_i)] = 0

    @property
    def is_joint(self) -> bool:
        return self not in (MomentFamily.MARG_SEV, MomentFamily.MARG_DUR)

    @property
    def is_lagged(self) -> bool:
        """Families averaging over consecutive pairs (n - 1 terms)."""
        return self in (MomentFamily.DUR_DUR, MomentFamily.SEV_SEV, MomentFamily.DUR_NEXT_SEV)


_FAMILY_ORDER = tuple(MomentFamily)
_FAMILY_CODE = {fam: i for i, fam in enumerate(_FAMILY_ORDER)}

PRESETS = {
    "global": _FAMILY_ORDER,
    "uc_var_es": (MomentFamily.MARG_SEV, MomentFamily.MARG_DUR),
    "cc_var_dur": (MomentFamily.MARG_DUR, MomentFamily.DUR_DUR),
    "cc_var": (MomentFamily.MARG_DUR, MomentFamily.DUR_DUR, MomentFamily.DUR_NEXT_SEV),
    "cc_var_es": (MomentFamily.MARG_SEV, MomentFamily.MARG_DUR, MomentFamily.SEV_SEV),
}


@dataclass(frozen=True)
class MomentCondition:
    family: MomentFamily
    k: int  # 0 for marginal families
    j: int

    def label(self) -> str:
        if self.family.is_joint:
            return f"{self.family.value}({self.k},{self.j})"
        return f"{self.family.value}({self.j})"


@dataclass(frozen=True)
class MomentSpec:
    """Selected condition set: marginal orders up to K, joint total
    order k + j up to Kprime, over a subset of the six families."""

    K: int
    Kprime: Optional[int]
    families: tuple
    alpha: float
    preset: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "alpha", check_alpha(self.alpha))
        fams = tuple(f for f in _FAMILY_ORDER if f in set(self.families))
        if not fams:
            raise DomainError("at least one moment family must be selected")
        object.__setattr__(self, "families", fams)
        if int(self.K) < 1:
            raise DomainError(f"K must be >= 1, got {self.K}")
        object.__setattr__(self, "K", int(self.K))
        has_joint = any(f.is_joint for f in fams)
        if has_joint:
            if self.Kprime is None or int(self.Kprime) < 2:
                raise DomainError(
                    "Kprime must be >= 2 when a joint family is selected, "
                    f"got {self.Kprime!r}"
                )
            object.__setattr__(self, "Kprime", int(self.Kprime))
        elif self.Kprime is not None:
            object.__setattr__(self, "Kprime", int(self.Kprime))

    @property
    def has_lagged(self) -> bool:
        return any(f.is_lagged for f in self.families)

    @property
    def n_conditions(self) -> int:
        return len(enumerate_conditions(self))


def preset(name: str, K: int, Kprime: Optional[int], alpha: float) -> MomentSpec:
    """Named condition sets.

    ``global``      all six families (joint CC test of VaR and ES)
    ``uc_var_es``   both marginal families (UC test of the pair)
    ``cc_var_dur``  duration marginals + duration serial independence
    ``cc_var``      cc_var_dur + severity-to-next-duration feedback
    ``cc_var_es``   marginals + severity serial independence
    """
    try:
        fams = PRESETS[name]
    except KeyError:
        raise DomainError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return MomentSpec(K=K, Kprime=Kprime, families=fams, alpha=alpha, preset=name)


def enumerate_conditions(spec: MomentSpec) -> list[MomentCondition]:
    """Deterministic condition ordering.

    Marginal families first (j = 1..K), then each joint family in
    canonical order with (k, j) lexicographic, k + j <= Kprime. For the
    global set the count is 2K + 2*Kprime*(Kprime - 1).
    """
    out: list[MomentCondition] = []
    for fam in spec.families:
        if not fam.is_joint:
            out.extend(MomentCondition(fam, 0, j) for j in range(1, spec.K + 1))
    for fam in spec.families:
        if fam.is_joint:
            for k in range(1, spec.Kprime):
                for j in range(1, spec.Kprime - k + 1):
                    out.append(MomentCondition(fam, k, j))
    return out


@dataclass(frozen=True)
class MomentVector:
    """Evaluated per-condition sample means with their sample sizes."""

    conditions: tuple
    means: np.ndarray
    ms: np.ndarray
    spec: MomentSpec
    n: int

    def __len__(self) -> int:
        return len(self.conditions)

    def entries(self):
        return list(zip(self.conditions, self.means.tolist(), self.ms.tolist()))


def encode_conditions(spec: MomentSpec):
    """Integer encoding (family codes, k, j) consumed by the kernels."""
    conds = enumerate_conditions(spec)
    fam = np.array([_FAMILY_CODE[c.family] for c in conds], dtype=np.int64)
    kk = np.array([c.k for c in conds], dtype=np.int64)
    jj = np.array([c.j for c in conds], dtype=np.int64)
    return conds, fam, kk, jj


def _required_orders(spec: MomentSpec) -> tuple[int, int]:
    """Highest Meixner / Legendre orders any selected condition needs."""
    jmax_p = 0
    jmax_q = 0
    for c in enumerate_conditions(spec):
        if c.family is MomentFamily.MARG_DUR:
            jmax_p = max(jmax_p, c.j)
        elif c.family is MomentFamily.MARG_SEV:
            jmax_q = max(jmax_q, c.j)
        elif c.family is MomentFamily.DUR_DUR:
            jmax_p = max(jmax_p, c.k, c.j)
        elif c.family is MomentFamily.SEV_SEV:
            jmax_q = max(jmax_q, c.k, c.j)
        else:
            jmax_p = max(jmax_p, c.k)
            jmax_q = max(jmax_q, c.j)
    return jmax_p, jmax_q


def evaluate(sample: DurationSeveritySample, spec: MomentSpec) -> MomentVector:
    """Evaluate every condition mean on a sample.

    Marginal and same-index families average over all n observations;
    lagged families average over the n - 1 consecutive pairs.
    """
    if sample.alpha != spec.alpha:
        raise DomainError(
            f"sample alpha {sample.alpha} does not match spec alpha {spec.alpha}"
        )
    n = sample.n
    if n < 1:
        raise SampleTooSmallError("sample contains no violations")
    if spec.has_lagged and n < 2:
        offender = next(f for f in spec.families if f.is_lagged)
        raise SampleTooSmallError(
            f"family {offender.value} needs at least 2 violations, sample has {n}"
        )
    conds = enumerate_conditions(spec)
    jmax_p, jmax_q = _required_orders(spec)
    P = orthopoly.meixner_table(sample.durations.astype(np.float64), spec.alpha, jmax_p)
    Q = orthopoly.legendre_table(sample.severities, jmax_q)
    means = np.empty(len(conds))
    ms = np.empty(len(conds), dtype=np.int64)
    for i, c in enumerate(conds):
        if c.family is MomentFamily.MARG_SEV:
            vals = Q[c.j]
        elif c.family is MomentFamily.MARG_DUR:
            vals = P[c.j]
        elif c.family is MomentFamily.DUR_DUR:
            vals = P[c.k, :-1] * P[c.j, 1:]
        elif c.family is MomentFamily.SEV_SEV:
            vals = Q[c.k, 1:] * Q[c.j, :-1]
        elif c.family is MomentFamily.DUR_SEV_SAME:
            vals = P[c.k] * Q[c.j]
        else:  # DUR_NEXT_SEV
            vals = P[c.k, 1:] * Q[c.j, :-1]
        means[i] = vals.mean()
        ms[i] = vals.size
    return MomentVector(conditions=tuple(conds), means=means, ms=ms, spec=spec, n=n)
