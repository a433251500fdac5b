"""The nine covariance loss functions and the PRIAL summary.

Tags follow the short CLI names: st, q, evl1, evl2, frob, onenorm, topev,
lastev, evs. Eigenvalue-based losses compare spectra sorted in descending
order; matrix losses use the dense difference. ``st`` and ``q`` require the
second (reference/truth) argument to be invertible.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, SingularTruth, UnsupportedLoss, ZeroReference
from .shrinkage import CovarianceEstimate


class LossKind(enum.Enum):
    STEIN = "st"
    QUADRATIC = "q"
    EVL1 = "evl1"
    EVL2 = "evl2"
    FROBENIUS = "frob"
    ONENORM = "onenorm"
    TOPEV = "topev"
    LASTEV = "lastev"
    EVS = "evs"

    @classmethod
    def parse(cls, name: str) -> "LossKind":
        key = str(name).strip().lower()
        aliases = {
            "stein": cls.STEIN,
            "quadratic": cls.QUADRATIC,
            "frobenius": cls.FROBENIUS,
        }
        if key in aliases:
            return aliases[key]
        for kind in cls:
            if kind.value == key:
                return kind
        raise UnsupportedLoss(f"unknown loss {name!r}; expected one of "
                              f"{[k.value for k in cls]}")


SPECTRUM_LOSSES = frozenset(
    {LossKind.EVL1, LossKind.EVL2, LossKind.TOPEV, LossKind.LASTEV, LossKind.EVS}
)
INVERSION_LOSSES = frozenset({LossKind.STEIN, LossKind.QUADRATIC})


@dataclass(frozen=True)
class LossReport:
    kind: LossKind
    value: float
    inverted_roles: bool = False


def _stein(est: CovarianceEstimate, truth: CovarianceEstimate) -> float:
    # tr(A B^-1 - I) - ln det(A B^-1); +inf when A is singular
    t = float(np.trace(truth.solve(est.dense())))
    ld_est = est.log_det()
    if ld_est == -np.inf:
        return np.inf
    return t - est.p - ld_est + truth.log_det()


def _quadratic(est: CovarianceEstimate, truth: CovarianceEstimate) -> float:
    # tr((A B^-1 - I)^2), literal asymmetric product
    m = truth.solve(est.dense()).T - np.eye(est.p)
    return float(np.sum(m * m.T))


def loss(kind: LossKind, est: CovarianceEstimate, truth: CovarianceEstimate,
         inverted_roles: bool = False) -> LossReport:
    """Evaluate one loss between an estimate and a reference matrix.

    With ``inverted_roles`` the arguments are swapped before evaluation,
    for workflows where the natural reference is singular but the estimate
    is not; the flag is recorded in the report. Roles are never flipped
    implicitly.
    """
    if est.p != truth.p:
        raise DimensionMismatch(f"estimate is {est.p}-dim, reference {truth.p}-dim")
    a, b = (truth, est) if inverted_roles else (est, truth)
    if kind in INVERSION_LOSSES and not b.is_invertible:
        raise SingularTruth(f"{kind.value} loss requires an invertible second argument")

    if kind is LossKind.STEIN:
        value = _stein(a, b)
    elif kind is LossKind.QUADRATIC:
        value = _quadratic(a, b)
    elif kind is LossKind.FROBENIUS:
        value = float(np.linalg.norm(a.dense() - b.dense(), "fro"))
    elif kind is LossKind.ONENORM:
        value = float(np.abs(a.dense() - b.dense()).sum(axis=0).max())
    else:
        la, lb = a.eigenvalues(), b.eigenvalues()
        p = a.p
        if kind is LossKind.EVL1:
            value = float(np.abs(la - lb).sum() / p)
        elif kind is LossKind.EVL2:
            value = float(np.sum((la - lb) ** 2) / p)
        elif kind is LossKind.TOPEV:
            value = float(abs(la[0] - lb[0]))
        elif kind is LossKind.LASTEV:
            value = float(abs(la[-1] - lb[-1]))
        else:  # smallest quartile, 1-based indices ceil(3p/4)..p
            start = math.ceil(3 * p / 4) - 1
            value = float(np.abs(la[start:] - lb[start:]).sum())
    return LossReport(kind=kind, value=value, inverted_roles=inverted_roles)


def prial(ref_losses, cand_losses) -> float:
    """Proportional reduction of total loss relative to a reference.

    (sum(ref) - sum(cand)) / sum(ref); positive means the candidate incurred
    less total loss than the reference over the same replicates.
    """
    ref = np.asarray(ref_losses, dtype=float).reshape(-1)
    cand = np.asarray(cand_losses, dtype=float).reshape(-1)
    if ref.size != cand.size or ref.size < 1:
        raise DimensionMismatch("loss vectors must have equal nonzero length")
    total = ref.sum()
    if total == 0.0:
        raise ZeroReference("reference losses sum to zero")
    return float((total - cand.sum()) / total)
