"""Data-driven choice of the shrinkage weight kappa.

Three routes produce a kappa-indexed risk curve and its argmin:

* ``bootstrap_select`` — resample rows with replacement, estimate at each
  kappa on the reduced-rank resample, score against a fixed reference
  matrix.
* ``cv_select`` — leave-one-out (or K-fold) cross-validation estimates of
  risk for the Frobenius, quadratic, and Stein losses, evaluated through
  quadratic forms of the held-out rows; the quadratic/Stein criteria score
  the reference role reversed, dropping kappa-independent terms.
* ``oracle_select`` — Monte-Carlo risk with the true covariance matrix;
  benchmarking only.

All routes are deterministic given (inputs, seed): replicate/fold streams
are derived from the master seed by index and reduced in index order.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AllZeroMatrix,
    DegenerateSpectrum,
    InputError,
    ResampleDegenerate,
    SingularReference,
    TooFewRows,
    UnsupportedLoss,
)
from .losses import INVERSION_LOSSES, LossKind, loss
from .shrinkage import CovarianceEstimate, assemble, lambda_kappa
from .spectra import DataMatrix, SampleSpectrum, decompose
from .util import COMP_BOOT, COMP_CV, COMP_ORACLE, ordered_map, rng_from

ARGMIN_TIE_TOL = 1e-12
MAX_REDRAWS = 100
CV_LOSSES = frozenset({LossKind.FROBENIUS, LossKind.QUADRATIC, LossKind.STEIN})
KFOLD_CHOICES = (5, 10)


@dataclass(frozen=True, eq=False)
class KappaGrid:
    """Strictly increasing kappa values, all in [0, 1)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True).reshape(-1)
        if v.size < 1:
            raise InputError("kappa grid is empty")
        if np.any(v < 0) or np.any(v >= 1):
            raise InputError("kappa grid values must lie in [0, 1)")
        if np.any(np.diff(v) <= 0):
            raise InputError("kappa grid must be strictly increasing")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def with_step(cls, step: float = 0.01) -> "KappaGrid":
        if not (0 < step < 1):
            raise InputError(f"grid step must lie in (0, 1), got {step}")
        return cls(np.arange(0.0, 1.0, step))

    @classmethod
    def default(cls) -> "KappaGrid":
        return cls.with_step(0.01)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True, eq=False)
class RiskCurve:
    """Estimated risk over a kappa grid; ties at the minimum resolve to the
    smallest kappa. ``redraws`` counts degenerate bootstrap resamples that
    were drawn again."""

    grid: KappaGrid
    risk: np.ndarray
    method: str
    loss: LossKind
    argmin: int = field(init=False)
    redraws: int = 0

    def __post_init__(self):
        r = np.array(self.risk, dtype=float, copy=True).reshape(-1)
        if r.size != len(self.grid):
            raise InputError("risk vector length differs from grid length")
        if not np.isfinite(r).all():
            raise InputError("risk values must be finite")
        if self.method not in ("bootstrap", "cv", "oracle"):
            raise InputError(f"unknown method tag {self.method!r}")
        r.setflags(write=False)
        object.__setattr__(self, "risk", r)
        idx = int(np.flatnonzero(r <= r.min() + ARGMIN_TIE_TOL)[0])
        object.__setattr__(self, "argmin", idx)

    @property
    def kappa_hat(self) -> float:
        return float(self.grid.values[self.argmin])

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "loss": self.loss.value,
            "kappa": self.grid.values.tolist(),
            "risk": self.risk.tolist(),
            "argmin": self.argmin,
            "kappa_hat": self.kappa_hat,
            "redraws": self.redraws,
        }


def _grid_estimates(spec: SampleSpectrum, grid: KappaGrid):
    return [assemble(spec, lambda_kappa(spec, k)) for k in grid.values]


def _selection_loss(kind: LossKind, est: CovarianceEstimate,
                    reference: CovarianceEstimate, invert_roles: bool) -> float:
    """Replicate score against the reference.

    When roles are inverted and the reference cannot be inverted, Stein's
    loss is evaluated without the reference log-determinant — a constant in
    kappa — so the curve stays finite with the same argmin.
    """
    if not invert_roles:
        return loss(kind, est, reference).value
    if kind is LossKind.STEIN and not reference.is_invertible:
        t = float(np.trace(est.solve(reference.dense())))
        return t - est.p + est.log_det()
    return loss(kind, est, reference, inverted_roles=True).value


def bootstrap_select(X: DataMatrix, loss_kind: LossKind, reference: CovarianceEstimate,
                     B: int = 200, grid: KappaGrid | None = None, seed: int = 0,
                     invert_roles: bool = False) -> RiskCurve:
    """Bootstrap estimate of the risk curve over the kappa grid.

    Each replicate resamples the n rows with replacement, decomposes the
    resample (duplicate rows lower the rank; the rank-q path applies), and
    scores the assembled estimate at every grid kappa against ``reference``.
    Rank-zero resamples are redrawn up to 100 times, counted in the result.
    """
    grid = grid or KappaGrid.default()
    if B < 1:
        raise InputError(f"need B >= 1 bootstrap replicates, got {B}")
    if reference.p != X.p:
        raise InputError(f"reference is {reference.p}-dim, data has p={X.p}")
    if loss_kind in INVERSION_LOSSES and not invert_roles and not reference.is_invertible:
        raise SingularReference(
            f"{loss_kind.value} loss inverts the reference; supply a nonsingular one "
            "or set invert_roles")

    n = X.n
    values = X.values

    def one_replicate(b: int):
        rng = rng_from(seed, COMP_BOOT, b)
        for attempt in range(MAX_REDRAWS + 1):
            idx = rng.integers(0, n, size=n)
            try:
                spec_b = decompose(DataMatrix(values[idx]))
            except (AllZeroMatrix, DegenerateSpectrum):
                continue
            assert spec_b.q <= np.unique(idx).size
            ests = _grid_estimates(spec_b, grid)
            row = np.array([_selection_loss(loss_kind, e, reference, invert_roles)
                            for e in ests])
            return row, attempt
        raise ResampleDegenerate(f"bootstrap replicate {b} degenerate after {MAX_REDRAWS} redraws")

    results = ordered_map(one_replicate, range(B))
    risk = np.mean([row for row, _ in results], axis=0)
    redraws = sum(att for _, att in results)
    return RiskCurve(grid=grid, risk=risk, method="bootstrap", loss=loss_kind, redraws=redraws)


def _fold_indices(n: int, folds, seed: int):
    if folds in (None, "loo"):
        return [np.array([i]) for i in range(n)]
    k = int(folds)
    if k not in KFOLD_CHOICES:
        raise InputError(f"K-fold CV supports K in {KFOLD_CHOICES} or 'loo', got {folds}")
    if n < k:
        raise TooFewRows(f"{k}-fold CV needs n >= {k}, got n={n}")
    perm = rng_from(seed, COMP_CV, 0).permutation(n)
    return [perm[j::k].copy() for j in range(k)]


def cv_select(X: DataMatrix, loss_kind: LossKind, folds="loo",
              grid: KappaGrid | None = None, seed: int = 0) -> RiskCurve:
    """Cross-validation estimate of the risk curve over the kappa grid.

    Supported losses: Frobenius (natural roles), quadratic and Stein
    (reference role reversed). Criteria are evaluated through quadratic
    forms of the held-out rows in the held-in estimate, so each fold costs
    one decomposition regardless of grid size. Values can be negative:
    additive terms that do not depend on kappa are dropped.
    """
    if loss_kind not in CV_LOSSES:
        raise UnsupportedLoss(
            f"cv_select supports {sorted(k.value for k in CV_LOSSES)}, got {loss_kind.value}")
    grid = grid or KappaGrid.default()
    n = X.n
    if n < 2:
        raise TooFewRows(f"cross-validation needs n >= 2, got n={n}")
    fold_idx = _fold_indices(n, folds, seed)

    spec_full = decompose(X)
    # per fold: held-in spectrum plus kappa-independent projections of the
    # held-out rows onto its frame
    per_fold = []
    for held_out in fold_idx:
        keep = np.setdiff1d(np.arange(n), held_out)
        spec_f = decompose(DataMatrix(X.values[keep]))
        rows = X.values[held_out]
        proj = rows @ spec_f.frame
        sq = np.einsum("ij,ij->i", rows, rows)
        per_fold.append((spec_f, proj, sq))

    needs_inverse = loss_kind is not LossKind.FROBENIUS
    risk = np.empty(len(grid))
    for j, kappa in enumerate(grid.values):
        lam_full = lambda_kappa(spec_full, kappa).lambda_hat
        forms = []
        for spec_f, proj, sq in per_fold:
            lam = lambda_kappa(spec_f, kappa).lambda_hat
            head, tail = lam[: spec_f.q], lam[min(spec_f.q, lam.size - 1)]
            if needs_inverse:
                w = (proj ** 2) @ (1.0 / head - 1.0 / tail) + sq / tail
            else:
                w = (proj ** 2) @ (head - tail) + sq * tail
            forms.extend(w.tolist())
        v = np.asarray(forms)
        if loss_kind is LossKind.FROBENIUS:
            risk[j] = np.sum(lam_full ** 2) - 2.0 * v.mean()
        elif loss_kind is LossKind.QUADRATIC:
            risk[j] = -2.0 * v.mean() + 0.5 * np.mean(v ** 2) - 0.5 * v.mean() ** 2
        else:
            risk[j] = 0.5 * v.mean() + 0.5 * np.sum(np.log(lam_full))
    return RiskCurve(grid=grid, risk=risk, method="cv", loss=loss_kind)


def oracle_select(Sigma: CovarianceEstimate, n: int, loss_kind: LossKind,
                  grid: KappaGrid | None = None, reps: int = 500,
                  seed: int = 0) -> RiskCurve:
    """Monte-Carlo risk curve computed with the true covariance matrix.

    Draws ``reps`` independent n-row Gaussian datasets from ``Sigma``,
    estimates at every grid kappa, and averages the loss against ``Sigma``
    itself. For benchmarking and tests only — never applicable to real data.
    """
    grid = grid or KappaGrid.default()
    if reps < 1:
        raise InputError(f"need reps >= 1, got {reps}")

    def one_rep(r: int):
        rng = rng_from(seed, COMP_ORACLE, r)
        x = Sigma.sample_factor_matmul(rng.standard_normal((n, Sigma.p)))
        spec = decompose(DataMatrix(x))
        return np.array([loss(loss_kind, e, Sigma).value
                         for e in _grid_estimates(spec, grid)])

    risk = np.mean(ordered_map(one_rep, range(reps)), axis=0)
    return RiskCurve(grid=grid, risk=risk, method="oracle", loss=loss_kind)
