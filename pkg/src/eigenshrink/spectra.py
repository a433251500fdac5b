"""Data matrices and the spectral decomposition of S = X'X.

Convention: X is n x p (rows are samples), S = X'X is the unnormalized
cross-product matrix. Its nonzero eigenvalues ell_1 > ... > ell_q > 0 and
the matching p x q eigenvector frame carry everything the shrinkage
estimators need; q is the numerical rank of X.
"""

from dataclasses import dataclass

import numpy as np

from .errors import AllZeroMatrix, DegenerateSpectrum, DimensionMismatch, InputError, TooFewRows

DEFAULT_RANK_TOL = 1e-12
CENTER_TOL = 1e-10
FRAME_ORTHO_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """An n x p real data matrix; `centered` marks column means of zero."""

    values: np.ndarray
    centered: bool = False

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True, ndmin=2)
        if v.ndim != 2 or v.size == 0:
            raise InputError(f"data matrix must be 2-d and nonempty, got shape {np.shape(self.values)}")
        if not np.isfinite(v).all():
            raise InputError("data matrix contains non-finite entries")
        if self.centered:
            scale = np.abs(v).max()
            tol = CENTER_TOL * v.shape[0] * max(scale, 1.0)
            if np.abs(v.sum(axis=0)).max() > tol:
                raise InputError("matrix flagged as centered has nonzero column sums")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class SampleSpectrum:
    """Nonzero eigenvalues and eigenvectors of S = X'X.

    Attributes
    ----------
    p : ambient dimension.
    ell : length-q vector, strictly decreasing, strictly positive.
    frame : p x q matrix with orthonormal columns; column a is the
        eigenvector of S for ell[a].
    """

    p: int
    ell: np.ndarray
    frame: np.ndarray

    def __post_init__(self):
        ell = np.array(self.ell, dtype=float, copy=True).reshape(-1)
        frame = np.array(self.frame, dtype=float, copy=True)
        if ell.size < 1 or not np.isfinite(ell).all():
            raise InputError("ell must be a nonempty finite vector")
        if np.any(ell <= 0):
            raise InputError("sample eigenvalues must be strictly positive")
        if np.any(np.diff(ell) >= 0):
            raise InputError("sample eigenvalues must be strictly decreasing")
        if frame.shape != (self.p, ell.size):
            raise DimensionMismatch(f"frame shape {frame.shape} != ({self.p}, {ell.size})")
        g = frame.T @ frame
        if np.abs(g - np.eye(ell.size)).max() > FRAME_ORTHO_TOL:
            raise InputError("frame columns are not orthonormal")
        ell.setflags(write=False)
        frame.setflags(write=False)
        object.__setattr__(self, "ell", ell)
        object.__setattr__(self, "frame", frame)

    @property
    def q(self) -> int:
        return self.ell.size

    @property
    def trace_s(self) -> float:
        return float(self.ell.sum())

    def to_json_dict(self, include_frame: bool = False) -> dict:
        out = {"p": self.p, "q": self.q, "ell": self.ell.tolist()}
        if include_frame:
            out["frame"] = self.frame.tolist()
        return out


def center(X: DataMatrix) -> DataMatrix:
    """Subtract the column means; the result has rank at most n - 1."""
    if X.n < 2:
        raise TooFewRows(f"centering needs n >= 2, got n={X.n}")
    return DataMatrix(X.values - X.values.mean(axis=0), centered=True)


def decompose(X: DataMatrix, rank_tol: float = DEFAULT_RANK_TOL) -> SampleSpectrum:
    """Spectral decomposition of S = X'X via the SVD of X.

    Singular values sigma_i with sigma_i > rank_tol * sigma_max are kept;
    ell_i = sigma_i^2. The SVD of the n x p matrix costs O(n^2 p), much
    cheaper than an eigendecomposition of the p x p matrix when p >> n.
    Eigenvector signs are fixed so each column's largest-magnitude entry
    is positive, making outputs reproducible across LAPACK builds.

    Raises
    ------
    AllZeroMatrix : X has no nonzero singular value.
    DegenerateSpectrum : two retained eigenvalues are tied within
        rank_tol * ell[0]; the estimators assume distinct roots.
    """
    if not (0.0 < rank_tol < 1.0):
        raise InputError(f"rank_tol must lie in (0, 1), got {rank_tol}")
    _, s, vt = np.linalg.svd(X.values, full_matrices=False)
    if s[0] <= 0.0:
        raise AllZeroMatrix("all singular values are zero")
    q = int(np.count_nonzero(s > rank_tol * s[0]))
    ell = s[:q] ** 2
    if np.any(np.diff(ell) >= -rank_tol * ell[0]):
        raise DegenerateSpectrum("tied sample eigenvalues; method assumes distinct nonzero roots")
    frame = vt[:q].T.copy()
    idx = np.argmax(np.abs(frame), axis=0)
    signs = np.sign(frame[idx, np.arange(q)])
    signs[signs == 0] = 1.0
    frame *= signs
    return SampleSpectrum(p=X.p, ell=ell, frame=frame)
