"""Eigenvalue shrinkage estimators for the p > n covariance problem.

The estimator family mixes two exact/approximate critical points of an
adjusted profile log-likelihood of the population eigenvalues:

* ``lambda_zero`` — fully shrunk solution: every eigenvalue estimate equals
  tr(S)/(p q). An exact critical point; turns the covariance estimate into
  a scaled identity.
* ``lambda_one`` — order-1/p modification of the nonzero sample
  eigenvalues, zero beyond rank q. An approximate critical point.
* ``lambda_kappa`` — the convex mix kappa * lambda_one +
  (1 - kappa) * lambda_zero, kappa in [0, 1). Strictly ordered over the
  first q entries, constant and positive on the rest, and satisfying the
  trace identity q * sum(lambda_hat) = sum(ell).

All operations accept the general rank-q spectrum (q <= min(n, p)), which
covers centered data and bootstrap resamples with duplicate rows.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    DimensionMismatch,
    FactorizationFailure,
    InputError,
    KappaOutOfRange,
    LogDomainError,
    NonPositiveLambda,
)
from .spectra import SampleSpectrum

TRACE_TOL = 1e-10
SYM_TOL = 1e-8
SINGULAR_REL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ShrinkageSpectrum:
    """Estimated eigenvalues of the population covariance matrix.

    ``lambda_hat`` has length p, is nonincreasing, and is constant beyond
    index q. ``kappa`` in [0, 1) marks a member of the mixture family;
    kappa = 1 marks the diagnostic endpoints (order-1/p solution and its
    nonsingular variant), which sit outside the estimation domain.
    ``trace_s`` records sum(ell) of the source spectrum.
    """

    lambda_hat: np.ndarray
    kappa: float
    q: int
    trace_s: float

    def __post_init__(self):
        lam = np.array(self.lambda_hat, dtype=float, copy=True).reshape(-1)
        if not np.isfinite(lam).all():
            raise InputError("lambda_hat contains non-finite entries")
        if not (0.0 <= self.kappa <= 1.0):
            raise KappaOutOfRange(f"kappa={self.kappa} outside [0, 1]")
        if not (1 <= self.q <= lam.size):
            raise InputError(f"rank q={self.q} incompatible with p={lam.size}")
        if np.any(np.diff(lam) > 0):
            raise InputError("lambda_hat must be nonincreasing")
        if np.any(lam < 0):
            raise InputError("lambda_hat must be nonnegative")
        if self.q < lam.size and np.ptp(lam[self.q:]) != 0.0:
            raise InputError("entries beyond rank q must be constant")
        if self.kappa < 1.0:
            if lam[-1] <= 0:
                raise InputError("lambda_hat must be strictly positive for kappa < 1")
            tr = self.q * lam.sum()
            if abs(tr - self.trace_s) > TRACE_TOL * max(abs(self.trace_s), 1.0):
                raise InputError(
                    f"trace identity violated: q*sum(lambda)={tr} vs sum(ell)={self.trace_s}"
                )
        lam.setflags(write=False)
        object.__setattr__(self, "lambda_hat", lam)

    @property
    def p(self) -> int:
        return self.lambda_hat.size

    def to_json_dict(self) -> dict:
        return {
            "kappa": float(self.kappa),
            "q": self.q,
            "p": self.p,
            "lambda_hat": self.lambda_hat.tolist(),
        }


@dataclass(frozen=True, eq=False)
class CovarianceEstimate:
    """Symmetric PSD matrix in factored form ``basis diag(head) basis' + tail P``.

    ``basis`` is p x k with orthonormal columns, ``head`` the eigenvalues on
    its span (nonincreasing), and ``tail`` the common eigenvalue on the
    orthogonal complement (P is the projector onto it; irrelevant for
    k = p). Because the complement eigenvalue is a single scalar, no basis
    completion is ever materialized and any completion would yield the same
    matrix. The dense form is built lazily.
    """

    p: int
    basis: np.ndarray
    head: np.ndarray
    tail: float

    def __post_init__(self):
        basis = np.array(self.basis, dtype=float, copy=True).reshape(self.p, -1)
        head = np.array(self.head, dtype=float, copy=True).reshape(-1)
        k = head.size
        if basis.shape != (self.p, k):
            raise DimensionMismatch(f"basis shape {basis.shape} != ({self.p}, {k})")
        if k > self.p:
            raise DimensionMismatch("more head eigenvalues than dimensions")
        if not (np.isfinite(head).all() and np.isfinite(self.tail) and np.isfinite(basis).all()):
            raise InputError("covariance factors must be finite")
        if np.any(head < 0) or self.tail < 0:
            raise InputError("eigenvalues must be nonnegative")
        if np.any(np.diff(head) > 0):
            raise InputError("head eigenvalues must be nonincreasing")
        if k < self.p and k > 0 and self.tail > head[-1]:
            raise InputError("tail eigenvalue exceeds smallest head eigenvalue")
        if k > 0:
            g = basis.T @ basis
            if np.abs(g - np.eye(k)).max() > SYM_TOL:
                raise InputError("basis columns are not orthonormal")
        basis.setflags(write=False)
        head.setflags(write=False)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "head", head)
        object.__setattr__(self, "tail", float(self.tail))

    # --- constructors ---

    @classmethod
    def scaled_identity(cls, p: int, value: float) -> "CovarianceEstimate":
        return cls(p=p, basis=np.zeros((p, 0)), head=np.zeros(0), tail=value)

    @classmethod
    def from_diagonal(cls, diag) -> "CovarianceEstimate":
        d = np.asarray(diag, dtype=float).reshape(-1)
        order = np.argsort(-d, kind="stable")
        p = d.size
        basis = np.zeros((p, p))
        basis[order, np.arange(p)] = 1.0
        return cls(p=p, basis=basis, head=d[order], tail=float(d[order][-1]))

    @classmethod
    def from_dense(cls, matrix, sym_tol: float = SYM_TOL) -> "CovarianceEstimate":
        a = np.asarray(matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"expected square matrix, got {a.shape}")
        scale = max(np.abs(a).max(), 1.0)
        if np.abs(a - a.T).max() > sym_tol * scale:
            raise InputError("matrix is not symmetric")
        w, v = np.linalg.eigh(0.5 * (a + a.T))
        if w[0] < -1e-10 * max(abs(w[-1]), 1.0):
            raise FactorizationFailure(f"matrix is not positive semidefinite (min eig {w[0]})")
        w = np.maximum(w[::-1], 0.0)
        v = v[:, ::-1]
        return cls(p=a.shape[0], basis=v, head=w, tail=float(w[-1]))

    # --- spectral views ---

    @property
    def k(self) -> int:
        return self.head.size

    def eigenvalues(self) -> np.ndarray:
        """All p eigenvalues, nonincreasing."""
        if self.k == self.p:
            return self.head.copy()
        return np.concatenate([self.head, np.full(self.p - self.k, self.tail)])

    @property
    def min_eig(self) -> float:
        return float(self.eigenvalues()[-1])

    @property
    def max_eig(self) -> float:
        ev = self.eigenvalues()
        return float(ev[0])

    @property
    def is_invertible(self) -> bool:
        return self.min_eig > SINGULAR_REL_TOL * max(self.max_eig, 0.0) and self.min_eig > 0.0

    def trace(self) -> float:
        return float(self.head.sum() + (self.p - self.k) * self.tail)

    def log_det(self) -> float:
        ev = self.eigenvalues()
        if ev[-1] <= 0.0:
            return -np.inf
        return float(np.sum(np.log(ev)))

    @cached_property
    def _dense(self) -> np.ndarray:
        if self.k == self.p:
            m = (self.basis * self.head) @ self.basis.T
        else:
            m = self.tail * np.eye(self.p)
            if self.k:
                m += (self.basis * (self.head - self.tail)) @ self.basis.T
        m = 0.5 * (m + m.T)
        m.setflags(write=False)
        return m

    def dense(self) -> np.ndarray:
        return self._dense

    # --- linear-algebra actions in factored form ---

    def matmul(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.k == self.p:
            return (self.basis * self.head) @ (self.basis.T @ x)
        out = self.tail * x
        if self.k:
            out += (self.basis * (self.head - self.tail)) @ (self.basis.T @ x)
        return out

    def solve(self, x: np.ndarray) -> np.ndarray:
        """Apply the inverse; requires strictly positive eigenvalues."""
        if not self.is_invertible:
            raise FactorizationFailure("matrix is singular; inverse undefined")
        x = np.asarray(x, dtype=float)
        if self.k == self.p:
            return (self.basis / self.head) @ (self.basis.T @ x)
        out = x / self.tail
        if self.k:
            out += (self.basis * (1.0 / self.head - 1.0 / self.tail)) @ (self.basis.T @ x)
        return out

    def quad_form(self, x: np.ndarray) -> float:
        """x' Sigma x for a single vector."""
        x = np.asarray(x, dtype=float).reshape(-1)
        c = self.basis.T @ x
        if self.k == self.p:
            return float(np.sum(self.head * c * c))
        return float(self.tail * (x @ x) + np.sum((self.head - self.tail) * c * c))

    def inv_quad_form(self, x: np.ndarray) -> float:
        if not self.is_invertible:
            raise FactorizationFailure("matrix is singular; inverse undefined")
        x = np.asarray(x, dtype=float).reshape(-1)
        c = self.basis.T @ x
        if self.k == self.p:
            return float(np.sum(c * c / self.head))
        return float((x @ x) / self.tail + np.sum((1.0 / self.head - 1.0 / self.tail) * c * c))

    def sample_factor_matmul(self, z: np.ndarray) -> np.ndarray:
        """z @ Sigma^(1/2) for an (m, p) standard-normal block (sampling factor)."""
        if self.min_eig <= 0.0:
            raise FactorizationFailure("square-root factor needs strictly positive eigenvalues")
        z = np.asarray(z, dtype=float)
        if self.k == self.p:
            return (z @ self.basis) * np.sqrt(self.head) @ self.basis.T
        rt = np.sqrt(self.tail)
        out = rt * z
        if self.k:
            out += (z @ self.basis) * (np.sqrt(self.head) - rt) @ self.basis.T
        return out


# --- eigenvalue estimators ---


def lambda_zero(spec: SampleSpectrum) -> ShrinkageSpectrum:
    """Fully shrunk estimate: all p entries equal sum(ell) / (p q)."""
    value = spec.trace_s / (spec.p * spec.q)
    return ShrinkageSpectrum(
        lambda_hat=np.full(spec.p, value), kappa=0.0, q=spec.q, trace_s=spec.trace_s
    )


def _lambda_one_head(ell: np.ndarray, q: int, p: int) -> np.ndarray:
    # psi[a, b] = p + q (ell_a - ell_b)^2 / (ell_a ell_b) > p, so the a = b
    # term contributes exactly 0 and needs no special-casing
    diff = ell[:, None] - ell[None, :]
    psi = p + q * diff * diff / (ell[:, None] * ell[None, :])
    return (ell - (diff / psi).sum(axis=1)) / q


def lambda_one(spec: SampleSpectrum) -> ShrinkageSpectrum:
    """Order-1/p modification of ell/q over the first q entries, zero after.

    Satisfies the trace identity and strict ordering of the leading block;
    the resulting covariance estimate is singular, so this is a diagnostic
    endpoint rather than an estimator (see ``lambda_one_ns``).
    """
    lam = np.zeros(spec.p)
    lam[: spec.q] = _lambda_one_head(spec.ell, spec.q, spec.p)
    return ShrinkageSpectrum(lambda_hat=lam, kappa=1.0, q=spec.q, trace_s=spec.trace_s)


def lambda_kappa(spec: SampleSpectrum, kappa: float) -> ShrinkageSpectrum:
    """Convex mixture kappa * lambda_one + (1 - kappa) * lambda_zero, entrywise."""
    if not (0.0 <= kappa < 1.0):
        raise KappaOutOfRange(f"kappa must lie in [0, 1), got {kappa}")
    iso = spec.trace_s / (spec.p * spec.q)
    lam = np.full(spec.p, (1.0 - kappa) * iso)
    if kappa > 0.0:
        lam[: spec.q] += kappa * _lambda_one_head(spec.ell, spec.q, spec.p)
    return ShrinkageSpectrum(lambda_hat=lam, kappa=float(kappa), q=spec.q, trace_s=spec.trace_s)


def lambda_one_ns(spec: SampleSpectrum) -> ShrinkageSpectrum:
    """Nonsingular variant of ``lambda_one``: trailing zeros replaced by the
    smallest nonzero estimate. Invertible reference estimator; the trace
    identity is intentionally not preserved."""
    head = _lambda_one_head(spec.ell, spec.q, spec.p)
    lam = np.concatenate([head, np.full(spec.p - spec.q, head[-1])])
    return ShrinkageSpectrum(lambda_hat=lam, kappa=1.0, q=spec.q, trace_s=spec.trace_s)


def assemble(spec: SampleSpectrum, lam: ShrinkageSpectrum) -> CovarianceEstimate:
    """Covariance estimate sharing the sample eigenvectors.

    Sigma_hat = frame diag(lambda_hat[:q]) frame' + lambda_hat[q] * (I - frame frame').
    The trailing estimates are equal, so any orthonormal completion of the
    frame gives the same matrix; none is constructed.
    """
    if lam.q != spec.q or lam.p != spec.p:
        raise DimensionMismatch(
            f"spectrum (p={spec.p}, q={spec.q}) vs estimates (p={lam.p}, q={lam.q})"
        )
    tail = float(lam.lambda_hat[spec.q]) if spec.q < spec.p else float(lam.lambda_hat[-1])
    return CovarianceEstimate(p=spec.p, basis=spec.frame, head=lam.lambda_hat[: spec.q], tail=tail)


# --- likelihood diagnostics ---


def _check_lambda(lam, p) -> np.ndarray:
    lam = np.asarray(lam, dtype=float).reshape(-1)
    if lam.size != p:
        raise DimensionMismatch(f"lambda has length {lam.size}, expected {p}")
    if not np.isfinite(lam).all():
        raise NonPositiveLambda("lambda contains non-finite entries")
    return lam


def adjusted_loglik(lam, spec: SampleSpectrum) -> float:
    """Adjusted profile log-likelihood of candidate population eigenvalues.

    The first two terms are the profile log-likelihood given the observed
    nonzero eigenvalues; the log-product terms account for integrating the
    sample eigenvectors over the orthonormal-frame manifold, in the
    large-dimension approximation. Entries of ``lam`` pair with ``ell`` in
    descending order over the first q coordinates.
    """
    q, p = spec.q, spec.p
    lam = _check_lambda(lam, p)
    if np.any(lam <= 0):
        raise NonPositiveLambda("adjusted_loglik requires strictly positive lambda")
    ellhat = np.zeros(p)
    ellhat[:q] = spec.ell
    total = -0.5 * q * np.sum(np.log(lam)) - 0.5 * np.sum(spec.ell / lam[:q])
    for a in range(q):
        lj = lam[a + 1:]
        arg = (lam[a] - lj) / (lam[a] * lj) * (ellhat[a] - ellhat[a + 1:]) / p
        if np.any(arg <= -1.0):
            raise LogDomainError("log argument <= 0 in adjusted_loglik")
        total -= 0.5 * np.sum(np.log1p(arg))
    return float(total)


def mle_residual(lam, spec: SampleSpectrum) -> np.ndarray:
    """Defect of the critical-point equations at ``lam``, one entry per i.

    Entry i is ``q lam_i - rhs_i`` where rhs is the stationarity right-hand
    side with ell_i = 0 for i > q; the zero vector identifies an exact
    critical point of the adjusted log-likelihood. Terms are evaluated in a
    cleared-denominator form that extends continuously to zero entries in
    the trailing block (the order-1/p solution has exact zeros there).
    """
    q, p = spec.q, spec.p
    lam = _check_lambda(lam, p)
    if np.any(lam < 0) or np.any(lam[:q] <= 0):
        raise NonPositiveLambda("lambda must be positive (trailing entries may be zero)")
    ell = spec.ell
    ellhat = np.zeros(p)
    ellhat[:q] = ell

    # sum over b <= q: p lam_i lam_b (ellhat_i - ell_b) / den
    de = ellhat[:, None] - ell[None, :]
    prod = lam[:, None] * lam[None, :q]
    den = p * prod + (lam[:, None] - lam[None, :q]) * de
    if np.any(den <= 0):
        raise LogDomainError("cleared denominator <= 0 in mle_residual")
    s1 = (p * prod * de / den).sum(axis=1)

    rhs = ellhat - s1 / p
    if q < p:
        # sum over r > q, only for rows with ellhat_i > 0
        lead = lam[:q]
        trail = lam[q:]
        prod2 = lead[:, None] * trail[None, :]
        den2 = p * prod2 + (lead[:, None] - trail[None, :]) * ell[:, None]
        if np.any(den2 <= 0):
            raise LogDomainError("cleared denominator <= 0 in mle_residual")
        s2 = np.where(prod2 > 0, p * prod2 / den2, 0.0).sum(axis=1)
        rhs[:q] -= ell * s2 / p
    return q * lam - rhs
