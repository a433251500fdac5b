"""Exception hierarchy.

Two families matter to callers: `InputError` (bad user input — CLI exit
code 2) and `NumericError` (computation left its valid domain — exit 3).
"""


class EigenshrinkError(Exception):
    """Base class for all errors raised by this package."""


class InputError(EigenshrinkError):
    """Invalid input data, file, or parameter."""


class NumericError(EigenshrinkError):
    """A numerical operation failed or left its domain of validity."""


# --- input family ---

class TooFewRows(InputError):
    """Operation needs more samples than were provided."""


class KappaOutOfRange(InputError):
    """Shrinkage mixing weight must lie in [0, 1)."""


class DimensionMismatch(InputError):
    """Operands have incompatible shapes."""


class UnsupportedLoss(InputError):
    """The requested loss is not available for this operation."""


class ZeroReference(InputError):
    """Reference losses sum to zero; relative improvement undefined."""


class FileNotSPD(InputError):
    """Loaded matrix is not symmetric positive definite."""


# --- numeric family ---

class AllZeroMatrix(NumericError):
    """Data matrix has no nonzero singular value."""


class DegenerateSpectrum(NumericError):
    """Retained sample eigenvalues are tied; the estimator assumes distinct roots."""


class LogDomainError(NumericError):
    """A log-term argument is non-positive; eigenvalues outside the likelihood domain."""


class NonPositiveLambda(NumericError):
    """Eigenvalue argument must be positive."""


class SingularTruth(NumericError):
    """Loss requires inverting the reference matrix, which is singular."""


class SingularReference(NumericError):
    """Selection reference must be invertible for this loss (or flip roles)."""


class ResampleDegenerate(NumericError):
    """Bootstrap replicate repeatedly produced a rank-zero resample."""


class FactorizationFailure(NumericError):
    """Matrix factorization failed (not numerically positive definite)."""


class NonInvertiblePlugin(NumericError):
    """Classifier plug-in covariance is singular."""
