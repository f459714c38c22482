"""Exception types shared across the package.

Every error the public operations can raise lives here so callers (and the
CLI's exit-code mapping) can catch them from one place.
"""


class OodbenchError(Exception):
    """Base class for all package errors."""


class NotPositiveDefinite(OodbenchError):
    """Factorization failed even after the ridge; covariance is degenerate."""


class DimensionMismatch(OodbenchError):
    """Vector/matrix dimensions do not agree."""


class NonFinite(OodbenchError):
    """A training loss or parameter diverged to inf/nan."""


class EmptyClass(OodbenchError):
    """A subsetting operation would leave a class with zero examples."""


class InsufficientExamples(OodbenchError):
    """A class has fewer examples than the requested exemplar count."""


class InsufficientClassSize(OodbenchError):
    """Pair sampling needs >= 2 classes with >= 2 examples each."""


class UnsupportedCapability(OodbenchError):
    """The model cannot do what was asked (e.g. input gradients)."""


class BadMagic(OodbenchError):
    """File does not start with the feature-file magic bytes."""


class VersionMismatch(OodbenchError):
    """Feature-file format version is not supported."""


class ChecksumFailure(OodbenchError):
    """Feature file is corrupt or truncated."""


class InconsistentHeader(OodbenchError):
    """Feature-file header violates the format invariants."""


class MissingLabels(OodbenchError):
    """An id_train feature set arrived without labels."""


class MissingPreprocessedVariant(OodbenchError):
    """A preprocessing-tagged feature set needed for eps > 0 is absent."""


class IncompleteGrid(OodbenchError):
    """A comparison was requested over an incomplete (pair, method) grid."""
