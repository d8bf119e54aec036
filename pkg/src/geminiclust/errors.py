"""Exception types shared across the package."""


class GeminiError(Exception):
    """Base class for all package-specific errors."""


class EmptyCluster(GeminiError):
    """A cluster received (numerically) zero probability mass."""


class DimensionMismatch(GeminiError):
    """Array shapes are inconsistent with the requested operation."""


class Degenerate(GeminiError):
    """A transport problem has no usable mass on one side."""


class NotAKernel(GeminiError):
    """A distance-tagged matrix was passed where a kernel is required."""


class NotADistance(GeminiError):
    """A kernel-tagged matrix was passed where a distance is required."""


class UnsupportedAlpha(GeminiError):
    """The alpha-divergence family is only defined here for alpha > 0."""


class ConfigError(GeminiError):
    """A training or CLI configuration is invalid."""


class LengthMismatch(GeminiError):
    """Two label vectors do not have the same length."""


class DomainError(GeminiError):
    """A scalar argument lies outside its admissible open interval."""
