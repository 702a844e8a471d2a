"""Exception types shared across the library."""


class EllsliceError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(EllsliceError):
    """Vector or matrix shapes are inconsistent."""


class NotPositiveDefinite(EllsliceError):
    """Covariance could not be factorized, even after jitter escalation."""


class InvalidConfig(EllsliceError):
    """A configuration value is outside its allowed range."""


class NonFiniteLikelihood(EllsliceError):
    """A likelihood evaluation returned NaN."""


class ShrinkLimitExceeded(EllsliceError):
    """Slice bracket shrank ``max_shrinks`` times without finding an
    acceptable point; signals a numerically empty slice or a broken
    likelihood, never a normal outcome."""


class DegenerateSeries(EllsliceError):
    """A trace has zero variance, so autocorrelations are undefined."""


class EventOutOfRange(EllsliceError):
    """An event time precedes the binning origin."""


class ChainError(EllsliceError):
    """Wraps an operator error raised mid-chain with the iteration index."""

    def __init__(self, iteration: int, cause: Exception):
        super().__init__(f"sampler failed at chain iteration {iteration}: {cause}")
        self.iteration = iteration
