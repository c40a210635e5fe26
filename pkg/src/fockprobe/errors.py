"""Exception types shared across the package."""


class FockProbeError(Exception):
    """Base class for all package errors."""


class DomainError(FockProbeError, ValueError):
    """A parameter lies outside the domain of the requested operation."""


class TruncationError(FockProbeError):
    """The truncated Fock space is too small for the requested operation."""


class DegeneratePostSelectionError(FockProbeError):
    """Post-selection succeeds with zero probability."""


class DegenerateStatisticsError(FockProbeError):
    """A count-based estimator has a zero denominator."""
