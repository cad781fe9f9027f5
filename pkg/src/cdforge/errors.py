"""Exception hierarchy shared across the package."""


class CdforgeError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(CdforgeError):
    """Invalid user input: bad indices, malformed specs, unknown config keys."""


class ResourceLimitError(CdforgeError):
    """A dense build was requested beyond the configured site cap."""


class ContractViolationError(CdforgeError):
    """An input violates a documented precondition (non-Hermitian matrix, bad norm, ...)."""


class DegeneracyError(CdforgeError):
    """A spectral operation hit a (near-)degenerate level pair it cannot resolve."""

    def __init__(self, message, levels=None, gap=None):
        super().__init__(message)
        self.levels = levels
        self.gap = gap


class TrackingError(CdforgeError):
    """Gauge continuity lost: negligible overlap with the previous eigenstate."""


class ConvergenceError(CdforgeError):
    """The propagator failed its step-halving or norm-conservation contract."""


class RankDeficiencyError(CdforgeError):
    """The Gram matrix is entirely below the cutoff while the target is nonzero."""


class NoCrossingError(CdforgeError):
    """The quench protocol never crosses the requested field value."""


class DomainError(CdforgeError):
    """A time outside the protocol's domain was requested."""
