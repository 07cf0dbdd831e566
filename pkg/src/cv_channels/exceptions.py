"""Exception hierarchy for cv_channels."""


class CVChannelsError(Exception):
    """Base class for all library errors."""


class DimensionError(CVChannelsError, ValueError):
    """Array shapes or truncation sizes are inconsistent."""


class TruncationRiskError(CVChannelsError, RuntimeError):
    """The requested Fock truncation cannot represent the object faithfully."""


class DomainError(CVChannelsError, ValueError):
    """A physical parameter lies outside its declared domain."""


class AccuracyError(CVChannelsError, RuntimeError):
    """A refinement loop or conservation check failed its tolerance."""


class DegenerateSuperpositionError(CVChannelsError, ValueError):
    """A superposition has (numerically) vanishing norm."""


class ValidityError(CVChannelsError, ValueError):
    """A computed quantity violates a physical validity bound."""


class BackendError(CVChannelsError, RuntimeError):
    """A channel backend is unknown, unavailable or failed to construct."""
