"""Exception hierarchy shared by all modules."""


class MirfsoError(Exception):
    """Base class for every error raised by this package."""


class DomainError(MirfsoError, ValueError):
    """An argument lies outside the physical domain of a model."""


class RangeError(DomainError):
    """A lookup fell outside the tabulated range (no extrapolation)."""


class ConfigError(MirfsoError, ValueError):
    """Malformed or inconsistent configuration."""


class UsageError(MirfsoError, ValueError):
    """Caller passed structurally incompatible arguments."""


class FramingError(MirfsoError, ValueError):
    """Sample or chip counts do not fit the framing."""


class DecodeError(MirfsoError, ValueError):
    """Manchester coding violation.

    Attributes
    ----------
    position : int
        Index of the offending chip pair (in bits).
    """

    def __init__(self, message: str, position: int):
        super().__init__(message)
        self.position = position


class SyncLossError(MirfsoError):
    """The synchronization word was not found in the chip stream."""
