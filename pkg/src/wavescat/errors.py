"""Exception types shared across the package.

Everything derives from WavescatError so callers can catch broadly; the
subclasses distinguish bad configuration (caller can fix the config),
bad data (caller must fix the input) and genuine runtime failures.
"""


class WavescatError(Exception):
    """Base class for all wavescat errors."""


class ConfigurationError(WavescatError, ValueError):
    """A structurally invalid configuration (wrong lengths, bad grids)."""


class DomainError(WavescatError, ValueError):
    """A parameter outside its mathematical domain (scale < 1, J < 2, ...)."""


class DataError(WavescatError, ValueError):
    """Input data violates a precondition (NaN samples, wrong duration)."""


class SizeError(WavescatError, ValueError):
    """Input too small for the requested transform."""


class MetricError(WavescatError, ValueError):
    """A metric cannot be computed (single-class score set, too few items)."""


class TrainingError(WavescatError, RuntimeError):
    """Training preconditions violated (single-class training set)."""


class DivergenceError(TrainingError):
    """Training loss became non-finite; carries the last stable head."""

    def __init__(self, message, head=None):
        super().__init__(message)
        self.head = head


class ContractError(WavescatError, ValueError):
    """An internal interface contract was violated (width mismatch)."""


class UnsupportedError(WavescatError, ValueError):
    """A documented unsupported operation (upsampling, M=3 closed form)."""


class BudgetError(WavescatError, ValueError):
    """An oracle refused an input beyond its cost budget."""
