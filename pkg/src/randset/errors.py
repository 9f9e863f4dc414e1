"""Exception hierarchy shared across the package."""


class RandsetError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(RandsetError, ValueError):
    """Invalid parameters for a distribution, model, or experiment config."""


class CapabilityError(RandsetError):
    """Requested computation is not supported for this input combination."""


class DomainError(RandsetError, ValueError):
    """An argument is outside the mathematical domain of the operation."""


class RangeError(RandsetError, OverflowError):
    """A parameter would push intermediate values outside float range."""


class CapacityError(RandsetError):
    """Exact enumeration was requested beyond the configured size caps."""


class MisuseError(RandsetError):
    """An operation was applied to data it is not meaningful for."""


class DivergenceError(RandsetError):
    """A simulated trajectory left the finite range.

    `last_finite_step` is the index of the last iterate that was still finite.
    """

    def __init__(self, message, last_finite_step):
        super().__init__(message)
        self.last_finite_step = last_finite_step


class DegenerateError(RandsetError):
    """A posterior construction collapsed (no finitely scored support)."""


class ParseError(RandsetError):
    """A record file contained a malformed line; carries the line number."""

    def __init__(self, message, line_number):
        super().__init__(message)
        self.line_number = line_number
