"""Exception types shared across the package."""


class TiltSvmError(Exception):
    """Base class for all errors raised by tiltsvm."""


class InvalidInputError(TiltSvmError, ValueError):
    """Raised when data passed to an operation violates its preconditions."""


class InvalidConfigError(TiltSvmError, ValueError):
    """Raised when a configuration object holds out-of-range values."""


class NoResultError(TiltSvmError, RuntimeError):
    """Raised when an operation has nothing valid to return."""
