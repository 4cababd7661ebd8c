"""Exception types shared across ddkit."""


class DDKitError(Exception):
    """Base class for all ddkit errors."""


class PreconditionError(DDKitError, ValueError):
    """An input violates a documented precondition of an operation."""


class UnfittableError(DDKitError):
    """A scaling fit could not be produced from the surviving data points."""
