"""Exception hierarchy shared by all modules."""


class BerezinError(Exception):
    """Base class for errors raised by this package."""


class DomainError(BerezinError, ValueError):
    """An argument lies outside the domain of the operation (e.g. |lambda| >= 1)."""


class UnsupportedSpaceError(BerezinError, ValueError):
    """The operation is not defined for the given kind of space."""


class SpaceMismatchError(BerezinError, ValueError):
    """Operands live on different spaces."""


class NotHermitianError(BerezinError, ValueError):
    pass


class NotPositiveError(BerezinError, ValueError):
    """Matrix is not positive semidefinite (or not strictly positive when required)."""


class ConvergenceError(BerezinError, RuntimeError):
    pass


class DocumentError(BerezinError, ValueError):
    """A JSON operator or matrix document is malformed."""
