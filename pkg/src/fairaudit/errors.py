"""Exception hierarchy shared across the package."""


class AuditError(Exception):
    """Base class for every error raised by this package."""


class InputError(AuditError, ValueError):
    """Inputs violate an operation's contract (bad names, malformed rows, ...)."""


class PreconditionError(AuditError):
    """An operation was invoked on data that does not satisfy its precondition."""


class Infeasible(AuditError):
    """An attack construction has no feasible solution within the given limits."""
