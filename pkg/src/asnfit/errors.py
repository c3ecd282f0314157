"""Exception hierarchy shared by the library and the command line."""


class AsnError(Exception):
    """Base class for all errors raised by asnfit."""


class DomainError(AsnError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateDataError(DomainError):
    """The sample cannot support a three-parameter fit (too small, zero spread)."""


class DataError(AsnError, ValueError):
    """Input file content is malformed or inconsistent."""


class ConvergenceError(AsnError, RuntimeError):
    """A numerical procedure failed to converge."""
