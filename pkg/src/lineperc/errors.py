"""Exception types shared across the package."""


class LinePercError(Exception):
    """Base class for all package errors."""


class DomainError(LinePercError, ValueError):
    """Argument outside the domain where the operation is defined."""


class OutOfRangeError(LinePercError, IndexError):
    """Site, rectangle or radius outside the sampled region."""


class CapacityError(LinePercError, MemoryError):
    """Requested materialization exceeds the configured site budget."""


class PathError(LinePercError, ValueError):
    """Path operation precondition violated (endpoints, compatibility...)."""


class NoCrossingError(LinePercError, LookupError):
    """A requested crossing or path does not exist in the given field."""


class SpecMismatchError(LinePercError, ValueError):
    """Records or resume logs belong to different experiment specs."""
