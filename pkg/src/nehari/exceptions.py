"""Exception hierarchy shared by every module of the package."""


class NehariError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class InvalidInputError(NehariError, ValueError):
    """Malformed input: bad shape, non-finite values, violated parameter ordering."""

    exit_code = 1


class InfeasibleError(NehariError):
    """A cone or constraint set is empty on the grid."""

    exit_code = 2


class NonConvergenceError(NehariError):
    """An iterative method stopped above its tolerance.

    The best iterate found so far is kept in ``best`` so callers can inspect it.
    """

    exit_code = 3

    def __init__(self, message, best=None, diagnostics=None):
        super().__init__(message)
        self.best = best
        self.diagnostics = diagnostics or {}


class GeometryError(NehariError):
    """The fibering map does not have the geometry an operation requires."""

    exit_code = 1

    def __init__(self, message, geometry=None):
        super().__init__(message)
        self.geometry = geometry


class NotFoundError(NehariError):
    """A requested critical point or parameter transition does not exist."""

    exit_code = 1

    def __init__(self, message, geometry=None, scanned=None):
        super().__init__(message)
        self.geometry = geometry
        self.scanned = scanned


class DomainError(InvalidInputError):
    """Input lies outside the admissible cone of a quotient."""

    exit_code = 1
