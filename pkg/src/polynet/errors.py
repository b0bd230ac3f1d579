"""Exception hierarchy shared by all polynet modules."""


class PolynetError(Exception):
    """Base class for every error raised by polynet."""


class FieldMismatch(PolynetError):
    pass


class SingularMatrix(PolynetError):
    """Raised by ``solve`` when the system matrix is not invertible."""


class ShapeMismatch(PolynetError):
    pass


class DegreeOverflow(PolynetError):
    """A monomial basis would exceed the resource guard."""


class NonInvertibleDiagonal(PolynetError):
    pass


class BadPrime(PolynetError, ValueError):
    """The prime divides the activation degree (or is not prime at all)."""


class DegenerateSamples(PolynetError):
    pass


class InterpolationFailed(PolynetError):
    pass


class BudgetExceeded(PolynetError):
    """Search ran out of oracle calls; ``partial`` carries what was found."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ConsistencyError(PolynetError):
    """An internal cross-check failed (e.g. a rank above a proven bound)."""
