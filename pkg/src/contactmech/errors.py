"""Exception types shared across the package."""


class ContactmechError(Exception):
    pass


class DimensionMismatch(ContactmechError, ValueError):
    """A point, vector or covector has the wrong number of components."""


class ExprSyntaxError(ContactmechError, ValueError):
    def __init__(self, message, pos):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class UnknownIdentifierError(ContactmechError, ValueError):
    def __init__(self, name, pos):
        super().__init__(f"unknown identifier {name!r} (at position {pos})")
        self.name = name
        self.pos = pos


class ArityError(ContactmechError, ValueError):
    pass


class SingularMatrixError(ContactmechError, ArithmeticError):
    pass


class IntegrationError(ContactmechError, RuntimeError):
    """Raised on step-size underflow or a non-finite state.

    Carries the portion of the trajectory computed before the failure.
    """

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class UndefinedMeasureError(ContactmechError, ValueError):
    """The invariant measure H^-(n+1) is undefined where H vanishes."""


class IrregularSubmanifoldError(ContactmechError, ValueError):
    """Constraint Jacobian or parametrization loses rank at a sample."""


class ProjectionError(ContactmechError, ValueError):
    """Declared quotient projection is not constant on characteristic leaves."""


class NotAdaptedError(ContactmechError, ValueError):
    """Group action generators do not match the declared adapted form."""


class NonInvariantError(ContactmechError, ValueError):
    def __init__(self, message, defect=None):
        super().__init__(message)
        self.defect = defect


class MuNonzeroError(ContactmechError, ValueError):
    """Reduction is only implemented at moment value zero.

    At a nonzero moment value the characteristic distribution of the level
    set no longer coincides with the orbit distribution (the orbit tangents
    fail to be horizontal), so the translation-quotient construction used
    here does not apply.
    """
