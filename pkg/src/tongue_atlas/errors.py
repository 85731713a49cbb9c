"""Exception hierarchy.

Everything raised deliberately by the library derives from ``TongueAtlasError``.
Bad arguments raise ``ValueError`` subclasses; numerical trouble (lost roots,
non-convergence) raises ``NumericalError`` subclasses so callers such as the
CLI can tell the two apart.
"""


class TongueAtlasError(Exception):
    pass


class ValidationError(TongueAtlasError, ValueError):
    pass


class NumericalError(TongueAtlasError, ArithmeticError):
    pass


class OutsideTongueError(ValidationError):
    pass


class DegenerateResidualError(NumericalError):
    """The residual is flat (e.g. zero kick at the tongue vertex)."""


class OrbitClosureError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass


class SingularJacobianError(NumericalError):
    pass


class LostTongueError(NumericalError):
    pass


class NoStableOrbitError(NumericalError):
    pass


class CascadeLostError(NumericalError):
    """Raised when a doubled orbit cannot be continued.

    The partially filled report is attached as ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
