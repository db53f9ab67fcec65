"""Exception hierarchy.

Errors that mark a genuine singularity of an exact solution (a vanishing
projector norm, a spectral pole, a branch point) derive from
:class:`SingularityError`; the CLI maps them to a dedicated exit code.
"""


class MBDError(Exception):
    """Base class for all package errors."""


class SingularityError(MBDError):
    """Evaluation hit a singular point of the construction."""

    def __init__(self, message, location=None):
        if location is not None:
            message = f"{message} at (tau, zeta) = {location}"
        super().__init__(message)
        self.location = location
        self.step = None


class DegenerateVector(SingularityError):
    pass


class DegenerateInnerProduct(SingularityError):
    pass


class SpectralPole(SingularityError):
    pass


class BranchPointAtE(SpectralPole):
    pass


class DeterminantVanished(SingularityError):
    pass


class TrivialStep(MBDError, ValueError):
    pass


class EmptyNodeSet(MBDError, ValueError):
    pass


class NonpositiveWidth(MBDError, ValueError):
    pass


class PopulationsOutOfRange(MBDError, ValueError):
    pass


class MissingPureState(MBDError):
    pass


class NormDriftExceeded(MBDError, ArithmeticError):
    pass


class ConvergenceFailure(MBDError, ArithmeticError):
    pass


class ConfigError(MBDError, ValueError):
    """Scenario configuration failed validation.

    ``path`` is the dotted location of the offending field.
    """

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
