"""Exception types raised by seplsd."""


class SepLSDError(ValueError):
    """Base class for all input/contract errors."""


class EmptyMeasure(SepLSDError):
    pass


class NegativeCoordinate(SepLSDError):
    pass


class NonpositiveWeight(SepLSDError):
    pass


class NonpositiveTau(SepLSDError):
    pass


class IndexOutOfRange(SepLSDError):
    pass


class DimensionMismatch(SepLSDError):
    pass


class SingularDenominator(SepLSDError):
    pass


class InvalidModel(SepLSDError):
    pass


class InsufficientRestarts(SepLSDError):
    pass


class UnconvergedSolution(SepLSDError):
    pass


class DegenerateMeasure(SepLSDError):
    pass


class NonpositiveScale(SepLSDError):
    pass


class EigensolveFailure(RuntimeError):
    pass


class NotInUpperHalfPlane(SepLSDError):
    pass
