"""Exception types raised across the package."""


class JohnForgeError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(JohnForgeError, ValueError):
    pass


class SymmetryError(JohnForgeError, ValueError):
    pass


class TraceError(JohnForgeError, ValueError):
    pass


class DegenerateHull(JohnForgeError, ValueError):
    pass


class OriginNotInterior(JohnForgeError, ValueError):
    pass


class SingularTransform(JohnForgeError, ValueError):
    pass


class AmbiguousNormal(JohnForgeError, ValueError):
    """Raised when the normal is requested at a non-smooth boundary point."""


class DegenerateInput(JohnForgeError, ValueError):
    pass


class MaxIterations(JohnForgeError, RuntimeError):
    pass


class TooFewContacts(JohnForgeError, ValueError):
    pass


class MaxPivots(JohnForgeError, RuntimeError):
    pass


class AllZeroWeights(JohnForgeError, ValueError):
    pass


class NonpositiveLambda(JohnForgeError, ValueError):
    pass


class SingularDeformation(JohnForgeError, ValueError):
    pass


class QuadratureBudgetExceeded(JohnForgeError, RuntimeError):
    pass
