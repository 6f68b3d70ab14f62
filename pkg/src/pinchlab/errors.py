"""Exception hierarchy shared by every pinchlab module."""


class PinchlabError(Exception):
    """Base class; the CLI maps it to exit code 1."""


class InvalidMap(PinchlabError, ValueError):
    pass


class ChartError(PinchlabError, ValueError):
    pass


class RootFindingFailure(PinchlabError, RuntimeError):
    pass


# dynamics
class PeriodTooLarge(PinchlabError, ValueError):
    pass


class NotPeriodic(PinchlabError, ValueError):
    pass


class UnresolvedIndifferent(PinchlabError, RuntimeError):
    pass


class DepthTooLarge(PinchlabError, ValueError):
    pass


# parabolic
class NotParabolic(PinchlabError, ValueError):
    pass


class InvarianceFailure(PinchlabError, RuntimeError):
    pass


class OutsidePetal(PinchlabError, ValueError):
    pass


class SlowConvergence(PinchlabError, RuntimeError):
    pass


# moduli
class BadRadii(PinchlabError, ValueError):
    pass


class DisksTouch(PinchlabError, ValueError):
    pass


class GridTooCoarse(PinchlabError, RuntimeError):
    pass


class SandwichViolation(PinchlabError, AssertionError):
    """Raised when a grid estimate escapes its own Height/Width bounds."""


class NoRoundAnnulus(PinchlabError, ValueError):
    pass


class BadDecomposition(PinchlabError, ValueError):
    pass


class BadConfiguration(PinchlabError, ValueError):
    pass


# pinch model
class OutOfDomain(PinchlabError, ValueError):
    pass


class AtKnot(PinchlabError, ValueError):
    pass


# multicurve
class UnknownLabel(PinchlabError, KeyError):
    pass


class NoConvergence(PinchlabError, RuntimeError):
    pass


# pinch path
class BadMultiplier(PinchlabError, ValueError):
    pass


class NoRepellingSeedPoint(PinchlabError, RuntimeError):
    pass


class EmptyCloud(PinchlabError, ValueError):
    pass


# distortion
class CoincidentPoints(PinchlabError, ValueError):
    pass


class OutsideDomain(PinchlabError, ValueError):
    pass


# cli
class IoError(PinchlabError, OSError):
    pass
