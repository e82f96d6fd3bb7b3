"""Exception hierarchy shared by all modules."""


class MultisecantError(Exception):
    """Base class for every error raised by this package."""


# curve
class NotSquarefree(MultisecantError):
    pass


class EvenDegree(MultisecantError):
    pass


# linear systems
class GenusTooSmall(MultisecantError):
    pass


class BasePointFound(MultisecantError):
    pass


class DependentSelection(MultisecantError):
    pass


class BasePoint(MultisecantError):
    pass


class WrongDegree(MultisecantError):
    pass


class ZeroSection(MultisecantError):
    pass


class HypothesisViolated(MultisecantError):
    pass


class NotInFiber(MultisecantError):
    pass


class ClusterAmbiguity(MultisecantError):
    pass


# periods
class NonRealBranchPoints(MultisecantError):
    pass


class IllConditioned(MultisecantError):
    pass


class PathThroughBranchPoint(MultisecantError):
    pass


# theta
class NotPositiveDefinite(MultisecantError):
    pass


class DegenerateVector(MultisecantError):
    pass


# gunning
class PointsNotDistinct(MultisecantError):
    pass


class InconsistentDecomposition(MultisecantError):
    pass


class DecompositionNotInSystem(MultisecantError):
    pass


# cli
class ConfigError(MultisecantError):
    pass
