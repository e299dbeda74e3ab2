"""Exception hierarchy shared by all lccmsa modules."""


class LcCmsaError(Exception):
    """Base class for every error raised by this package."""


class ShapeMismatch(LcCmsaError, ValueError):
    pass


class EmptyNullSpace(LcCmsaError):
    """The feasible affine set is a single point; there is nothing to search."""


class InconsistentSystem(LcCmsaError):
    pass


class NotSymmetric(LcCmsaError, ValueError):
    pass


class NonFiniteBound(LcCmsaError, ValueError):
    pass


class InfeasibleSeed(LcCmsaError, ValueError):
    pass


class InfeasibleRegion(LcCmsaError):
    pass


class UnboundedProblem(LcCmsaError):
    pass


class PreconditionViolated(LcCmsaError):
    pass


class StalledDirection(LcCmsaError):
    """Some negative component cannot move toward the chosen reference point."""


class DegenerateCovariance(LcCmsaError):
    pass


class RankDeficientSamples(LcCmsaError):
    pass


class NonLinearConstraintDetected(LcCmsaError):
    pass


class DimensionOutOfRange(LcCmsaError, ValueError):
    pass


class UnknownKind(LcCmsaError, ValueError):
    pass


class ConfigError(LcCmsaError, ValueError):
    """Invalid benchmark configuration; the message names the offending field."""
