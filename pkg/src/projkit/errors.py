"""Exception hierarchy shared by all projkit modules."""


class ProjkitError(Exception):
    """Base class for every error raised by projkit."""


class StructuralError(ProjkitError, ValueError):
    """Inputs have incompatible shapes, dimensions or are otherwise malformed."""


class DegenerateAngleError(ProjkitError, ValueError):
    """An angle was requested between vectors one of which is zero."""


class NumericError(ProjkitError, ArithmeticError):
    """A non-finite value appeared where only finite values are allowed."""


class BracketError(ProjkitError, ValueError):
    """A root finder could not locate a sign change in its bracket."""


class ConstructionError(ProjkitError, ValueError):
    """A set construction left its admissible parameter range."""


class DomainError(ProjkitError, ValueError):
    """A scalar argument lies outside the domain of a formula."""


class LinearRegimeSignal(ProjkitError, ValueError):
    """omega = 0 has no finite power rate; convergence is linear instead."""


class EmptyEstimateError(ProjkitError, ValueError):
    """No admissible building block was available for an estimate."""


class InsufficientSamplingError(ProjkitError, RuntimeError):
    """Sampling produced no usable points in the requested neighbourhood."""


class HypothesisViolation(ProjkitError, ValueError):
    """The hypotheses of an estimate (e.g. ``c < gamma / 2``) do not hold."""


class UnfittableError(ProjkitError, ValueError):
    """A trace cannot be fitted (no limit exists or none was supplied)."""


class WindowError(ProjkitError, ValueError):
    """Too few points remain in the fitting window."""


class FixtureNotFound(ProjkitError, KeyError):
    """The gallery has no fixture of that name."""
