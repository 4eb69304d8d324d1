"""Exception hierarchy shared by every module."""


class RelGreenError(Exception):
    """Base class for all errors raised by relgreen."""


class ThresholdEnergyError(RelGreenError, ArithmeticError):
    """E sits on the threshold |E| = Mc^2, where the L-integral diverges."""


class NonDecayingSolutionError(RelGreenError, ArithmeticError):
    """No homogeneous solution decays toward a domain edge (E in the continuum)."""


class WronskianDegeneracyError(RelGreenError, ArithmeticError):
    """The Wronskian of the two homogeneous solutions vanishes (E on an eigenvalue)."""


class DivisionDegeneracyError(RelGreenError, ArithmeticError):
    """G0(a, a; E) is too small to divide by in the wall formula."""


class PoleError(RelGreenError, ArithmeticError):
    """Box amplitude requested at or too close to a pole of its denominator."""


class TruncationBoundError(RelGreenError, ArithmeticError):
    """A truncation (grid margin or L tail) exceeds the requested tolerance."""


class DomainError(RelGreenError, ValueError):
    """Argument outside the domain of a map or potential."""


class DerivativeUnavailableError(RelGreenError, ValueError):
    """A required derivative is missing and finite differences are disabled."""


class SingularJacobianError(RelGreenError, ArithmeticError):
    """The frame of a coordinate map is singular at the evaluation point."""


class UnsupportedChannelError(RelGreenError, ValueError):
    """The requested angular channel has a nonzero centrifugal coefficient."""


class UnsupportedDimensionError(RelGreenError, ValueError):
    """Partial-wave kernels are only available for D = 2 and D = 3."""


class ConfigError(RelGreenError, ValueError):
    """Run configuration failed schema validation."""


class ScanResolutionWarning(RuntimeWarning):
    """Two candidate poles fell into neighbouring scan cells."""


class WronskianMismatchWarning(RuntimeWarning):
    """The Wronskian drifted between the two ends of the integration interval."""
