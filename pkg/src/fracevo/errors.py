"""Exception hierarchy shared by every module."""


class FracEvoError(Exception):
    """Base class for all library errors."""


class NonConvergence(FracEvoError):
    """A series or iteration did not reach its tolerance within the term cap."""


class DomainError(FracEvoError, ValueError):
    """Arguments or parameters lie outside the supported domain."""


class QuadratureFailure(FracEvoError):
    """An integral could not be evaluated (divergent or unresolved integrand)."""


class TruncationError(FracEvoError):
    """A truncated series cannot certify the requested accuracy."""


class InversionFailure(FracEvoError):
    """Numerical transform inversion produced an invalid distribution."""


class ConfigError(FracEvoError, ValueError):
    """Invalid experiment configuration; the message names the offending field."""


class NumericalError(FracEvoError):
    """Linear-algebra or floating-point breakdown."""


class BandwidthError(FracEvoError):
    """The spatial grid does not resolve the initial datum."""


class GridMismatch(FracEvoError):
    """Two field estimates live on different grids or times."""
