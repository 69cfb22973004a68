"""Exception and warning types shared across the package."""


class WeylkitError(Exception):
    """Base class for all package errors."""


class CapacityError(WeylkitError):
    """Basis truncation cannot be represented on the requested grid."""


class GridError(WeylkitError):
    """Grid is malformed or under-resolved."""


class TruncationError(WeylkitError):
    """A spectral block falls outside the truncated spectrum."""


class DomainError(WeylkitError):
    """Scalar argument outside the admissible domain."""


class AlignmentError(WeylkitError):
    """Phase-space translation does not land on the sample lattice."""


class GridMismatchError(WeylkitError):
    """Two grid functions live on different grids."""


class ResampleError(WeylkitError):
    """Requested dilation is off-lattice and interpolation is disabled."""


class MarginExhaustedError(WeylkitError):
    """Derivation order exceeds the trustworthy interior of the truncation."""


class WindowError(WeylkitError):
    """Statistic window (annulus, panel) contains no grid points."""


class ModeError(WeylkitError):
    """Invalid estimation mode for the requested problem size."""


class ZeroNormError(WeylkitError):
    """A ratio statistic was requested against a zero-norm function."""


class FDStepError(WeylkitError):
    """Finite-difference step outside the quadratic-convergence regime."""


class ConfigError(WeylkitError):
    """Experiment configuration failed schema or precondition validation."""


class SerializationError(WeylkitError):
    """Container file is malformed or inconsistent with its header."""


class BoundaryMassWarning(UserWarning):
    """Input carries more than the allowed mass near the grid boundary."""


class FiberExcludedWarning(UserWarning):
    """Fibers were excluded from multiplier action (zero frequency or off-whitelist)."""
