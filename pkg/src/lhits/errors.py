"""Exception taxonomy; every failure mode in the package maps to one of these."""


class LhitsError(Exception):
    """Base class for all package errors."""


class ShapeError(LhitsError, ValueError):
    """Array dimensions inconsistent with an operation's contract."""


class ConfigError(LhitsError, ValueError):
    """Invalid, unknown, or out-of-range configuration value."""


class FormatError(LhitsError, ValueError):
    """On-disk artifact is corrupt or not in the expected format."""


class TrainingError(LhitsError, RuntimeError):
    """Optimization produced a non-finite loss or gradient."""


class DivergenceError(LhitsError, RuntimeError):
    """An autoregressive prediction left the finite range."""


class SelectionError(LhitsError, RuntimeError):
    """Model selection found no finite-scoring candidate."""


class ExtrapolationError(LhitsError, ValueError):
    """Interpolation query outside the supported node range."""


class EmptyPairsError(LhitsError, ValueError):
    """Trajectory too short to produce any training pair."""
