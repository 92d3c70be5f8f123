"""Exception types shared across the toolkit."""


class CalibError(Exception):
    """Base class for toolkit-specific failures."""


class GimbalLockError(CalibError):
    """Euler extraction requested too close to |pitch| = pi/2."""


class CorruptDataError(CalibError):
    """A data file exists but its contents are malformed."""


class CalibFileFormatError(CalibError):
    """A calibration text file could not be parsed."""


class InvalidSplitError(CalibError):
    """Split sets overlap or reference unknown logs."""


class DegenerateSampleError(CalibError):
    """Too few projected points survive inside the image."""


class UnsupportedBackboneError(CalibError):
    """Operation requires the attention backbone."""


class CheckpointError(CalibError):
    """Checkpoint file is corrupt, truncated, or version-incompatible."""


class ConfigMismatchError(CalibError):
    """Checkpoint config is incompatible with the running pipeline."""
