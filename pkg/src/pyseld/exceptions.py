"""exceptions"""


class PySeldError(Exception):
    """Base error, carries the process exit code"""

    exit_code = 1


class ConfigError(PySeldError):
    """Configuration Error"""

    exit_code = 2


class DataError(PySeldError):
    """Data Error"""

    exit_code = 3


class DivergenceError(PySeldError):
    """Numerical Divergence Error"""

    exit_code = 4


class PreconditionError(ConfigError):
    """Precondition Violation Error"""


class AttenuationModeError(ConfigError):
    """Attenuation Mode Error"""


class DomainError(DataError):
    """Domain Error"""


class SingularityError(DataError):
    """Singularity Error"""


class UnsupportedOrderError(DataError):
    """Unsupported Order Error"""


class GeometryError(DataError):
    """Geometry Error"""


class IllConditionedError(DataError):
    """Ill Conditioned Error"""


class CapacityError(DataError):
    """Polyphony Capacity Error"""


class ShapeError(DataError):
    """Shape Mismatch Error"""


class AlignmentError(DataError):
    """Parameter Alignment Error"""


class LengthError(DataError):
    """Signal Length Error"""


class InsufficientClipsError(DataError):
    """Insufficient Clips Error"""


class EmptyBatchError(DataError):
    """Empty Batch Error"""


class ZeroVectorError(DataError):
    """Zero Vector Error"""


class FrameRangeError(DataError):
    """Frame Range Mismatch Error"""


class CheckpointFormatError(DataError):
    """Checkpoint Format Error"""
