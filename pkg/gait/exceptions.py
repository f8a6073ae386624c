"""
Exception hierarchy for the micro-Doppler pipeline
"""


class GaitRadarError(Exception):
    """Base class for every error raised by the gait package"""


class ConfigurationError(GaitRadarError, ValueError):
    """A parameter violates its documented range"""


class RecordingError(GaitRadarError):
    """IQ data is malformed, non-finite or has an unreadable file format"""


class SpectrogramError(GaitRadarError):
    """A time-frequency operation's precondition does not hold"""


class CVDError(GaitRadarError):
    """Cadence-velocity computation or warping failed"""


class FeatureError(GaitRadarError):
    """A feature cannot be estimated from its input"""


class SubspaceError(GaitRadarError):
    """PCA fit or projection received inconsistent data"""


class ModelFormatError(SubspaceError):
    """A persisted subspace model has a bad magic, version or checksum"""


class EvaluationError(GaitRadarError):
    """Classification or cross-validation inputs are inconsistent"""


class LeakageError(EvaluationError):
    """A training-side fit saw samples from the test fold"""
