"""Error hierarchy for the model server."""


class ModelServerError(Exception):
    """Base class for every error this package raises on purpose."""


class ConfigError(ModelServerError):
    """A job spec field or combination is invalid."""


class DataError(ModelServerError):
    """A training CSV is missing, malformed, or inconsistent."""


class CheckpointError(ModelServerError):
    """A checkpoint file cannot be read or does not match the code."""


class TrainingDiverged(ModelServerError):
    """The final training loss is not finite."""


class StartupError(ModelServerError):
    """The HTTP service cannot start."""
