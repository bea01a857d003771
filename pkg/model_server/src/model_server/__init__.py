"""Train compact time-series imputation models and serve them over HTTP.

The package is an adapter between two file formats and one wire
protocol: job specs come in as JSON or YAML, series data as long-format
CSV, and a trained checkpoint answers the same /impute and /health
requests the audit tooling sends to any imputation service.
"""

__version__ = "0.1.0"

from .config import ARCHITECTURES, TrainJobSpec, load_job_spec
from .data import load_series_csv
from .errors import (
    CheckpointError,
    ConfigError,
    DataError,
    ModelServerError,
    StartupError,
    TrainingDiverged,
)
from .models import build_model
from .server import LoadedModel, ModelService, load_checkpoint, \
    serve_checkpoint
from .train import TrainResult, train

__all__ = [
    "ARCHITECTURES",
    "TrainJobSpec",
    "load_job_spec",
    "load_series_csv",
    "CheckpointError",
    "ConfigError",
    "DataError",
    "ModelServerError",
    "StartupError",
    "TrainingDiverged",
    "build_model",
    "LoadedModel",
    "ModelService",
    "load_checkpoint",
    "serve_checkpoint",
    "TrainResult",
    "train",
    "__version__",
]
