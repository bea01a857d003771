"""Training job specification and config-file loading.

A job spec arrives as a JSON or YAML file. Hyperparameter defaults are
the full-scale ones (two layers at model dimension 512 with four heads
of size 128, feed-forward 128, no dropout, 100 epochs at batch 64);
smoke configs override them downward.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

import yaml

from .errors import ConfigError

ARCHITECTURES = ("saits", "transformer", "itransformer", "autoencoder")


@dataclass(frozen=True)
class TrainJobSpec:
    """Everything needed to train (and optionally fine-tune) one model."""

    architecture: str
    train_csv: str
    finetune_csv: Optional[str] = None
    layers: int = 2
    model_dim: int = 512
    ff_dim: int = 128
    heads: int = 4
    key_value_dim: Optional[int] = None
    dropout: float = 0.0
    epochs: int = 100
    batch: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ConfigError(
                f"architecture must be one of {', '.join(ARCHITECTURES)}, "
                f"got {self.architecture!r}")
        for name in ("layers", "model_dim", "ff_dim", "heads", "epochs",
                     "batch"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) \
                    or value < 1:
                raise ConfigError(f"{name} must be a positive integer, "
                                  f"got {value!r}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must be in [0, 1), "
                              f"got {self.dropout!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")
        if not self.train_csv:
            raise ConfigError("train_csv is required")
        if self.model_dim % self.heads != 0:
            raise ConfigError(
                f"model_dim {self.model_dim} is not divisible by "
                f"heads {self.heads}")
        # per-head key/value size is model_dim / heads by construction;
        # an explicit value must agree with it
        derived = self.model_dim // self.heads
        if self.key_value_dim is None:
            object.__setattr__(self, "key_value_dim", derived)
        elif self.key_value_dim != derived:
            raise ConfigError(
                f"key_value_dim {self.key_value_dim} conflicts with "
                f"model_dim {self.model_dim} / heads {self.heads} "
                f"= {derived}")

    def to_dict(self) -> dict:
        return asdict(self)


def load_job_spec(path) -> TrainJobSpec:
    """Read a TrainJobSpec from a JSON or YAML file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read job spec {path}: {exc}") from exc
    if path.suffix.lower() in (".yaml", ".yml"):
        try:
            payload = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    else:
        try:
            payload = json.loads(text)
        except ValueError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError(f"{path}: job spec must be a mapping")
    known = {f.name for f in fields(TrainJobSpec)}
    unknown = sorted(set(payload) - known)
    if unknown:
        raise ConfigError(f"{path}: unknown job spec fields: "
                          f"{', '.join(unknown)}")
    if "architecture" not in payload:
        raise ConfigError(f"{path}: architecture is required")
    if "train_csv" not in payload:
        raise ConfigError(f"{path}: train_csv is required")
    return TrainJobSpec(**payload)
