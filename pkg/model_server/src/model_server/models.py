"""Compact imputation architectures.

Every model maps a (batch, length) value tensor plus a same-shaped
observation mask (1 = observed, 0 = missing; missing values arrive
zeroed) to a (batch, length) reconstruction of the full series. The
four variants share hyperparameters from TrainJobSpec:

- transformer: one token per time step, sinusoidal positions, a
  standard encoder stack, and a scalar read-out per step.
- saits: two chained encoder blocks; the second re-imputes from the
  first block's estimate and a learned gate blends the two.
- itransformer: the inverted layout, embedding whole channels
  (values, mask) along the time axis as tokens.
- autoencoder: a plain MLP over the flattened series and mask.
"""

from __future__ import annotations

import math

import torch
from torch import nn

from .config import TrainJobSpec


def _sinusoidal_positions(length: int, dim: int) -> torch.Tensor:
    position = torch.arange(length, dtype=torch.float32).unsqueeze(1)
    step = torch.arange(0, dim, 2, dtype=torch.float32)
    scale = torch.exp(step * (-math.log(10000.0) / dim))
    table = torch.zeros(length, dim)
    table[:, 0::2] = torch.sin(position * scale)
    table[:, 1::2] = torch.cos(position * scale[: table[:, 1::2].shape[1]])
    return table


def _encoder(spec: TrainJobSpec, layers: int) -> nn.TransformerEncoder:
    layer = nn.TransformerEncoderLayer(
        d_model=spec.model_dim,
        nhead=spec.heads,
        dim_feedforward=spec.ff_dim,
        dropout=spec.dropout,
        batch_first=True,
    )
    return nn.TransformerEncoder(layer, num_layers=layers)


class _StepEncoderBlock(nn.Module):
    """Embed per-step [value, mask] pairs, encode, read one value out."""

    def __init__(self, spec: TrainJobSpec, length: int):
        super().__init__()
        self.embed = nn.Linear(2, spec.model_dim)
        self.register_buffer(
            "positions", _sinusoidal_positions(length, spec.model_dim))
        self.encoder = _encoder(spec, spec.layers)
        self.head = nn.Linear(spec.model_dim, 1)

    def forward(self, values, mask):
        tokens = torch.stack([values, mask], dim=-1)
        hidden = self.embed(tokens) + self.positions
        hidden = self.encoder(hidden)
        return self.head(hidden).squeeze(-1), hidden


class TransformerImputer(nn.Module):
    def __init__(self, spec: TrainJobSpec, length: int):
        super().__init__()
        self.block = _StepEncoderBlock(spec, length)

    def forward(self, values, mask):
        estimate, _ = self.block(values, mask)
        return estimate


class SaitsImputer(nn.Module):
    """Two imputation blocks with a learned combination gate."""

    def __init__(self, spec: TrainJobSpec, length: int):
        super().__init__()
        self.first = _StepEncoderBlock(spec, length)
        self.second = _StepEncoderBlock(spec, length)
        self.gate = nn.Linear(spec.model_dim + 1, 1)

    def forward(self, values, mask):
        first, _ = self.first(values, mask)
        # feed the second block a fully filled series: observed values
        # where present, the first estimate elsewhere
        filled = values * mask + first * (1.0 - mask)
        second, hidden = self.second(filled, mask)
        eta = torch.sigmoid(
            self.gate(torch.cat([hidden, mask.unsqueeze(-1)], dim=-1)))
        eta = eta.squeeze(-1)
        return eta * first + (1.0 - eta) * second


class InvertedTransformerImputer(nn.Module):
    """Tokens are whole channels embedded along the time axis."""

    def __init__(self, spec: TrainJobSpec, length: int):
        super().__init__()
        self.embed = nn.Linear(length, spec.model_dim)
        self.channel = nn.Parameter(torch.zeros(2, spec.model_dim))
        self.encoder = _encoder(spec, spec.layers)
        self.head = nn.Linear(spec.model_dim, length)

    def forward(self, values, mask):
        tokens = torch.stack([values, mask], dim=1)
        hidden = self.embed(tokens) + self.channel
        hidden = self.encoder(hidden)
        return self.head(hidden[:, 0, :])


class AutoencoderImputer(nn.Module):
    def __init__(self, spec: TrainJobSpec, length: int):
        super().__init__()
        self.net = nn.Sequential(
            nn.Linear(2 * length, spec.model_dim),
            nn.ReLU(),
            nn.Linear(spec.model_dim, spec.ff_dim),
            nn.ReLU(),
            nn.Linear(spec.ff_dim, spec.model_dim),
            nn.ReLU(),
            nn.Linear(spec.model_dim, length),
        )

    def forward(self, values, mask):
        return self.net(torch.cat([values, mask], dim=-1))


_BUILDERS = {
    "transformer": TransformerImputer,
    "saits": SaitsImputer,
    "itransformer": InvertedTransformerImputer,
    "autoencoder": AutoencoderImputer,
}


def build_model(spec: TrainJobSpec, length: int) -> nn.Module:
    return _BUILDERS[spec.architecture](spec, length)
