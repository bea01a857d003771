"""Training loop: masked-reconstruction objective, optional fine-tune.

Each epoch shuffles the series, zeroes a random subset of points per
batch, and optimizes mean absolute error on those hidden points plus
mean absolute error on the points the model saw. When the job spec
names a fine-tune file, a second phase of the same number of epochs
continues from the trained weights on that data.

Values are standardized with the training set's mean and scale; both
are stored in the checkpoint so the server can undo the scaling.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .config import TrainJobSpec
from .data import load_series_csv
from .errors import DataError, TrainingDiverged
from .models import build_model

MASK_FRACTION = 0.2
LEARNING_RATE = 1e-3

CHECKPOINT_NAME = "checkpoint.pt"
CURVE_NAME = "training_curve.csv"


@dataclass(frozen=True)
class TrainResult:
    checkpoint: Path
    curve: Path
    length: int
    final_loss: float


def _epoch(model, optimizer, values, spec, generator):
    """One pass over the data; returns the mean per-batch loss."""
    n = values.shape[0]
    order = torch.randperm(n, generator=generator)
    total = 0.0
    batches = 0
    for start in range(0, n, spec.batch):
        batch = values[order[start:start + spec.batch]]
        hide = (torch.rand(batch.shape, generator=generator)
                < MASK_FRACTION)
        mask = (~hide).to(batch.dtype)
        inputs = batch * mask
        estimate = model(inputs, mask)
        error = (estimate - batch).abs()
        hidden_w = 1.0 - mask
        hidden_mae = (error * hidden_w).sum() / hidden_w.sum().clamp(min=1.0)
        seen_mae = (error * mask).sum() / mask.sum().clamp(min=1.0)
        loss = hidden_mae + seen_mae
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        total += float(loss.detach())
        batches += 1
    return total / max(batches, 1)


def train(spec: TrainJobSpec, outdir) -> TrainResult:
    """Train per the job spec; write checkpoint and loss curve to outdir."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    _, raw = load_series_csv(spec.train_csv)
    mean = float(raw.mean())
    std = max(float(raw.std()), 1e-8)
    phases = [(raw - mean) / std]
    if spec.finetune_csv is not None:
        _, tune = load_series_csv(spec.finetune_csv)
        if tune.shape[1] != raw.shape[1]:
            raise DataError(
                f"fine-tune series length {tune.shape[1]} does not match "
                f"training length {raw.shape[1]}")
        phases.append((tune - mean) / std)
    length = raw.shape[1]

    torch.manual_seed(spec.seed)
    model = build_model(spec, length)
    optimizer = torch.optim.Adam(model.parameters(), lr=LEARNING_RATE)
    generator = torch.Generator().manual_seed(spec.seed)

    curve = []
    final_loss = math.nan
    model.train()
    for phase in phases:
        tensor = torch.from_numpy(np.ascontiguousarray(phase)).float()
        for _ in range(spec.epochs):
            final_loss = _epoch(model, optimizer, tensor, spec, generator)
            curve.append(final_loss)
            if not math.isfinite(final_loss):
                raise TrainingDiverged(
                    f"loss became non-finite at epoch {len(curve)}")

    curve_path = outdir / CURVE_NAME
    with curve_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "loss"])
        for epoch, loss in enumerate(curve, start=1):
            writer.writerow([epoch, repr(loss)])

    checkpoint_path = outdir / CHECKPOINT_NAME
    torch.save(
        {
            "spec": spec.to_dict(),
            "length": length,
            "mean": mean,
            "std": std,
            "final_loss": final_loss,
            "state_dict": model.state_dict(),
        },
        checkpoint_path,
    )
    return TrainResult(checkpoint=checkpoint_path, curve=curve_path,
                       length=length, final_loss=final_loss)
