import csv
import math
import random

import pytest

from model_server import TrainJobSpec, train

SERIES_LENGTH = 48
N_SERIES = 20


def write_series_csv(path, n_series, length, seed, prefix="s"):
    rng = random.Random(seed)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "t", "value"])
        for i in range(n_series):
            phase = rng.uniform(0.0, 2.0 * math.pi)
            amp = rng.uniform(0.5, 2.0)
            for t in range(length):
                value = amp * math.sin(2.0 * math.pi * t / 24.0 + phase) \
                    + rng.gauss(0.0, 0.05)
                writer.writerow([f"{prefix}{i:03d}", t, repr(value)])
    return path


def smoke_spec(train_csv, architecture="transformer", **overrides):
    """A fast configuration: tiny model, two epochs."""
    params = dict(architecture=architecture, train_csv=str(train_csv),
                  model_dim=16, ff_dim=16, heads=4, epochs=2, batch=8,
                  seed=1)
    params.update(overrides)
    return TrainJobSpec(**params)


@pytest.fixture(scope="session")
def train_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "train.csv"
    return write_series_csv(path, N_SERIES, SERIES_LENGTH, seed=5)


@pytest.fixture(scope="session")
def finetune_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "finetune.csv"
    return write_series_csv(path, 8, SERIES_LENGTH, seed=9, prefix="p")


@pytest.fixture(scope="session")
def trained(tmp_path_factory, train_csv):
    """One smoke-trained transformer checkpoint shared across tests."""
    outdir = tmp_path_factory.mktemp("model")
    return train(smoke_spec(train_csv), outdir)
