"""Shared fixtures: dataset directories (real when present, generated stand-ins
otherwise) and a small end-to-end feature bundle."""

import os
from pathlib import Path

import numpy as np
import pytest

from _synthdata import make_cifar_like, make_mnist_like
from pqklearn.sweep import MNIST_FILES, CIFAR_TEST_BATCH, CIFAR_TRAIN_BATCHES

# Point this at a directory holding the real MNIST IDX files and/or the
# CIFAR-10 binary batches to run the data-dependent suites on real data.
DATA_ENV = "PQKLEARN_DATA"


def _candidate_dirs():
    env = os.environ.get(DATA_ENV)
    dirs = [Path(env)] if env else []
    return dirs + [Path("data")]


def _has(path: Path, name: str) -> bool:
    return (path / name).exists() or (path / (name + ".gz")).exists()


def real_mnist_dir():
    for d in _candidate_dirs():
        if d.is_dir() and all(_has(d, n) for pair in MNIST_FILES.values() for n in pair):
            return d
    return None


def real_cifar_dir():
    for d in _candidate_dirs():
        for base in (d / "cifar-10-batches-bin", d):
            if base.is_dir() and all(
                _has(base, n) for n in CIFAR_TRAIN_BATCHES + [CIFAR_TEST_BATCH]
            ):
                return d
    return None


@pytest.fixture(scope="session")
def mnist_dir(tmp_path_factory):
    """Real MNIST directory when available, else a generated IDX stand-in."""
    real = real_mnist_dir()
    if real is not None:
        return real
    return make_mnist_like(tmp_path_factory.mktemp("mnist-like"))


@pytest.fixture(scope="session")
def cifar_dir(tmp_path_factory):
    real = real_cifar_dir()
    if real is not None:
        return real
    return make_cifar_like(tmp_path_factory.mktemp("cifar-like"))


@pytest.fixture(scope="session")
def feature_bundle(mnist_dir):
    """A small prepared (Z, F) pair from the binary-digit pipeline."""
    from pqklearn.config import ExperimentConfig
    from pqklearn.data import filter_binary, subsample
    from pqklearn.features import extract_features_batch
    from pqklearn.pca import PcaReducer
    from pqklearn.sweep import encoding_for, load_dataset

    config = ExperimentConfig(sizes=(200,), eval_set_size=50)
    train_raw, _ = load_dataset("mnist", mnist_dir)
    a, b = config.class_pair
    sub = subsample(filter_binary(train_raw, a, b), 200, config.subsample_seed)
    Z = PcaReducer(config.n_components).fit(sub.images).transform(sub.images)
    F = extract_features_batch(Z, encoding_for(config), n_jobs=2).values
    return Z, F
