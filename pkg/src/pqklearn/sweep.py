"""Experiment orchestration: dataset -> PCA -> features -> relabel -> models.

One sweep point (dataset size) produces a quantum-vs-classical label task
shared by both models; each repeat retrains both models from a derived seed.
Feature extraction results are cached on disk keyed by the exact encoding
config and input matrix, so reruns and warm starts are bitwise identical.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from . import nn
from .config import ExperimentConfig
from .data import LabeledImages, filter_binary, load_cifar10, load_mnist, subsample
from .features import (
    EncodingConfig,
    extract_features_batch,
    load_features,
    sample_wall,
    save_features,
)
from .kernels import geometric_difference, median_heuristic_gamma, rbf_kernel, relabel
from .pca import PcaReducer

MNIST_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}
CIFAR_TRAIN_BATCHES = [f"data_batch_{i}.bin" for i in range(1, 6)]
CIFAR_TEST_BATCH = "test_batch.bin"

CSV_HEADER = ["dataset", "size", "model", "repeat", "train_acc", "test_acc", "train_time_s", "g", "seed_bundle"]


@dataclass(frozen=True)
class SweepRecord:
    """One (size, model, repeat) measurement."""

    dataset: str
    size: int
    model: str            # {"pqk", "classical"}
    repeat: int
    train_accuracy: float
    test_accuracy: float
    train_time_seconds: float
    g: float
    seeds: str            # echo of the seeds that produced this record


def derive_seed(seed: int, *tags) -> int:
    """Deterministic 64-bit child seed for a tagged subtask."""
    digest = hashlib.sha256(repr((int(seed),) + tags).encode()).digest()
    return int.from_bytes(digest[:8], "little")


def _find(data_dir: Path, name: str) -> Path:
    for candidate in (data_dir / name, data_dir / (name + ".gz")):
        if candidate.exists():
            return candidate
    raise FileNotFoundError(f"dataset file {name}[.gz] not found under {data_dir}")


def load_dataset(dataset: str, data_dir) -> tuple[LabeledImages, LabeledImages]:
    """Load the train and test splits of mnist or cifar10 from data_dir.

    MNIST expects the four IDX files under data_dir; CIFAR-10 expects the
    binary batches either directly in data_dir or in cifar-10-batches-bin/.
    """
    data_dir = Path(data_dir)
    if dataset == "mnist":
        train = load_mnist(*(_find(data_dir, n) for n in MNIST_FILES["train"]), split="train")
        test = load_mnist(*(_find(data_dir, n) for n in MNIST_FILES["test"]), split="test")
        return train, test
    if dataset == "cifar10":
        base = data_dir / "cifar-10-batches-bin"
        if not base.is_dir():
            base = data_dir
        train = load_cifar10([_find(base, n) for n in CIFAR_TRAIN_BATCHES], split="train")
        test = load_cifar10([_find(base, CIFAR_TEST_BATCH)], split="test")
        return train, test
    raise ValueError(f"unknown dataset {dataset!r}")


def _cached_features(Z: np.ndarray, enc: EncodingConfig, cache_dir, n_jobs: int) -> np.ndarray:
    if cache_dir is None:
        return extract_features_batch(Z, enc, n_jobs=n_jobs).values
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    key = hashlib.sha256(enc.digest() + repr(Z.shape).encode() + Z.tobytes()).hexdigest()[:24]
    path = cache_dir / f"features_{key}.pqkf"
    if path.exists():
        cached = load_features(path, expected_digest=enc.digest())
        if cached.n_samples == Z.shape[0]:
            return cached.values
    fs = extract_features_batch(Z, enc, n_jobs=n_jobs)
    save_features(fs, path)
    return fs.values


def _resolve_gamma(setting, F: np.ndarray, seed: int) -> float:
    if setting == "median":
        return median_heuristic_gamma(F, seed=seed)
    return float(setting)


@dataclass(frozen=True)
class SizePoint:
    """Everything one sweep size needs before model training."""

    size: int
    Z_train: np.ndarray
    Z_eval: np.ndarray
    F_train: np.ndarray
    F_eval: np.ndarray
    gamma_q: float
    gamma_c: float
    g: float
    y_train: np.ndarray
    y_eval: np.ndarray


def encoding_for(config: ExperimentConfig) -> EncodingConfig:
    wall = sample_wall(config.n_components + 1, config.wall_seed)
    return EncodingConfig(
        n_components=config.n_components,
        wall=wall,
        trotter_steps=config.trotter_steps,
        angle_scale=config.angle_scale,
    )


def iter_size_points(
    config: ExperimentConfig,
    data_dir,
    cache_dir=None,
    n_jobs: int = 1,
) -> Iterator[SizePoint]:
    """Yield the prepared pipeline state for each sweep size in order.

    Subsamples are nested across sizes (fixed subsample seed), the PCA is
    refitted on each training subset, and the relabeling is computed on the
    union of the training subset and the fixed evaluation pool.
    """
    train_raw, test_raw = load_dataset(config.dataset, data_dir)
    a, b = config.class_pair
    train_all = filter_binary(train_raw, a, b)
    test_all = filter_binary(test_raw, a, b)
    eval_pool = subsample(test_all, config.eval_set_size, config.subsample_seed)
    enc = encoding_for(config)

    for size in config.sizes:
        train_sub = subsample(train_all, size, config.subsample_seed)
        pca = PcaReducer(config.n_components).fit(train_sub.images)
        Z_train = pca.transform(train_sub.images)
        Z_eval = pca.transform(eval_pool.images)
        F_train = _cached_features(Z_train, enc, cache_dir, n_jobs)
        F_eval = _cached_features(Z_eval, enc, cache_dir, n_jobs)

        Z_all = np.vstack([Z_train, Z_eval])
        F_all = np.vstack([F_train, F_eval])
        gamma_q = _resolve_gamma(config.gamma_q, F_all, derive_seed(config.relabel_seed, "gamma", "q"))
        gamma_c = _resolve_gamma(config.gamma_c, Z_all, derive_seed(config.relabel_seed, "gamma", "c"))
        K_q = rbf_kernel(F_all, gamma_q, source="quantum")
        K_c = rbf_kernel(Z_all, gamma_c, source="classical")
        g = geometric_difference(K_q, K_c, config.lambda_).g
        # labels for train and eval come from one joint relabeling
        labels = relabel(K_q, K_c, config.lambda_, config.noise_rate, config.relabel_seed).labels
        yield SizePoint(
            size=size,
            Z_train=Z_train,
            Z_eval=Z_eval,
            F_train=F_train,
            F_eval=F_eval,
            gamma_q=gamma_q,
            gamma_c=gamma_c,
            g=g,
            y_train=labels[:size],
            y_eval=labels[size:],
        )


def run_experiment(
    config: ExperimentConfig,
    data_dir,
    cache_dir=None,
    n_jobs: int = 1,
    verbose: bool = False,
) -> list[SweepRecord]:
    """Run the full sweep for one dataset; returns one record per
    (size, model, repeat)."""
    say = print if verbose else (lambda *_: None)
    arch_pqk = nn.ModelArch(input_shape=(config.n_components + 1, 3), use_conv=True)
    arch_classical = nn.ModelArch(input_shape=(config.n_components,), use_conv=False)

    records: list[SweepRecord] = []
    for point in iter_size_points(config, data_dir, cache_dir, n_jobs):
        say(f"[{config.dataset}] size {point.size}: g = {point.g:.2f}")
        for repeat in range(config.repeats):
            train_seed = derive_seed(config.train_seed, point.size, repeat)
            seeds = (
                f"wall={config.wall_seed};relabel={config.relabel_seed};"
                f"subsample={config.subsample_seed};train={train_seed}"
            )
            for model, arch, X_tr, X_ev in (
                ("pqk", arch_pqk, point.F_train, point.F_eval),
                ("classical", arch_classical, point.Z_train, point.Z_eval),
            ):
                _, result = nn.train(
                    arch,
                    X_tr,
                    point.y_train,
                    X_ev,
                    point.y_eval,
                    epochs=config.epochs,
                    batch_size=config.batch_size,
                    lr=config.lr,
                    seed=train_seed,
                )
                records.append(
                    SweepRecord(
                        dataset=config.dataset,
                        size=point.size,
                        model=model,
                        repeat=repeat,
                        train_accuracy=result.train_accuracy,
                        test_accuracy=result.test_accuracy,
                        train_time_seconds=result.wall_time_seconds,
                        g=point.g,
                        seeds=seeds,
                    )
                )
                say(
                    f"[{config.dataset}] size {point.size} {model} repeat {repeat}: "
                    f"train {result.train_accuracy:.3f} test {result.test_accuracy:.3f} "
                    f"({result.wall_time_seconds:.1f}s)"
                )
    return records


def emit_csv(records: list[SweepRecord], path) -> None:
    """Write records as CSV, ordered by (dataset, size, model, repeat)."""
    if not records:
        raise ValueError("no records to write")
    rows = sorted(records, key=lambda r: (r.dataset, r.size, r.model, r.repeat))
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow(
                [
                    r.dataset,
                    r.size,
                    r.model,
                    r.repeat,
                    f"{r.train_accuracy:.6f}",
                    f"{r.test_accuracy:.6f}",
                    f"{r.train_time_seconds:.6f}",
                    f"{r.g:.6f}",
                    r.seeds,
                ]
            )


def read_csv(path) -> list[SweepRecord]:
    """Parse a records CSV written by emit_csv."""
    records = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"unexpected CSV header in {path}: {reader.fieldnames}")
        for row in reader:
            records.append(
                SweepRecord(
                    dataset=row["dataset"],
                    size=int(row["size"]),
                    model=row["model"],
                    repeat=int(row["repeat"]),
                    train_accuracy=float(row["train_acc"]),
                    test_accuracy=float(row["test_acc"]),
                    train_time_seconds=float(row["train_time_s"]),
                    g=float(row["g"]),
                    seeds=row["seed_bundle"],
                )
            )
    return records


def _series(records, model, attr):
    by_size: dict[int, list[float]] = {}
    for r in records:
        if r.model == model:
            by_size.setdefault(r.size, []).append(getattr(r, attr))
    return sorted(by_size.items())


def emit_plot_data(records: list[SweepRecord], out_dir) -> list[Path]:
    """Write per-dataset columnar accuracy and time summaries.

    Each value column triplet is mean/min/max across repeats; rows are sweep
    sizes. The '#'-prefixed header names every column, so the files feed
    straight into gnuplot, numpy.loadtxt, or pandas.
    """
    if not records:
        raise ValueError("no records to summarize")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for dataset in sorted({r.dataset for r in records}):
        subset = [r for r in records if r.dataset == dataset]
        sizes = sorted({r.size for r in subset})
        if len(sizes) < 2:
            raise ValueError(f"need at least two sweep sizes to plot, got {sizes}")

        acc_path = out_dir / f"{dataset}_accuracy.dat"
        cols = []
        for model in ("pqk", "classical"):
            for attr in ("train_accuracy", "test_accuracy"):
                cols.append((f"{model}_{attr.split('_')[0]}", dict(_series(subset, model, attr))))
        with open(acc_path, "w", encoding="utf-8") as f:
            names = " ".join(f"{n}_{s}" for n, _ in cols for s in ("mean", "min", "max"))
            f.write(f"# size {names}\n")
            for size in sizes:
                vals = []
                for _, data in cols:
                    v = data[size]
                    vals += [np.mean(v), np.min(v), np.max(v)]
                f.write(f"{size} " + " ".join(f"{v:.6f}" for v in vals) + "\n")
        written.append(acc_path)

        time_path = out_dir / f"{dataset}_time.dat"
        with open(time_path, "w", encoding="utf-8") as f:
            f.write(
                "# size pqk_time_mean pqk_time_min pqk_time_max "
                "classical_time_mean classical_time_min classical_time_max\n"
            )
            for size in sizes:
                vals = []
                for model in ("pqk", "classical"):
                    v = dict(_series(subset, model, "train_time_seconds"))[size]
                    vals += [np.mean(v), np.min(v), np.max(v)]
                f.write(f"{size} " + " ".join(f"{v:.6f}" for v in vals) + "\n")
        written.append(time_path)
    return written
