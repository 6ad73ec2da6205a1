"""Binary dataset ingestion: MNIST IDX files and CIFAR-10 batch files.

Both loaders are strict streaming parsers: wrong magic numbers and size
mismatches raise ``DataFormatError``; short reads raise ``OSError``. Files
ending in ``.gz`` are decompressed transparently.
"""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass

import numpy as np

MNIST_IMAGE_MAGIC = 2051
MNIST_LABEL_MAGIC = 2049
MNIST_DIM = 784          # 28 * 28
CIFAR_DIM = 3072         # 3 channels * 32 * 32
CIFAR_RECORD = 3073      # 1 label byte + channel-major pixels


class DataFormatError(ValueError):
    """A dataset file violates its documented binary layout."""


@dataclass(frozen=True)
class LabeledImages:
    """Flattened images with pixel values in [0, 1] and integer class ids."""

    images: np.ndarray   # (n, d) float64
    labels: np.ndarray   # (n,) int64
    source: str          # {"mnist", "cifar10"}
    split: str           # {"train", "test"}

    def __post_init__(self):
        expected = {"mnist": MNIST_DIM, "cifar10": CIFAR_DIM}
        if self.source not in expected:
            raise ValueError(f"unknown source {self.source!r}")
        if self.split not in ("train", "test"):
            raise ValueError(f"unknown split {self.split!r}")
        if self.images.ndim != 2 or self.images.shape[1] != expected[self.source]:
            raise ValueError(
                f"{self.source} images must have {expected[self.source]} columns, "
                f"got shape {self.images.shape}"
            )
        if self.labels.shape != (self.images.shape[0],):
            raise ValueError("images and labels disagree on sample count")

    @property
    def n(self) -> int:
        return self.images.shape[0]


def _open(path):
    return gzip.open(path, "rb") if str(path).endswith(".gz") else open(path, "rb")


def _read_exact(f, n: int, what: str) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise OSError(f"file truncated while reading {what}")
    return data


def load_mnist(images_path, labels_path, split: str) -> LabeledImages:
    """Parse an MNIST IDX image/label file pair.

    Image file (big endian): u32 magic 2051, u32 count, u32 rows, u32 cols,
    then count*rows*cols unsigned bytes. Label file: u32 magic 2049,
    u32 count, then count unsigned bytes. Pixels are scaled by 1/255.
    """
    with _open(images_path) as f:
        magic, count, rows, cols = struct.unpack(">IIII", _read_exact(f, 16, "image header"))
        if magic != MNIST_IMAGE_MAGIC:
            raise DataFormatError(f"image file magic {magic}, expected {MNIST_IMAGE_MAGIC}")
        if (rows, cols) != (28, 28):
            raise DataFormatError(f"expected 28x28 images, got {rows}x{cols}")
        raw = _read_exact(f, count * rows * cols, "pixel bytes")
        if f.read(1):
            raise OSError("trailing bytes after pixel data")
    images = np.frombuffer(raw, dtype=np.uint8).reshape(count, rows * cols)

    with _open(labels_path) as f:
        magic, label_count = struct.unpack(">II", _read_exact(f, 8, "label header"))
        if magic != MNIST_LABEL_MAGIC:
            raise DataFormatError(f"label file magic {magic}, expected {MNIST_LABEL_MAGIC}")
        raw = _read_exact(f, label_count, "label bytes")
        if f.read(1):
            raise OSError("trailing bytes after label data")
    labels = np.frombuffer(raw, dtype=np.uint8)

    if label_count != count:
        raise DataFormatError(f"{count} images but {label_count} labels")
    return LabeledImages(
        images=images.astype(np.float64) / 255.0,
        labels=labels.astype(np.int64),
        source="mnist",
        split=split,
    )


def load_cifar10(batch_paths, split: str) -> LabeledImages:
    """Parse CIFAR-10 binary batches.

    Each record is 3073 bytes: 1 label byte, then 1024 R + 1024 G + 1024 B
    bytes (row-major within each channel). Pixels are scaled by 1/255.
    """
    if isinstance(batch_paths, (str, bytes)) or not hasattr(batch_paths, "__iter__"):
        batch_paths = [batch_paths]
    images, labels = [], []
    for path in batch_paths:
        with _open(path) as f:
            raw = f.read()
        if len(raw) == 0 or len(raw) % CIFAR_RECORD != 0:
            raise DataFormatError(
                f"{path}: length {len(raw)} is not a positive multiple of {CIFAR_RECORD}"
            )
        records = np.frombuffer(raw, dtype=np.uint8).reshape(-1, CIFAR_RECORD)
        if records[:, 0].max(initial=0) > 9:
            raise DataFormatError(f"{path}: label byte above 9")
        labels.append(records[:, 0])
        images.append(records[:, 1:])
    return LabeledImages(
        images=np.vstack(images).astype(np.float64) / 255.0,
        labels=np.concatenate(labels).astype(np.int64),
        source="cifar10",
        split=split,
    )


def filter_binary(data: LabeledImages, class_a: int, class_b: int) -> LabeledImages:
    """Keep only two classes, remapping class_a -> 0 and class_b -> 1.

    Row order is preserved.
    """
    if class_a == class_b:
        raise ValueError(f"need two distinct classes, got {class_a} twice")
    keep = (data.labels == class_a) | (data.labels == class_b)
    if not keep.any():
        raise ValueError(f"no samples of class {class_a} or {class_b} present")
    labels = (data.labels[keep] == class_b).astype(np.int64)
    return LabeledImages(
        images=data.images[keep], labels=labels, source=data.source, split=data.split
    )


def _stratified_quotas(pool_sizes: np.ndarray, n: int) -> np.ndarray:
    """Water-filling per-class quotas: balanced to within one sample while a
    class has capacity, capped at the pool size otherwise."""
    k = pool_sizes.size
    quotas = np.zeros(k, dtype=np.int64)
    remaining = n
    for rank, ci in enumerate(np.argsort(pool_sizes, kind="stable")):
        quotas[ci] = min(int(pool_sizes[ci]), remaining // (k - rank))
        remaining -= quotas[ci]
    while remaining > 0:  # floors and capped classes leave a few slots
        for ci in range(k):
            if remaining and quotas[ci] < pool_sizes[ci]:
                quotas[ci] += 1
                remaining -= 1
    return quotas


def subsample(data: LabeledImages, n: int, seed: int) -> LabeledImages:
    """Seeded stratified sample of n rows without replacement.

    Per-class quotas are balanced to within one sample (capped at the pool
    size, so n == data.n returns everything). Each class's pool is permuted
    once from the seed and a prefix of the permutation is taken, so for a
    fixed seed the selected rows are nested across growing n. Selected
    indices are re-sorted, preserving the original row order.
    """
    n = int(n)
    if not 1 <= n <= data.n:
        raise ValueError(f"cannot sample {n} of {data.n} rows")
    classes = np.unique(data.labels)
    pools = [np.flatnonzero(data.labels == c) for c in classes]
    quotas = _stratified_quotas(np.array([p.size for p in pools]), n)
    rng = np.random.default_rng(seed)
    picked = [rng.permutation(pool)[:want] for pool, want in zip(pools, quotas)]
    idx = np.sort(np.concatenate(picked))
    return LabeledImages(
        images=data.images[idx], labels=data.labels[idx], source=data.source, split=data.split
    )
