"""Deterministic stand-in datasets in the real MNIST IDX / CIFAR-10 binary
formats, for running the pipeline when the actual datasets are not on disk.

The generators draw digit-like strokes (tilted bars for "1", stacked rings
for "8") and toy airplane/automobile scenes with enough nuisance variation
(translation, shear, thickness, texture, specks) that the PCA subspace is
not trivially low-dimensional.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter, shift as ndshift


def _digit_image(label: int, rng: np.random.Generator) -> np.ndarray:
    img = np.zeros((28, 28))
    yy, xx = np.mgrid[0:28, 0:28]
    if label == 1:
        c = rng.uniform(9, 18)
        slope = rng.uniform(-0.35, 0.35)
        w = rng.uniform(0.8, 2.5)
        top, bot = rng.integers(2, 7), rng.integers(21, 26)
        for r in range(top, bot):
            cols = np.arange(28)
            center = c + slope * (r - 14)
            img[r] += rng.uniform(0.55, 1.0) * np.exp(-((cols - center) ** 2) / (2 * w**2))
        if rng.random() < 0.5:  # serif-like head stroke
            for k in range(4):
                r, col = top + k, int(c - 4 + k + slope * (top - 14))
                if 0 <= col < 28:
                    img[r, col] += rng.uniform(0.4, 0.9)
    elif label == 8:
        cy1, cy2 = rng.uniform(7.5, 11.5), rng.uniform(16.5, 20.5)
        cx = rng.uniform(11, 17)
        squash = rng.uniform(0.75, 1.25)
        for cy, radius in ((cy1, rng.uniform(2.5, 4.8)), (cy2, rng.uniform(3.0, 5.2))):
            d = np.sqrt(((yy - cy) * squash) ** 2 + (xx - cx) ** 2)
            th = rng.uniform(0.7, 1.5)
            img += rng.uniform(0.5, 1.0) * np.exp(-((d - radius) ** 2) / (2 * th**2))
    else:  # filler classes: random blobs, only there to exercise filtering
        for _ in range(rng.integers(2, 5)):
            cy, cx = rng.uniform(6, 22, size=2)
            d = np.sqrt((yy - cy) ** 2 + (xx - cx) ** 2)
            img += rng.uniform(0.3, 0.8) * np.exp(-(d**2) / (2 * rng.uniform(1.5, 3.5) ** 2))
    img = ndshift(img, (rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5)), order=1)
    img *= rng.uniform(0.85, 1.15, size=(28, 28))
    img = gaussian_filter(img, rng.uniform(0.3, 0.9))
    img += (rng.random((28, 28)) < 0.01) * rng.uniform(0.2, 0.8)
    img += rng.normal(0, 0.02, size=(28, 28))
    return np.clip(img, 0.0, 1.0)


def _scene_image(label: int, rng: np.random.Generator) -> np.ndarray:
    """32x32x3 toy scene: 0 = airplane on sky, 1 = car on ground."""
    img = np.zeros((32, 32, 3))
    yy, xx = np.mgrid[0:32, 0:32]
    if label == 0:
        sky = rng.uniform(0.5, 0.9)
        img[..., 2] = sky - rng.uniform(0.1, 0.3) * (yy / 32)
        img[..., 1] = img[..., 2] * rng.uniform(0.7, 0.95)
        img[..., 0] = img[..., 2] * rng.uniform(0.5, 0.85)
        cy, cx = rng.uniform(12, 20), rng.uniform(12, 20)
        half_len, half_w = rng.uniform(8, 13), rng.uniform(1.2, 2.5)
        body = np.exp(-(((yy - cy) / half_w) ** 2 + ((xx - cx) / half_len) ** 2))
        fin = np.exp(-(((yy - (cy - 4)) / 3.0) ** 2 + ((xx - (cx - half_len * 0.6)) / 1.2) ** 2))
        img += rng.uniform(0.7, 1.0) * (body + 0.7 * fin)[..., None]
    else:
        ground = rng.uniform(0.3, 0.6)
        img[..., 0] = ground * rng.uniform(0.8, 1.1) - 0.1 * (yy / 32)
        img[..., 1] = ground * rng.uniform(0.8, 1.1)
        img[..., 2] = ground * rng.uniform(0.7, 1.0)
        cy, cx = rng.uniform(17, 22), rng.uniform(13, 19)
        bw, bh = rng.uniform(8, 12), rng.uniform(3, 5)
        color = rng.uniform(0.3, 1.0, size=3)
        body = (np.abs(yy - cy) < bh) & (np.abs(xx - cx) < bw)
        cabin = (np.abs(yy - (cy - bh)) < bh * 0.7) & (np.abs(xx - cx) < bw * 0.55)
        for ch in range(3):
            img[..., ch] = np.where(body | cabin, color[ch], img[..., ch])
        for dx in (-bw * 0.55, bw * 0.55):
            wheel = ((yy - (cy + bh)) ** 2 + (xx - (cx + dx)) ** 2) < rng.uniform(2.5, 4.0) ** 2
            img[wheel] = 0.08
    img = ndshift(img, (rng.uniform(-2, 2), rng.uniform(-2, 2), 0), order=1)
    img += rng.normal(0, 0.04, size=(32, 32, 3))
    return np.clip(img, 0.0, 1.0)


def write_idx_images(path, images_u8: np.ndarray) -> None:
    n, rows, cols = images_u8.shape
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 2051, n, rows, cols))
        f.write(images_u8.tobytes())


def write_idx_labels(path, labels_u8: np.ndarray) -> None:
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 2049, labels_u8.shape[0]))
        f.write(labels_u8.tobytes())


def make_mnist_like(data_dir, n_train: int = 3000, n_test: int = 800, seed: int = 20240501) -> Path:
    """Write IDX train/test files with digit-like 1s and 8s (plus a sprinkle
    of filler classes) under data_dir. Deterministic in the seed."""
    data_dir = Path(data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    for split, n, names in (
        ("train", n_train, ("train-images-idx3-ubyte", "train-labels-idx1-ubyte")),
        ("test", n_test, ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte")),
    ):
        labels = rng.choice([1, 8, 1, 8, 1, 8, 1, 8, 3, 5], size=n).astype(np.uint8)
        images = np.stack([_digit_image(int(l), rng) for l in labels])
        write_idx_images(data_dir / names[0], (images * 255).round().astype(np.uint8))
        write_idx_labels(data_dir / names[1], labels)
    return data_dir


def make_cifar_like(data_dir, n_train: int = 3000, n_test: int = 800, seed: int = 20240502) -> Path:
    """Write CIFAR-10-format binary batches with toy class-0/1 scenes (plus
    filler classes) under data_dir/cifar-10-batches-bin."""
    base = Path(data_dir) / "cifar-10-batches-bin"
    base.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    def write_batch(path, n):
        labels = rng.choice([0, 1, 0, 1, 0, 1, 0, 1, 4, 7], size=n).astype(np.uint8)
        with open(path, "wb") as f:
            for l in labels:
                img = _scene_image(int(l) if l in (0, 1) else rng.integers(0, 2), rng)
                if l not in (0, 1):  # filler: scramble so it is neither class
                    img = img[:, ::-1][::-1] * rng.uniform(0.3, 0.7)
                chans = (img * 255).round().astype(np.uint8).transpose(2, 0, 1)
                f.write(bytes([l]))
                f.write(chans.tobytes())

    per_batch = int(np.ceil(n_train / 5))
    for i in range(1, 6):
        write_batch(base / f"data_batch_{i}.bin", per_batch)
    write_batch(base / "test_batch.bin", n_test)
    return Path(data_dir)
