"""Data-encoding circuit and projected-quantum-kernel feature extraction.

The encoding circuit is a fixed wall of random single-qubit rotations followed
by Trotterized pairwise couplings whose angles carry the (reduced) data vector:
component j drives the coupling on the adjacent pair (j, j+1), so a d-component
input uses d+1 qubits. Features are the per-qubit Bloch vectors
(<X>, <Y>, <Z>) of the encoded state.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from . import sim
from .validation import check_matrix, check_vector

CACHE_MAGIC = b"PQKF"
CACHE_VERSION = 1


class CacheFormatError(ValueError):
    """A feature-cache file failed a header or digest check."""


@dataclass(frozen=True)
class WallParams:
    """Random rotation-wall angles, one (X, Y, Z) triple per qubit."""

    n_qubits: int
    angles: np.ndarray  # shape (n_qubits, 3), radians
    seed: int

    def __post_init__(self):
        angles = np.asarray(self.angles, dtype=np.float64)
        if angles.shape != (self.n_qubits, 3):
            raise ValueError(f"wall angles must have shape ({self.n_qubits}, 3), got {angles.shape}")
        object.__setattr__(self, "angles", angles)


def sample_wall(n_qubits: int, seed: int) -> WallParams:
    """Draw i.i.d. uniform [0, 2*pi) wall angles from a seeded generator."""
    n_qubits = int(n_qubits)
    if n_qubits < 1:
        raise ValueError(f"n_qubits must be >= 1, got {n_qubits}")
    rng = np.random.default_rng(seed)
    angles = rng.uniform(0.0, 2.0 * np.pi, size=(n_qubits, 3))
    return WallParams(n_qubits=n_qubits, angles=angles, seed=int(seed))


DEFAULT_ANGLE_SCALE = 1.5 * np.pi
DEFAULT_TROTTER_STEPS = 3


@dataclass(frozen=True)
class EncodingConfig:
    """Full specification of the encoding circuit.

    n_qubits is always n_components + 1: each data component has its own
    neighboring pair to drive. Inputs in [-1, 1] are stretched by
    ``angle_scale`` before entering the couplings; with unit-radian angles
    the map stays too close to linear for the downstream relabeling to
    separate anything, so the default spreads inputs over [-1.5*pi, 1.5*pi].
    """

    n_components: int
    wall: WallParams
    trotter_steps: int = DEFAULT_TROTTER_STEPS
    angle_scale: float = DEFAULT_ANGLE_SCALE

    def __post_init__(self):
        if self.n_components < 1:
            raise ValueError(f"n_components must be >= 1, got {self.n_components}")
        if self.trotter_steps < 1:
            raise ValueError(f"trotter_steps must be >= 1, got {self.trotter_steps}")
        if not (np.isfinite(self.angle_scale) and self.angle_scale > 0):
            raise ValueError(f"angle_scale must be positive, got {self.angle_scale}")
        if self.wall.n_qubits != self.n_qubits:
            raise ValueError(
                f"wall covers {self.wall.n_qubits} qubits, expected {self.n_qubits} "
                f"(n_components + 1)"
            )

    @property
    def n_qubits(self) -> int:
        return self.n_components + 1

    def digest(self) -> bytes:
        """32-byte content hash binding feature caches to this config."""
        h = hashlib.sha256()
        h.update(struct.pack("<IIQd", self.n_components, self.trotter_steps, self.wall.seed, self.angle_scale))
        h.update(np.ascontiguousarray(self.wall.angles).tobytes())
        return h.digest()


def encode_state(x: np.ndarray, config: EncodingConfig) -> np.ndarray:
    """Run the encoding circuit on one data vector, starting from |0...0>."""
    x = check_vector(x, "x")
    if x.shape[0] != config.n_components:
        raise ValueError(f"x has {x.shape[0]} components, config expects {config.n_components}")
    state = sim.zero_state(config.n_qubits)
    for q in range(config.n_qubits):
        for a, axis in enumerate(sim.AXES):
            state = sim.apply_rotation(state, q, axis, config.wall.angles[q, a])
    steps = config.trotter_steps
    angles = config.angle_scale * x / steps
    for _ in range(steps):
        for j in range(config.n_components):
            state = sim.apply_pair_coupling(state, j, j + 1, angles[j])
    return state


def extract_features(x: np.ndarray, config: EncodingConfig) -> np.ndarray:
    """Per-qubit Bloch vector of the encoded state, flattened.

    Row layout is [<X0>, <Y0>, <Z0>, <X1>, ...], length 3 * n_qubits.
    """
    state = encode_state(x, config)
    out = np.empty(3 * config.n_qubits)
    for q in range(config.n_qubits):
        rho = sim.reduced_density_matrix(state, q)
        for a, axis in enumerate(sim.AXES):
            out[3 * q + a] = sim.pauli_expectation(rho, axis)
    return out


@dataclass(frozen=True)
class PqkFeatureSet:
    """Extracted features plus the config digest they were produced under."""

    values: np.ndarray  # shape (n_samples, 3 * n_qubits)
    n_qubits: int
    config_digest: bytes = field(repr=False)

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] != 3 * self.n_qubits:
            raise ValueError(
                f"feature matrix shape {values.shape} does not match 3 * {self.n_qubits} columns"
            )
        if len(self.config_digest) != 32:
            raise ValueError("config_digest must be 32 bytes")
        if values.size:
            if np.abs(values).max() > 1.0 + 1e-9:
                raise ValueError("feature values exceed the [-1, 1] physical range")
            bloch = (values.reshape(values.shape[0], self.n_qubits, 3) ** 2).sum(axis=2)
            if bloch.max() > 1.0 + 1e-8:
                raise ValueError("per-qubit Bloch norm exceeds 1")
        object.__setattr__(self, "values", values)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]


def _rows(X: np.ndarray, config: EncodingConfig) -> np.ndarray:
    return np.array([extract_features(x, config) for x in X])


def extract_features_batch(X: np.ndarray, config: EncodingConfig, n_jobs: int = 1) -> PqkFeatureSet:
    """Extract features for every row of X.

    Results are merged by row index, so the output is bitwise identical for
    any n_jobs.
    """
    X = check_matrix(X, "X")
    if X.shape[1] != config.n_components:
        raise ValueError(f"X has {X.shape[1]} columns, config expects {config.n_components}")
    if n_jobs == 1 or X.shape[0] <= 1:
        values = _rows(X, config)
    else:
        chunks = np.array_split(np.arange(X.shape[0]), max(1, min(4 * n_jobs, X.shape[0])))
        parts = Parallel(n_jobs=n_jobs)(delayed(_rows)(X[idx], config) for idx in chunks if idx.size)
        values = np.vstack(parts)
    return PqkFeatureSet(values=values, n_qubits=config.n_qubits, config_digest=config.digest())


def save_features(fs: PqkFeatureSet, path) -> None:
    """Write a feature set to the binary cache format (bit-exact round trip).

    Layout, little-endian: magic "PQKF", version u32, n_samples u64,
    n_qubits u64, config digest (32 bytes), then row-major float64 values.
    """
    with open(path, "wb") as f:
        f.write(CACHE_MAGIC)
        f.write(struct.pack("<IQQ", CACHE_VERSION, fs.n_samples, fs.n_qubits))
        f.write(fs.config_digest)
        f.write(fs.values.astype("<f8").tobytes())


def _read_exact(f, n: int, what: str) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise OSError(f"feature cache truncated while reading {what}")
    return data


def load_features(path, expected_digest: bytes | None = None) -> PqkFeatureSet:
    """Read a feature cache, checking magic, version, and (optionally) digest."""
    with open(path, "rb") as f:
        magic = _read_exact(f, 4, "magic")
        if magic != CACHE_MAGIC:
            raise CacheFormatError(f"bad magic {magic!r} (field: magic)")
        version, n_samples, n_qubits = struct.unpack("<IQQ", _read_exact(f, 20, "header"))
        if version != CACHE_VERSION:
            raise CacheFormatError(f"unsupported version {version} (field: version)")
        digest = _read_exact(f, 32, "config digest")
        if expected_digest is not None and digest != expected_digest:
            raise CacheFormatError("cache was built under a different encoding config (field: config_digest)")
        payload = _read_exact(f, n_samples * n_qubits * 3 * 8, "feature values")
        if f.read(1):
            raise CacheFormatError("trailing bytes after feature values (field: payload)")
    values = np.frombuffer(payload, dtype="<f8").reshape(n_samples, 3 * n_qubits)
    return PqkFeatureSet(values=values, n_qubits=int(n_qubits), config_digest=digest)


class PqkFeatureMap(BaseEstimator, TransformerMixin):
    """Transformer mapping d-component vectors to 3*(d+1) Bloch features.

    fit() samples the rotation wall from ``seed`` and fixes the circuit for
    the column count seen; transform() runs the circuit per row. The map is
    deterministic in (seed, trotter_steps, data).
    """

    def __init__(
        self,
        trotter_steps: int = DEFAULT_TROTTER_STEPS,
        angle_scale: float = DEFAULT_ANGLE_SCALE,
        seed: int = 0,
        n_jobs: int = 1,
    ):
        self.trotter_steps = trotter_steps
        self.angle_scale = angle_scale
        self.seed = seed
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        X = check_matrix(X, "X")
        wall = sample_wall(X.shape[1] + 1, self.seed)
        self.config_ = EncodingConfig(
            n_components=X.shape[1],
            wall=wall,
            trotter_steps=self.trotter_steps,
            angle_scale=self.angle_scale,
        )
        self.n_qubits_ = self.config_.n_qubits
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "config_"):
            raise NotFittedError("PqkFeatureMap must be fitted before transform")
        return extract_features_batch(X, self.config_, n_jobs=self.n_jobs).values
