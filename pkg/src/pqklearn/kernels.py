"""Kernel matrices, geometric difference, and spectral relabeling.

The relabeling builds the binary task that separates two kernel geometries:
it finds the score direction that is strong under the first (quantum) kernel
but damped under the second (classical) one, thresholds the scores at their
median, and flips a small fraction of labels as noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .validation import check_matrix

EIG_CLAMP = 1e-8  # eigenvalues above -EIG_CLAMP are treated as exact zeros


@dataclass(frozen=True)
class KernelMatrix:
    """Symmetric RBF Gram matrix with unit diagonal."""

    values: np.ndarray
    gamma: float
    source: str = "classical"  # {"classical", "quantum"}, used in reports

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError(f"kernel matrix must be square, got shape {values.shape}")
        if np.max(np.abs(values - values.T)) > 1e-12:
            raise ValueError("kernel matrix is not symmetric within 1e-12")
        if np.max(np.abs(np.diag(values) - 1.0)) > 1e-12:
            raise ValueError("kernel diagonal differs from 1 by more than 1e-12")
        if self.source not in ("classical", "quantum"):
            raise ValueError(f"source must be 'classical' or 'quantum', got {self.source!r}")
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class GeometricReport:
    """Geometric difference g plus the direction the relabeling would use."""

    g: float
    lam: float
    top_eigenvector: np.ndarray  # unit-norm relabeling direction in sample space


@dataclass(frozen=True)
class RelabeledDataset:
    """Binary labels generated from two kernel geometries, plus noise flips."""

    labels: np.ndarray      # int64 in {0, 1}
    flip_mask: np.ndarray   # bool, True where noise inverted the label
    noise_rate: float
    seed: int = field(repr=False)


def rbf_kernel(F: np.ndarray, gamma: float, source: str = "classical") -> KernelMatrix:
    """K[i, j] = exp(-gamma * ||F[i] - F[j]||^2)."""
    F = check_matrix(F, "F")
    gamma = float(gamma)
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    sq = cdist(F, F, "sqeuclidean")
    return KernelMatrix(values=np.exp(-gamma * sq), gamma=gamma, source=source)


def median_heuristic_gamma(F: np.ndarray, n_pairs: int = 1000, seed: int = 0) -> float:
    """Bandwidth 1 / median(||F_i - F_j||^2) over a pair subsample.

    Uses all distinct pairs when there are at most ``n_pairs`` of them,
    otherwise a seeded subsample of ``n_pairs`` index pairs.
    """
    F = check_matrix(F, "F")
    n = F.shape[0]
    if n < 2:
        raise ValueError("need at least two rows for the median heuristic")
    if n * (n - 1) // 2 <= n_pairs:
        sq = cdist(F, F, "sqeuclidean")
        dists = sq[np.triu_indices(n, k=1)]
    else:
        rng = np.random.default_rng(seed)
        i = rng.integers(0, n, size=n_pairs)
        j = rng.integers(0, n - 1, size=n_pairs)
        j = np.where(j >= i, j + 1, j)  # j != i, uniform over the rest
        dists = ((F[i] - F[j]) ** 2).sum(axis=1)
    med = float(np.median(dists))
    if med <= 0:
        raise ValueError("median pairwise distance is zero; features are degenerate")
    return 1.0 / med


def _kernel_values(K) -> np.ndarray:
    """Accept a KernelMatrix or any symmetric 2-D array."""
    values = K.values if isinstance(K, KernelMatrix) else np.asarray(K, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise ValueError(f"kernel must be square, got shape {values.shape}")
    if np.max(np.abs(values - values.T)) > 1e-12:
        raise ValueError("kernel is not symmetric within 1e-12")
    return values


def eigendecompose(K) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a kernel.

    Eigenvalues within EIG_CLAMP below zero are clamped to exactly zero;
    anything more negative is left alone so genuine non-PSD inputs surface.
    """
    s, V = np.linalg.eigh(_kernel_values(K))
    s = np.where((s < 0.0) & (s > -EIG_CLAMP), 0.0, s)
    return s, V


def _psd_sqrt(s: np.ndarray, V: np.ndarray) -> np.ndarray:
    s = np.clip(s, 0.0, None)
    return (V * np.sqrt(s)) @ V.T


def _score_direction(K_q: KernelMatrix, K_c: KernelMatrix, lam: float) -> np.ndarray:
    """Raw relabeling scores: the top spectral direction of the filtered
    quantum-vs-classical alignment matrix, mapped back to sample space.

    With (s, V) from K_q and (s2, V2) from K_c, the alignment matrix is
        M = diag(sqrt(s)) V^T V2 diag(s2 / (s2 + lam)^2) V2^T V diag(sqrt(s)),
    and the scores are V diag(sqrt(s)) w for the top eigenvector w of M.
    The sign is canonicalized so the largest-magnitude score is positive,
    which is invariant under sample permutations.
    """
    s, V = eigendecompose(K_q)
    s2, V2 = eigendecompose(K_c)
    sqrt_s = np.sqrt(np.clip(s, 0.0, None))
    filt = s2 / (s2 + lam) ** 2
    M = sqrt_s[:, None] * (V.T @ ((V2 * filt) @ V2.T) @ V) * sqrt_s[None, :]
    M = (M + M.T) / 2.0
    w = np.linalg.eigh(M)[1][:, -1]
    scores = V @ (sqrt_s * w)
    peak = int(np.argmax(np.abs(scores)))
    if scores[peak] < 0:
        scores = -scores
    return scores


def geometric_difference(K_q, K_c, lam: float = 0.0) -> GeometricReport:
    """g = sqrt(|| sqrt(K_c) (K_q + lam*I)^-1 sqrt(K_c) ||_spectral).

    g == 1 when the kernels agree; large g means the classical kernel has
    mass in directions the (regularized) quantum kernel suppresses, i.e.
    there is a direction the relabeling can exploit.
    """
    n_q, n_c = _kernel_values(K_q).shape[0], _kernel_values(K_c).shape[0]
    if n_q != n_c:
        raise ValueError(f"kernel sizes differ: {n_q} vs {n_c}")
    lam = float(lam)
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    s_q, V_q = eigendecompose(K_q)
    shifted = s_q + lam
    if shifted.min() <= max(shifted.max(), 1.0) * 1e-12:
        raise np.linalg.LinAlgError(
            "K_q + lambda*I is singular; pass a positive lambda to regularize"
        )
    s_c, V_c = eigendecompose(K_c)
    sqrt_c = _psd_sqrt(s_c, V_c)
    inv_q = (V_q / shifted) @ V_q.T
    A = sqrt_c @ inv_q @ sqrt_c
    top = float(np.linalg.eigvalsh((A + A.T) / 2.0)[-1])
    scores = _score_direction(K_q, K_c, lam)
    norm = np.linalg.norm(scores)
    direction = scores / norm if norm > 0 else scores
    return GeometricReport(g=float(np.sqrt(max(top, 0.0))), lam=lam, top_eigenvector=direction)


def relabel(
    K_q,
    K_c,
    lam: float = 1.1,
    noise_rate: float = 0.05,
    seed: int = 0,
) -> RelabeledDataset:
    """Generate binary labels along the quantum-vs-classical score direction.

    Scores above their median become label 1 (strict comparison), giving a
    balanced split; each label is then independently flipped with probability
    ``noise_rate`` by a generator seeded with ``seed``.
    """
    n_q, n_c = _kernel_values(K_q).shape[0], _kernel_values(K_c).shape[0]
    if n_q != n_c:
        raise ValueError(f"kernel sizes differ: {n_q} vs {n_c}")
    if n_q < 4:
        raise ValueError(f"need at least 4 samples to relabel, got {n_q}")
    noise_rate = float(noise_rate)
    if not 0.0 <= noise_rate < 0.5:
        raise ValueError(f"noise_rate must be in [0, 0.5), got {noise_rate}")
    scores = _score_direction(K_q, K_c, float(lam))
    labels = (scores > np.median(scores)).astype(np.int64)
    rng = np.random.default_rng(seed)
    flip_mask = rng.random(n_q) < noise_rate
    labels = labels ^ flip_mask.astype(np.int64)
    return RelabeledDataset(
        labels=labels, flip_mask=flip_mask, noise_rate=noise_rate, seed=int(seed)
    )
