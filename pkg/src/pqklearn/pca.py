"""PCA reduction with per-component rescaling into the encoder's angle range."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .validation import check_matrix

# Fitted training data lands in [-1, 1] exactly; unseen rows may spill over a
# little and are clipped here so encoding angles stay bounded.
TRANSFORM_CLIP = 1.5


class PcaReducer(BaseEstimator, TransformerMixin):
    """Project onto the top principal components and rescale to [-1, 1].

    fit() mean-centers, keeps the ``n_components`` right singular vectors with
    the largest singular values, and records per-component max-abs divisors so
    the projected training rows fill [-1, 1]. transform() applies the same
    projection and clips to [-1.5, 1.5].
    """

    def __init__(self, n_components: int = 10):
        self.n_components = n_components

    def fit(self, X, y=None):
        X = check_matrix(X, "X")
        n, d = X.shape
        k = int(self.n_components)
        if k < 1:
            raise ValueError(f"n_components must be >= 1, got {k}")
        if n <= k:
            raise ValueError(f"need more than {k} rows to fit {k} components, got {n}")
        if d < k:
            raise ValueError(f"need at least {k} columns, got {d}")
        self.mean_ = X.mean(axis=0)
        centered = X - self.mean_
        _, svals, vt = np.linalg.svd(centered, full_matrices=False)
        rank = int((svals > svals[0] * 1e-12).sum()) if svals[0] > 0 else 0
        if rank < k:
            raise np.linalg.LinAlgError(f"data rank {rank} is below n_components = {k}")
        self.components_ = vt[:k].T  # (d, k), orthonormal columns
        projected = centered @ self.components_
        self.scale_ = np.abs(projected).max(axis=0)
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "components_"):
            raise NotFittedError("PcaReducer must be fitted before transform")
        X = check_matrix(X, "X")
        if X.shape[1] != self.components_.shape[0]:
            raise ValueError(
                f"X has {X.shape[1]} columns, expected {self.components_.shape[0]}"
            )
        Z = (X - self.mean_) @ self.components_ / self.scale_
        return np.clip(Z, -TRANSFORM_CLIP, TRANSFORM_CLIP)
