"""Small input-validation helpers shared by the estimators and core routines."""

from __future__ import annotations

import numpy as np


def check_matrix(X, name: str = "X", *, allow_empty: bool = False) -> np.ndarray:
    """Coerce to a 2-D float64 array with finite entries."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {X.shape}")
    if not allow_empty and X.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    return X


def check_vector(x, name: str = "x") -> np.ndarray:
    """Coerce to a 1-D float64 array with finite entries."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite values")
    return x


def check_binary_labels(y, n: int | None = None, name: str = "y") -> np.ndarray:
    """Coerce to an int64 vector of 0/1 labels."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {y.shape}")
    y = y.astype(np.int64)
    if not np.isin(y, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0/1 labels")
    if n is not None and y.shape[0] != n:
        raise ValueError(f"{name} has length {y.shape[0]}, expected {n}")
    return y


def check_qubit_index(qubit: int, n_qubits: int) -> int:
    qubit = int(qubit)
    if not 0 <= qubit < n_qubits:
        raise IndexError(f"qubit index {qubit} out of range for {n_qubits} qubits")
    return qubit
