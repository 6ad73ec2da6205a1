"""Dense statevector simulator for rotation-wall + pairwise-coupling circuits.

States are flat complex128 arrays of length 2**n_qubits. Qubit 0 is the most
significant bit of the basis-state index, so ``state.reshape([2] * n)`` puts
qubit q on axis q. All operations are pure functions returning new arrays.
"""

from __future__ import annotations

import numpy as np

from .validation import check_qubit_index

MAX_QUBITS = 20  # 2**20 complex amplitudes = 16 MiB; hard memory guard

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
PAULIS = {"X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}
AXES = ("X", "Y", "Z")


def n_qubits_of(state: np.ndarray) -> int:
    """Number of qubits encoded by a statevector's length."""
    n = int(state.shape[0]).bit_length() - 1
    if state.ndim != 1 or state.shape[0] != 2**n:
        raise ValueError(f"statevector length {state.shape} is not a power of two")
    return n


def zero_state(n_qubits: int) -> np.ndarray:
    """|0...0> on ``n_qubits`` qubits."""
    n_qubits = int(n_qubits)
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    state = np.zeros(2**n_qubits, dtype=complex)
    state[0] = 1.0
    return state


def _axis_matrix(axis: str) -> np.ndarray:
    try:
        return PAULIS[axis]
    except KeyError:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}") from None


def _apply_single_qubit(state: np.ndarray, mat: np.ndarray, qubit: int, n: int) -> np.ndarray:
    psi = state.reshape([2] * n)
    psi = np.moveaxis(psi, qubit, 0)
    psi = np.tensordot(mat, psi, axes=([1], [0]))
    return np.moveaxis(psi, 0, qubit).reshape(-1)


def rotation_matrix(axis: str, angle: float) -> np.ndarray:
    """Half-angle rotation exp(-i*angle*P/2) about a Pauli axis."""
    pauli = _axis_matrix(axis)
    c, s = np.cos(angle / 2.0), np.sin(angle / 2.0)
    return c * np.eye(2, dtype=complex) - 1j * s * pauli


def apply_rotation(state: np.ndarray, qubit: int, axis: str, angle: float) -> np.ndarray:
    """Rotate ``qubit`` by exp(-i*angle*P_axis/2). Norm preserving."""
    n = n_qubits_of(state)
    qubit = check_qubit_index(qubit, n)
    angle = float(angle)
    if not np.isfinite(angle):
        raise ValueError(f"angle must be finite, got {angle}")
    return _apply_single_qubit(state, rotation_matrix(axis, angle), qubit, n)


def pair_coupling_matrix(angle: float) -> np.ndarray:
    """exp(-i*angle*(XX + YY + ZZ)) on two qubits.

    The three terms commute on a fixed pair, so the exponential is exact:
    the triplet sector picks up e^{-i*angle}, the singlet e^{+3i*angle}.
    """
    lo = np.exp(-1j * angle)       # |00>, |11>, (|01>+|10>)/sqrt(2)
    hi = np.exp(3j * angle)        # (|01>-|10>)/sqrt(2)
    a = (lo + hi) / 2.0
    b = (lo - hi) / 2.0
    return np.array(
        [
            [lo, 0, 0, 0],
            [0, a, b, 0],
            [0, b, a, 0],
            [0, 0, 0, lo],
        ],
        dtype=complex,
    )


def apply_pair_coupling(state: np.ndarray, qubit_a: int, qubit_b: int, angle: float) -> np.ndarray:
    """Apply exp(-i*angle*(XaXb + YaYb + ZaZb)) to a pair of distinct qubits."""
    n = n_qubits_of(state)
    qubit_a = check_qubit_index(qubit_a, n)
    qubit_b = check_qubit_index(qubit_b, n)
    if qubit_a == qubit_b:
        raise IndexError(f"pair coupling needs two distinct qubits, got ({qubit_a}, {qubit_b})")
    angle = float(angle)
    if not np.isfinite(angle):
        raise ValueError(f"angle must be finite, got {angle}")
    # The operator is symmetric under pair exchange; canonicalizing the order
    # makes apply_pair_coupling(a, b, t) bitwise equal to (b, a, t).
    if qubit_a > qubit_b:
        qubit_a, qubit_b = qubit_b, qubit_a
    psi = state.reshape([2] * n)
    psi = np.moveaxis(psi, (qubit_a, qubit_b), (0, 1))
    shape = psi.shape
    psi = pair_coupling_matrix(angle) @ psi.reshape(4, -1)
    psi = np.moveaxis(psi.reshape(shape), (0, 1), (qubit_a, qubit_b))
    return psi.reshape(-1)


def reduced_density_matrix(state: np.ndarray, qubit: int) -> np.ndarray:
    """Single-qubit marginal: trace out every qubit except ``qubit``.

    rho[a, b] = sum_rest psi(a, rest) * conj(psi(b, rest)).
    """
    n = n_qubits_of(state)
    qubit = check_qubit_index(qubit, n)
    psi = np.moveaxis(state.reshape([2] * n), qubit, 0).reshape(2, -1)
    return psi @ psi.conj().T


def _validate_rdm(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"reduced density matrix must be 2x2, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
        raise ValueError("reduced density matrix is not Hermitian within 1e-12")
    if abs(np.trace(rho) - 1.0) > 1e-12:
        raise ValueError("reduced density matrix trace differs from 1 by more than 1e-12")
    if np.linalg.eigvalsh(rho).min() < -1e-12:
        raise ValueError("reduced density matrix has an eigenvalue below -1e-12")
    return rho


def pauli_expectation(rho: np.ndarray, axis: str) -> float:
    """Tr(rho * P_axis) for a valid single-qubit density matrix."""
    rho = _validate_rdm(rho)
    value = np.trace(rho @ _axis_matrix(axis))
    if abs(value.imag) > 1e-10:
        raise ValueError(f"expectation has imaginary part {value.imag:.3e} > 1e-10")
    return float(value.real)


def pauli_expectation_direct(state: np.ndarray, qubit: int, axis: str) -> float:
    """<psi| P_qubit |psi> computed on the full state, bypassing the 1-RDM.

    Kept as an independent cross-check of the partial-trace path.
    """
    n = n_qubits_of(state)
    qubit = check_qubit_index(qubit, n)
    return float(np.vdot(state, _apply_single_qubit(state, _axis_matrix(axis), qubit, n)).real)
