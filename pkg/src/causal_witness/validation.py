"""Input validation helpers."""

from __future__ import annotations

import math
from numbers import Real

import numpy as np

HERMITIAN_ATOL = 1e-10
UNITARY_ATOL = 1e-10
NORM_ATOL = 1e-12


def check_matrix(m, shape: tuple[int, int] | None = None, name: str = "matrix") -> np.ndarray:
    """Return ``m`` as a finite complex128 2-D array, optionally of a fixed shape."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if shape is not None and arr.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def check_square(m, name: str = "matrix") -> np.ndarray:
    arr = check_matrix(m, name=name)
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    return arr


def check_qubit_dim(m, name: str = "matrix") -> int:
    """Return the number of qubit slots of a square ``2**n`` matrix."""
    arr = check_square(m, name=name)
    dim = arr.shape[0]
    n = dim.bit_length() - 1
    if dim < 1 or 2**n != dim:
        raise ValueError(f"{name} dimension {dim} is not a power of two")
    return n


def check_unitary(u, name: str = "unitary") -> np.ndarray:
    arr = check_matrix(u, shape=(2, 2), name=name)
    gap = np.max(np.abs(arr.conj().T @ arr - np.eye(2)))
    if gap > UNITARY_ATOL:
        raise ValueError(f"{name} is not unitary (max deviation {gap:.3g})")
    return arr


def check_probability(p, name: str = "p_up") -> float:
    if not isinstance(p, (Real, np.floating)) or isinstance(p, bool):
        raise TypeError(f"{name} must be a real number, got {type(p).__name__}")
    p = float(p)
    if not (0.0 <= p <= 1.0) or math.isnan(p):
        raise ValueError(f"{name} must lie in [0, 1], got {p}")
    return p


def check_pauli_index(j, allow_identity: bool = False) -> int:
    lo = 0 if allow_identity else 1
    if isinstance(j, bool) or not isinstance(j, (int, np.integer)):
        raise TypeError(f"Pauli index must be an integer, got {j!r}")
    if not lo <= int(j) <= 3:
        raise ValueError(f"Pauli index must be in {lo}..3, got {j}")
    return int(j)


def check_finite(x, name: str) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"{name} must be finite, got {x}")
    return x
