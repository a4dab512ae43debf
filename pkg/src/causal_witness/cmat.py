"""Dense complex-matrix kernel for qubit operators.

Matrices are plain ``numpy`` complex arrays. The module adds what numpy does not
provide directly: Pauli-basis expansion, a closed-form 2x2 eigensolver with a
deterministic ordering, Hermiticity classification and labelled partial traces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .validation import HERMITIAN_ATOL, check_matrix, check_pauli_index, check_qubit_dim, check_square

_PAULI = (
    np.array([[1, 0], [0, 1]], dtype=np.complex128),
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)
for _m in _PAULI:
    _m.setflags(write=False)

IDENTITY2 = _PAULI[0]


def pauli(j: int) -> np.ndarray:
    """Return the identity (``j=0``) or the Pauli matrix x, y, z (``j=1,2,3``)."""
    return _PAULI[check_pauli_index(j, allow_identity=True)].copy()


def pauli_expand(m) -> np.ndarray:
    """Coefficients ``c_j = tr(m sigma_j) / 2`` so that ``m = sum_j c_j sigma_j``."""
    m = check_matrix(m, shape=(2, 2))
    # tr(m sigma_j) written out entrywise, which keeps the round trip exact to rounding
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    return np.array([(a + d) / 2, (b + c) / 2, 1j * (b - c) / 2, (a - d) / 2], dtype=np.complex128)


def pauli_assemble(coeffs: Sequence[complex]) -> np.ndarray:
    """Inverse of :func:`pauli_expand`."""
    c = np.asarray(coeffs, dtype=np.complex128)
    if c.shape != (4,):
        raise ValueError(f"expected 4 Pauli coefficients, got shape {c.shape}")
    return np.array(
        [[c[0] + c[3], c[1] - 1j * c[2]], [c[1] + 1j * c[2], c[0] - c[3]]],
        dtype=np.complex128,
    )


def tensor(*ops) -> np.ndarray:
    """Kronecker product of the given operators; the leftmost factor is the slowest index."""
    if not ops:
        raise ValueError("tensor needs at least one operand")
    return reduce(np.kron, (check_matrix(op) for op in ops))


def hermiticity_gap(m) -> float:
    """Largest entrywise deviation ``max |m - m^dagger|``."""
    m = check_square(m)
    return float(np.max(np.abs(m - m.conj().T)))


def is_hermitian(m, atol: float = HERMITIAN_ATOL) -> bool:
    return hermiticity_gap(m) <= atol


@dataclass(frozen=True)
class EigenResult:
    """Eigenvalues sorted by descending real part (ties: descending imaginary part).

    The witness eigenvalue is always the last entry, see :attr:`minus`.
    """

    values: np.ndarray
    all_real: bool

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.complex128)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def real(self) -> np.ndarray:
        """Real view; only meaningful when :attr:`all_real` is set."""
        if not self.all_real:
            raise ValueError("eigenvalues are not all real")
        return self.values.real.copy()

    @property
    def plus(self) -> complex:
        return complex(self.values[0])

    @property
    def minus(self) -> complex:
        return complex(self.values[-1])

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]


def _sorted(values: Iterable[complex]) -> list[complex]:
    return sorted((complex(v) for v in values), key=lambda z: (-z.real, -z.imag))


def eig2(m) -> EigenResult:
    """Closed-form eigenvalues of a 2x2 matrix.

    Hermitian inputs (within ``HERMITIAN_ATOL``) go through the real formula
    ``mean +/- sqrt(half_gap**2 + |offdiag|**2)`` so no imaginary residue survives.
    """
    m = check_matrix(m, shape=(2, 2))
    a, b, c, d = (complex(x) for x in m.ravel())
    if hermiticity_gap(m) <= HERMITIAN_ATOL:
        mean = (a.real + d.real) / 2
        half = (a.real - d.real) / 2
        off = abs((b + c.conjugate()) / 2)
        r = math.hypot(half, off)
        return EigenResult(_sorted([mean + r, mean - r]), all_real=True)

    half_trace = (a + d) / 2
    disc = np.sqrt(((a - d) / 2) ** 2 + b * c)
    big = half_trace + disc if abs(half_trace + disc) >= abs(half_trace - disc) else half_trace - disc
    det = a * d - b * c
    # Vieta for the smaller root avoids cancellation
    small = det / big if big != 0 else half_trace - disc
    vals = _sorted([big, small])
    all_real = all(abs(v.imag) <= 1e-12 * max(1.0, abs(v)) for v in vals)
    if all_real:
        vals = [complex(v.real, 0.0) for v in vals]
    return EigenResult(vals, all_real=all_real)


def eigvals(m) -> EigenResult:
    """Eigenvalues of any square matrix; 2x2 uses :func:`eig2`, larger use LAPACK."""
    m = check_square(m)
    if m.shape == (2, 2):
        return eig2(m)
    if is_hermitian(m):
        herm = (m + m.conj().T) / 2
        return EigenResult(_sorted(np.linalg.eigvalsh(herm)), all_real=True)
    vals = np.linalg.eigvals(m)
    return EigenResult(_sorted(vals), all_real=bool(np.all(np.abs(vals.imag) <= 1e-12)))


def partial_trace(m, labels: Sequence[str], keep: Iterable[str]) -> np.ndarray:
    """Trace out every qubit slot whose label is not in ``keep``.

    ``labels`` names the slots of ``m`` in Kronecker order; kept slots retain
    that order in the result.
    """
    n = check_qubit_dim(m)
    m = check_square(m)
    labels = tuple(labels)
    if len(labels) != n:
        raise ValueError(f"matrix has {n} qubit slots but {len(labels)} labels were given")
    if len(set(labels)) != n:
        raise ValueError(f"slot labels must be distinct, got {labels}")
    keep = set(keep)
    unknown = keep - set(labels)
    if unknown:
        raise ValueError(f"unknown slot labels: {sorted(unknown)}")

    rows = list(range(n))
    cols = [i if labels[i] not in keep else n + i for i in range(n)]
    kept = [i for i in range(n) if labels[i] in keep]
    out = [i for i in kept] + [n + i for i in kept]
    reduced = np.einsum(m.reshape((2,) * (2 * n)), rows + cols, out)
    dim = 2 ** len(kept)
    return np.asarray(reduced, dtype=np.complex128).reshape(dim, dim)
