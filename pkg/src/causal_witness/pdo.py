"""Single-time pseudo-states of pre/post-selected qubits and the negativity witness.

Every builder returns a :class:`PseudoState`, a trace-one 2x2 operator tagged
with how it was constructed. The weak-measurement builders cover a fixed causal
order, an incoherent mixture of the two orders and their coherent
superposition; :func:`build_r_ideal` is the ideal-measurement counterpart and
:func:`build_three_time_pdo` the three-time operator whose central marginal it is.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .cmat import IDENTITY2, EigenResult, eigvals, hermiticity_gap, partial_trace, pauli, pauli_assemble, tensor
from .exceptions import DegenerateSelectionError, UndefinedPseudoStateError
from .twostate import (
    OVERLAP_ATOL,
    TwoState,
    abl_expectation,
    ket,
    pauli_weak_values,
    projector,
)
from .validation import HERMITIAN_ATOL, check_matrix, check_probability

Mode = Literal["fixed_up", "fixed_down", "incoherent", "coherent", "generalized", "ideal_abl"]
MODES = ("fixed_up", "fixed_down", "incoherent", "coherent", "generalized", "ideal_abl")


@dataclass(frozen=True, eq=False)
class PseudoState:
    """A 2x2 trace-one operator with its construction mode and order weight.

    ``hermitian`` and ``eigenvalues`` are computed once at construction.
    """

    matrix: np.ndarray
    mode: Mode
    p_up: float = 0.5
    hermitian: bool = field(init=False)
    eigenvalues: EigenResult = field(init=False, repr=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown pseudo-state mode {self.mode!r}")
        m = check_matrix(self.matrix, shape=(2, 2)).copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "p_up", check_probability(self.p_up))
        object.__setattr__(self, "hermitian", hermiticity_gap(m) <= HERMITIAN_ATOL)
        object.__setattr__(self, "eigenvalues", eigvals(m))

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    @property
    def determinant(self) -> complex:
        m = self.matrix
        return complex(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])

    @property
    def purity(self) -> complex:
        """``tr(m @ m)``."""
        return complex(np.trace(self.matrix @ self.matrix))

    @property
    def lambda_minus(self) -> complex:
        """Eigenvalue with the smallest real part (the witness)."""
        return self.eigenvalues.minus

    @property
    def is_negative(self) -> bool:
        return self.lambda_minus.real < -1e-12


def _require_overlap(ts: TwoState) -> complex:
    if ts.is_degenerate:
        raise UndefinedPseudoStateError("pseudo-state undefined: pre- and post-selection are orthogonal")
    return ts.overlap


def _gamma_up(ts: TwoState) -> np.ndarray:
    overlap = _require_overlap(ts)
    direct = np.outer(ts.psi, ts.phi.conj()) / overlap
    tomographic = pauli_assemble(np.concatenate([[1.0], pauli_weak_values(ts)]) / 2)
    scale = max(1.0, float(np.max(np.abs(direct))))
    if np.max(np.abs(direct - tomographic)) > 1e-12 * scale:
        raise ArithmeticError("weak-value reconstruction disagrees with |psi><phi|/<phi|psi>")
    return direct


def incoherent_mixture(up: np.ndarray, down: np.ndarray, p_up: float) -> np.ndarray:
    """``p_up * up + (1 - p_up) * down``."""
    return p_up * up + (1.0 - p_up) * down


def coherent_superposition(up: np.ndarray, down: np.ndarray, p_up: float) -> np.ndarray:
    """``(1 - sqrt(p_up) - sqrt(p_down)) / 2 * I + sqrt(p_up) * up + sqrt(p_down) * down``.

    Trace one for trace-one ``up`` and ``down``; at ``p_up = 1/2`` it is the
    symmetric superposition with weak values ``(C_up + C_down) / sqrt(2)``.
    """
    s_up, s_down = math.sqrt(p_up), math.sqrt(1.0 - p_up)
    return 0.5 * (1.0 - s_up - s_down) * IDENTITY2 + s_up * up + s_down * down


def build_gamma_fixed(ts: TwoState, direction: Literal["up", "down"] = "up") -> PseudoState:
    """``|psi><phi| / <phi|psi>`` (``up``) or its Hermitian conjugate (``down``)."""
    up = _gamma_up(ts)
    if direction == "up":
        return PseudoState(up, "fixed_up", p_up=1.0)
    if direction == "down":
        return PseudoState(up.conj().T, "fixed_down", p_up=0.0)
    raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")


def build_gamma_incoherent(ts: TwoState, p_up: float = 0.5) -> PseudoState:
    p_up = check_probability(p_up)
    up = _gamma_up(ts)
    return PseudoState(incoherent_mixture(up, up.conj().T, p_up), "incoherent", p_up=p_up)


def build_gamma_coherent(ts: TwoState, p_up: float = 0.5) -> PseudoState:
    p_up = check_probability(p_up)
    up = _gamma_up(ts)
    return PseudoState(coherent_superposition(up, up.conj().T, p_up), "coherent", p_up=p_up)


def generalized_weights(psi, phi) -> tuple[complex, complex]:
    """``(x_up, x_down)`` with ``x_up = <phi|psi> / (<phi|psi> + <psi|phi>)``."""
    psi, phi = ket(psi), ket(phi)
    o = complex(np.vdot(phi, psi))
    denom = o + o.conjugate()
    if abs(denom) <= OVERLAP_ATOL:
        raise DegenerateSelectionError("symmetrized overlap <phi|psi> + <psi|phi> vanishes")
    return o / denom, o.conjugate() / denom


def ancilla_states(psi, phi) -> tuple[np.ndarray, np.ndarray]:
    """Joint system-control kets ``|Psi>``, ``|Phi>`` (system is the left factor)."""
    psi, phi = ket(psi), ket(phi)
    c0, c1 = np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)
    big_psi = (np.kron(psi, c0) + np.kron(phi, c1)) / math.sqrt(2)
    big_phi = (np.kron(phi, c0) + np.kron(psi, c1)) / math.sqrt(2)
    return big_psi, big_phi


def generalized_two_state_via_ancilla(psi, phi) -> np.ndarray:
    """``tr_c[|Psi><Phi| / <Phi|Psi>]`` computed on the 4-dimensional joint space."""
    big_psi, big_phi = ancilla_states(psi, phi)
    denom = complex(np.vdot(big_phi, big_psi))
    if abs(denom) <= OVERLAP_ATOL:
        raise DegenerateSelectionError("symmetrized overlap <phi|psi> + <psi|phi> vanishes")
    joint = np.outer(big_psi, big_phi.conj()) / denom
    return partial_trace(joint, ("S", "c"), keep={"S"})


def build_generalized_two_state(psi, phi) -> PseudoState:
    """``(|psi><phi| + |phi><psi|) / (<phi|psi> + <psi|phi>)``.

    The result is cross-checked against the ancilla construction.
    """
    psi, phi = ket(psi), ket(phi)
    generalized_weights(psi, phi)
    o = complex(np.vdot(phi, psi))
    direct = (np.outer(psi, phi.conj()) + np.outer(phi, psi.conj())) / (o + o.conjugate())
    via_ancilla = generalized_two_state_via_ancilla(psi, phi)
    scale = max(1.0, float(np.max(np.abs(direct))))
    if np.max(np.abs(direct - via_ancilla)) > 1e-12 * scale:
        raise ArithmeticError("generalized two-state disagrees with the ancilla construction")
    return PseudoState(direct, "generalized", p_up=0.5)


def build_r_ideal(ts: TwoState) -> PseudoState:
    """Pseudo-state tomographed with ideal (projective) Pauli measurements."""
    expectations = [abl_expectation(ts, j) for j in (1, 2, 3)]
    return PseudoState(pauli_assemble(np.array([1.0, *expectations]) / 2), "ideal_abl", p_up=0.5)


# --- three-time pseudo-density operator -------------------------------------

SLOTS = ("A", "C", "B")
_IDENTITY_OUTCOMES = ((1, IDENTITY2),)
_OUTCOMES = {0: _IDENTITY_OUTCOMES}
_OUTCOMES.update({j: ((1, projector(j, 1)), (-1, projector(j, -1))) for j in (1, 2, 3)})
_PAULI_STRINGS = {
    (i, j, k): tensor(pauli(i), pauli(j), pauli(k)) for i, j, k in itertools.product(range(4), repeat=3)
}


def three_time_correlators(pre, post) -> np.ndarray:
    """Correlators ``c[i, j, k]`` of sequential Pauli measurements on slots A, C, B.

    The system is prepared in ``pre``, measured with Pauli ``i``, ``j``, ``k`` in
    turn and post-selected on ``post``; outcome statistics are conditioned on the
    post-selection separately for every Pauli triple.
    """
    pre, post = ket(pre), ket(post)
    c = np.zeros((4, 4, 4))
    for i, j, k in itertools.product(range(4), repeat=3):
        weights, signs = [], []
        for (sa, pa), (sc, pc), (sb, pb) in itertools.product(_OUTCOMES[i], _OUTCOMES[j], _OUTCOMES[k]):
            amp = np.vdot(post, pb @ pc @ pa @ pre)
            weights.append(abs(amp) ** 2)
            signs.append(sa * sc * sb)
        total = sum(weights)
        if total <= OVERLAP_ATOL**2:
            raise DegenerateSelectionError(f"no outcome path survives post-selection for Pauli triple {(i, j, k)}")
        c[i, j, k] = float(np.dot(signs, weights)) / total
    return c


def assemble_three_time(c: np.ndarray) -> np.ndarray:
    m = np.zeros((8, 8), dtype=np.complex128)
    for idx, s in _PAULI_STRINGS.items():
        if c[idx] != 0.0:
            m += c[idx] * s
    return m / 8


@dataclass(frozen=True, eq=False)
class MultiTimePdo:
    """8x8 three-time pseudo-density operator over slots (A, C, B)."""

    matrix: np.ndarray
    a: np.ndarray
    b: np.ndarray
    order: Literal["forward", "reversed", "mixed"]
    p_forward: float = 1.0
    slots: tuple[str, str, str] = SLOTS

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    @property
    def hermitian(self) -> bool:
        return hermiticity_gap(self.matrix) <= HERMITIAN_ATOL

    def marginal(self, *keep: str) -> np.ndarray:
        """Reduced operator on the named slots, e.g. ``marginal("C")``."""
        return partial_trace(self.matrix, self.slots, keep)


def build_three_time_pdo(
    a, b, order: Literal["forward", "reversed", "mixed"] = "forward", p_forward: float = 0.5
) -> MultiTimePdo:
    """Three-time operator for preparation ``a`` and post-selection ``b``.

    ``reversed`` exchanges ``a`` and ``b`` in the measurement chain; ``mixed``
    is the ``p_forward`` weighted mixture of both.
    """
    a, b = ket(a), ket(b)
    if order == "forward":
        m, p = assemble_three_time(three_time_correlators(a, b)), 1.0
    elif order == "reversed":
        m, p = assemble_three_time(three_time_correlators(b, a)), 0.0
    elif order == "mixed":
        p = check_probability(p_forward, "p_forward")
        m = p * assemble_three_time(three_time_correlators(a, b)) + (1 - p) * assemble_three_time(
            three_time_correlators(b, a)
        )
    else:
        raise ValueError(f"order must be forward, reversed or mixed, got {order!r}")
    m.setflags(write=False)
    return MultiTimePdo(m, a, b, order, p)


# --- witness ----------------------------------------------------------------

Verdict = Literal["coherent_compatible", "incoherent_compatible", "no_negativity"]


@dataclass(frozen=True)
class WitnessReport:
    lambda_minus_incoherent: complex
    lambda_minus_coherent: complex
    p_up: float
    verdict: Verdict | None = None

    @property
    def magnitude_incoherent(self) -> float:
        return abs(self.lambda_minus_incoherent)

    @property
    def magnitude_coherent(self) -> float:
        return abs(self.lambda_minus_coherent)

    @property
    def coherent_more_negative(self) -> bool:
        return self.lambda_minus_coherent.real < self.lambda_minus_incoherent.real


def classify(observed: complex, lam_inc: complex, lam_coh: complex, atol: float = 0.0) -> Verdict:
    """Attribute an observed witness value to the nearer prediction."""
    if complex(observed).real >= -atol:
        return "no_negativity"
    if abs(observed - lam_coh) < abs(observed - lam_inc):
        return "coherent_compatible"
    return "incoherent_compatible"


def witness_compare(ts: TwoState, p_up: float = 0.5, observed: complex | None = None, atol: float = 0.0) -> WitnessReport:
    """Witness eigenvalues of the incoherent and coherent builds at the same order weight.

    With ``observed`` (e.g. a tomographic estimate of the witness) the report
    also carries a verdict on which superposition the observation matches.
    """
    lam_inc = build_gamma_incoherent(ts, p_up).lambda_minus
    lam_coh = build_gamma_coherent(ts, p_up).lambda_minus
    verdict = None if observed is None else classify(observed, lam_inc, lam_coh, atol)
    return WitnessReport(lam_inc, lam_coh, float(p_up), verdict)
