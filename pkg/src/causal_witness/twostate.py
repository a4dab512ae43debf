"""Pre/post-selected qubit ensembles: two-state vectors, weak values and the ABL rule.

Kets are length-2 complex arrays in the basis ``(|V>, |H>)`` = ``(|0>, |1>)``.
The post-selection of a :class:`TwoState` is stored as the ket of the bra
``<phi|``.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cmat import IDENTITY2, pauli
from .exceptions import DegenerateSelectionError, UndefinedWeakValueError
from .validation import NORM_ATOL, check_matrix, check_pauli_index, check_unitary

OVERLAP_ATOL = 1e-12


def ket(amplitudes: Sequence[complex], normalize: bool = False) -> np.ndarray:
    """Build a read-only qubit ket, checking (or enforcing) unit norm."""
    v = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
    if v.shape != (2,):
        raise ValueError(f"a qubit ket has 2 amplitudes, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise ValueError("ket amplitudes must be finite")
    norm = float(np.linalg.norm(v))
    if normalize:
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        v = v / norm
    elif abs(norm - 1.0) > NORM_ATOL:
        raise ValueError(f"ket is not normalized (norm {norm!r})")
    v = v.copy()
    v.setflags(write=False)
    return v


_S = 1 / math.sqrt(2)
V = ket([1, 0])
H = ket([0, 1])
D = ket([_S, _S])
A = ket([_S, -_S])
R = ket([_S, 1j * _S])
L = ket([_S, -1j * _S])

# eigenvectors (+1, -1) of sigma_x, sigma_y, sigma_z
PAULI_EIGENBASES = {
    1: (D, A),
    2: (R, L),
    3: (V, H),
}


def bloch_ket(theta: float, phase: float) -> np.ndarray:
    """``cos(theta)|V> + exp(i phase) sin(theta)|H>``."""
    return ket([math.cos(theta), cmath.exp(1j * phase) * math.sin(theta)])


_NAMED = {"V": V, "H": H, "D": D, "A": A, "R": R, "L": L}
_FLOAT = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"


def parse_state(spec: str) -> np.ndarray:
    """Parse a state string: ``V``, ``H``, ``D``, ``A``, ``R``, ``L``,
    ``bloch:<theta>,<phase>`` or ``amp:<reV>,<imV>,<reH>,<imH>``."""
    s = spec.strip()
    if s.upper() in _NAMED:
        return _NAMED[s.upper()]
    kind, _, rest = s.partition(":")
    nums = [x.strip() for x in rest.split(",")] if rest else []
    if not all(re.fullmatch(_FLOAT, x) for x in nums):
        raise ValueError(f"malformed state spec {spec!r}")
    vals = [float(x) for x in nums]
    if kind.lower() == "bloch" and len(vals) == 2:
        return bloch_ket(*vals)
    if kind.lower() == "amp" and len(vals) == 4:
        return ket([complex(vals[0], vals[1]), complex(vals[2], vals[3])], normalize=True)
    raise ValueError(f"malformed state spec {spec!r}")


@dataclass(frozen=True)
class PolarizerConfig:
    """Post-selection polarizer angle ``theta`` in [0, pi/2) and azimuthal ``phase``."""

    theta: float
    phase: float = 0.0

    def __post_init__(self):
        theta, phase = float(self.theta), float(self.phase)
        if not (0.0 <= theta < math.pi / 2):
            raise ValueError(f"theta must lie in [0, pi/2), got {theta}")
        if not math.isfinite(phase):
            raise ValueError("phase must be finite")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phase", phase % (2 * math.pi))


@dataclass(frozen=True, eq=False)
class TwoState:
    """Two-state vector ``<phi| |psi>`` with optional free evolution.

    ``u_pre`` propagates the pre-selected ket forward to the intermediate time;
    ``u_post`` propagates it onward to the post-selection, so the effective bra
    is ``<post| u_post`` and the effective ket of the backward state is
    ``u_post^dagger |post>``.
    """

    pre: np.ndarray
    post: np.ndarray
    u_pre: np.ndarray | None = None
    u_post: np.ndarray | None = None
    psi: np.ndarray = field(init=False, repr=False, compare=False)
    phi: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pre, post = ket(self.pre), ket(self.post)
        u_pre = IDENTITY2 if self.u_pre is None else check_unitary(self.u_pre, "u_pre")
        u_post = IDENTITY2 if self.u_post is None else check_unitary(self.u_post, "u_post")
        psi = u_pre @ pre
        phi = u_post.conj().T @ post
        for arr in (psi, phi):
            arr.setflags(write=False)
        object.__setattr__(self, "pre", pre)
        object.__setattr__(self, "post", post)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "phi", phi)

    @property
    def overlap(self) -> complex:
        """``<phi|psi>`` for the effective kets."""
        return complex(np.vdot(self.phi, self.psi))

    @property
    def is_degenerate(self) -> bool:
        """True when pre- and post-selection are orthogonal (weak values undefined)."""
        return abs(self.overlap) <= OVERLAP_ATOL

    def reversed(self) -> "TwoState":
        """The opposite causal order: ``<psi| |phi>``."""
        return TwoState(self.phi, self.psi)


def polarizer_two_state(cfg: PolarizerConfig) -> TwoState:
    """Vertical pre-selection and a post-selection polarizer at ``(theta, phase)``."""
    if not isinstance(cfg, PolarizerConfig):
        cfg = PolarizerConfig(*cfg)
    return TwoState(V, bloch_ket(cfg.theta, cfg.phase))


def _require_overlap(ts: TwoState) -> complex:
    if ts.is_degenerate:
        raise UndefinedWeakValueError("weak value undefined: pre- and post-selection are orthogonal")
    return ts.overlap


def weak_value(ts: TwoState, obs) -> complex:
    """``<phi|obs|psi> / <phi|psi>``."""
    overlap = _require_overlap(ts)
    obs = check_matrix(obs, shape=(2, 2), name="observable")
    num = complex(np.vdot(ts.phi, obs @ ts.psi))
    # multiply by the conjugate so that num == overlap gives exactly 1
    return num * overlap.conjugate() / (overlap.real**2 + overlap.imag**2)


def pauli_weak_values(ts: TwoState) -> np.ndarray:
    """Weak values of sigma_x, sigma_y, sigma_z."""
    return np.array([weak_value(ts, pauli(j)) for j in (1, 2, 3)])


def projector(j: int, sign: int) -> np.ndarray:
    """Projector onto the ``sign`` eigenspace of Pauli ``j``."""
    j = check_pauli_index(j)
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    return (IDENTITY2 + sign * pauli(j)) / 2


def projector_weak_value(ts: TwoState, j: int, sign: int) -> complex:
    return weak_value(ts, projector(j, sign))


def _check_orthonormal(outcomes) -> np.ndarray:
    basis = np.array([ket(c) for c in outcomes])
    if basis.shape != (2, 2):
        raise ValueError("outcomes must be two qubit kets")
    gram = basis.conj() @ basis.T
    if np.max(np.abs(gram - np.eye(2))) > 1e-10:
        raise ValueError("outcomes are not an orthonormal basis")
    return basis


def abl_probabilities(ts: TwoState, outcomes) -> np.ndarray:
    """ABL probabilities of every outcome of an ideal intermediate measurement."""
    basis = _check_orthonormal(outcomes)
    weights = np.array([abs(np.vdot(ts.phi, c) * np.vdot(c, ts.psi)) ** 2 for c in basis])
    total = weights.sum()
    if total <= OVERLAP_ATOL**2:
        raise DegenerateSelectionError("all intermediate outcome paths have zero amplitude")
    return weights / total


def abl_probability(ts: TwoState, outcomes, index: int) -> float:
    return float(abl_probabilities(ts, outcomes)[index])


def abl_expectation(ts: TwoState, j: int) -> float:
    """``p(sigma_j = +1) - p(sigma_j = -1)`` under the ABL rule."""
    p_plus, p_minus = abl_probabilities(ts, PAULI_EIGENBASES[check_pauli_index(j)])
    return float(p_plus - p_minus)
