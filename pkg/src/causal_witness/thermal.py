"""Gibbs-selected two-states and complex effective inverse temperatures."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import expit

from .cmat import partial_trace
from .exceptions import BasisError, TemperaturePoleError
from .pdo import PseudoState, coherent_superposition, incoherent_mixture
from .validation import check_finite, check_matrix, check_probability


@dataclass(frozen=True)
class GibbsSpec:
    """Two-level Hamiltonian ``diag(e0, e1)`` with pre/post-selection inverse temperatures."""

    e0: float
    e1: float
    beta1: float
    beta2: float

    def __post_init__(self):
        for name in ("e0", "e1", "beta1", "beta2"):
            object.__setattr__(self, name, check_finite(getattr(self, name), name))
        if self.e1 == self.e0:
            raise ValueError("e1 must differ from e0")

    @property
    def gap(self) -> float:
        return self.e1 - self.e0


@dataclass(frozen=True)
class EffectiveTemperature:
    beta_eff: complex
    branch: str = "principal logarithm"

    @property
    def is_real(self) -> bool:
        return self.beta_eff.imag == 0.0


def gibbs_populations(spec: GibbsSpec, which: Literal[1, 2]) -> tuple[float, float]:
    """Boltzmann weights ``(p0, p1)`` at ``beta1`` (``which=1``) or ``beta2``."""
    if which not in (1, 2):
        raise ValueError(f"which must be 1 or 2, got {which!r}")
    beta = spec.beta1 if which == 1 else spec.beta2
    x = beta * spec.gap
    return float(expit(x)), float(expit(-x))


def gibbs_diagonal(beta: float, spec: GibbsSpec) -> np.ndarray:
    x = beta * spec.gap
    return np.diag([expit(x), expit(-x)]).astype(np.complex128)


def purified_selection(spec: GibbsSpec, which: Literal[1, 2]) -> np.ndarray:
    """System-environment ket ``sqrt(p0)|0>|0>_E + sqrt(p1)|1>|1>_E``.

    Both selections share the same environment states.
    """
    p0, p1 = gibbs_populations(spec, which)
    return np.array([math.sqrt(p0), 0.0, 0.0, math.sqrt(p1)], dtype=np.complex128)


def _thermal_up(spec: GibbsSpec) -> np.ndarray:
    pre, post = purified_selection(spec, 1), purified_selection(spec, 2)
    joint = np.outer(pre, post.conj()) / np.vdot(post, pre)
    return partial_trace(joint, ("S", "E"), keep={"S"})


def build_thermal_gamma(
    spec: GibbsSpec, mode: Literal["fixed", "incoherent", "coherent"] = "incoherent", p_up: float = 0.5
) -> PseudoState:
    """Pseudo-state of the Gibbs-selected qubit at the intermediate time (free evolution neglected)."""
    up = _thermal_up(spec)
    if mode == "fixed":
        return PseudoState(up, "fixed_up", p_up=1.0)
    p_up = check_probability(p_up)
    down = up.conj().T
    if mode == "incoherent":
        return PseudoState(incoherent_mixture(up, down, p_up), "incoherent", p_up=p_up)
    if mode == "coherent":
        return PseudoState(coherent_superposition(up, down, p_up), "coherent", p_up=p_up)
    raise ValueError(f"mode must be fixed, incoherent or coherent, got {mode!r}")


def effective_beta(state, spec: GibbsSpec) -> EffectiveTemperature:
    """``ln(lambda0 / lambda1) / (e1 - e0)`` from the energy-basis populations.

    Uses the principal branch, so one negative population contributes
    ``+i pi / (e1 - e0)``.
    """
    m = check_matrix(state.matrix if isinstance(state, PseudoState) else state, shape=(2, 2))
    if max(abs(m[0, 1]), abs(m[1, 0])) > 1e-10:
        raise BasisError("pseudo-state is not diagonal in the energy basis")
    lam0, lam1 = complex(m[0, 0]), complex(m[1, 1])
    if abs(lam0) <= 1e-15 or abs(lam1) <= 1e-15:
        raise TemperaturePoleError("a vanishing population puts the effective temperature at a pole")
    ratio = lam0 / lam1
    # -0.0 imaginary parts would select the -i pi branch
    ratio = complex(ratio.real, ratio.imag + 0.0)
    return EffectiveTemperature(cmath.log(ratio) / spec.gap)
