"""Monte Carlo pseudo-state tomography of single photons between two polarizers.

Each detected photon carries a Gaussian pointer that was coupled to one Pauli
observable of its polarization and then post-selected. The pointer is sampled
from the exact post-selected distribution (no first-order truncation). Only
the estimator in :mod:`causal_witness.estimators` uses the linear-response
relation between pointer shifts and weak values.

Random numbers come from a Philox counter-based generator keyed by the seed.
Photon ``i`` always consumes counter blocks ``2i`` and ``2i + 1``, so results
do not depend on chunking or on the number of worker threads.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import erfc, ndtr

from .cmat import pauli
from .exceptions import InsufficientStatisticsError
from .pdo import PseudoState
from .twostate import (
    D,
    PAULI_EIGENBASES,
    PolarizerConfig,
    TwoState,
    V,
    abl_probabilities,
    polarizer_two_state,
    projector,
    weak_value,
)
from .validation import check_pauli_index, check_probability

THREADS_ENV = "CAUSAL_WITNESS_THREADS"
WEAK_REGIME = 0.1
_UNIFORMS_PER_PHOTON = 8
_BLOCKS_PER_PHOTON = 2
_CHUNK = 1 << 16
_BISECTION_STEPS = 64


@dataclass(frozen=True)
class PointerModel:
    """Gaussian pointer with position spread ``delta`` and coupling ``g`` (same units)."""

    g: float = 0.01
    delta: float = 1.0

    def __post_init__(self):
        g, delta = float(self.g), float(self.delta)
        if not (math.isfinite(delta) and delta > 0):
            raise ValueError(f"delta must be positive, got {delta}")
        if not (math.isfinite(g) and g >= 0):
            raise ValueError(f"g must be non-negative, got {g}")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "delta", delta)

    @property
    def weakness(self) -> float:
        return self.g / self.delta

    @property
    def is_weak(self) -> bool:
        return self.weakness <= WEAK_REGIME

    @property
    def momentum_spread(self) -> float:
        return 1.0 / (2.0 * self.delta)


def _gauss_amplitude(x, delta):
    return (2 * math.pi * delta**2) ** -0.25 * np.exp(-np.square(x) / (4 * delta**2))


def _complex_ndtr(z):
    return 0.5 * erfc(-np.asarray(z, dtype=np.complex128) / math.sqrt(2))


@dataclass(frozen=True)
class PointerDistribution:
    """Post-selected pointer ``A+ G(x - g) + A- G(x + g)`` with ``A+- = <phi|Pi+-|psi>``.

    Moments are normalized by the post-selection probability; momentum uses
    hbar = 1 and spread ``1 / (2 delta)``.
    """

    amp_plus: complex
    amp_minus: complex
    g: float
    delta: float

    @property
    def _s(self) -> float:
        return abs(self.amp_plus) ** 2 + abs(self.amp_minus) ** 2

    @property
    def _c(self) -> complex:
        return self.amp_plus * self.amp_minus.conjugate()

    @property
    def _damping(self) -> float:
        return math.exp(-self.g**2 / (2 * self.delta**2))

    @property
    def _sigma_p(self) -> float:
        return 1.0 / (2.0 * self.delta)

    @property
    def success_probability(self) -> float:
        return self._s + 2 * self._c.real * self._damping

    @property
    def position_mean(self) -> float:
        return self.g * (abs(self.amp_plus) ** 2 - abs(self.amp_minus) ** 2) / self.success_probability

    @property
    def position_second_moment(self) -> float:
        d2 = self.delta**2
        return ((d2 + self.g**2) * self._s + 2 * self._c.real * self._damping * d2) / self.success_probability

    @property
    def momentum_mean(self) -> float:
        s2 = self._sigma_p**2
        return 4 * self.g * s2 * self._damping * self._c.imag / self.success_probability

    @property
    def momentum_second_moment(self) -> float:
        s2 = self._sigma_p**2
        k = 2 * self.g
        return (self._s * s2 + 2 * self._c.real * (s2 - k**2 * s2**2) * self._damping) / self.success_probability

    def position_amplitude(self, x):
        """Unnormalized post-selected position wavefunction."""
        x = np.asarray(x, dtype=float)
        return self.amp_plus * _gauss_amplitude(x - self.g, self.delta) + self.amp_minus * _gauss_amplitude(
            x + self.g, self.delta
        )

    def momentum_amplitude(self, p):
        """Unnormalized post-selected momentum wavefunction, ``(2 pi)^-1/2 int psi(x) e^{-ipx} dx``."""
        p = np.asarray(p, dtype=float)
        base = (2 * self.delta**2 / math.pi) ** 0.25 * np.exp(-(self.delta**2) * p**2)
        return base * (self.amp_plus * np.exp(-1j * p * self.g) + self.amp_minus * np.exp(1j * p * self.g))

    def position_pdf(self, x):
        return np.abs(self.position_amplitude(x)) ** 2 / self.success_probability

    def momentum_pdf(self, p):
        return np.abs(self.momentum_amplitude(p)) ** 2 / self.success_probability

    def position_cdf(self, x):
        x = np.asarray(x, dtype=float)
        d = self.delta
        total = (
            abs(self.amp_plus) ** 2 * ndtr((x - self.g) / d)
            + abs(self.amp_minus) ** 2 * ndtr((x + self.g) / d)
            + 2 * self._c.real * self._damping * ndtr(x / d)
        )
        return total / self.success_probability

    def momentum_cdf(self, p):
        p = np.asarray(p, dtype=float)
        s = self._sigma_p
        shifted = _complex_ndtr((p + 1j * 2 * self.g * s**2) / s)
        total = self._s * ndtr(p / s) + 2 * np.real(self._c * self._damping * shifted)
        return total / self.success_probability

    def _invert(self, cdf, u, half_width):
        u = np.asarray(u, dtype=float)
        lo = np.full(u.shape, -half_width)
        hi = np.full(u.shape, half_width)
        for _ in range(_BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            below = cdf(mid) < u
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    def sample_position(self, u):
        """Inverse-CDF position samples for uniforms ``u`` in (0, 1)."""
        return self._invert(self.position_cdf, u, abs(self.g) + 16 * self.delta)

    def sample_momentum(self, u):
        """Inverse-CDF momentum samples for uniforms ``u`` in (0, 1)."""
        return self._invert(self.momentum_cdf, u, 16 * self._sigma_p + 2 * abs(self.g))


def pointer_distribution(ts: TwoState, obs: int, pm: PointerModel) -> PointerDistribution:
    """Exact post-selected pointer after a von Neumann coupling to Pauli ``obs``."""
    j = check_pauli_index(obs)
    weak_value(ts, pauli(j))  # rejects orthogonal selections
    amp_plus = complex(np.vdot(ts.phi, projector(j, 1) @ ts.psi))
    amp_minus = complex(np.vdot(ts.phi, projector(j, -1) @ ts.psi))
    return PointerDistribution(amp_plus, amp_minus, pm.g, pm.delta)


_REFERENCE = TwoState(V, D)  # sigma_y weak value is exactly i


def fitted_slope(ts: TwoState, obs: int, delta: float, channel: Literal["position", "momentum"], rel_g: float = 1e-3) -> float:
    """Least-squares slope through the origin of an exact pointer mean versus ``g``."""
    gs = np.linspace(0.0, rel_g * delta, 5)[1:]
    means = []
    for g in gs:
        dist = pointer_distribution(ts, obs, PointerModel(g, delta))
        means.append(dist.position_mean if channel == "position" else dist.momentum_mean)
    means = np.asarray(means)
    return float(np.dot(gs, means) / np.dot(gs, gs))


def calibrate_momentum_coefficient(pm: PointerModel) -> float:
    """Momentum-mean response per unit ``g * Im(weak value)``, fitted on exact moments."""
    im_ref = weak_value(_REFERENCE, pauli(2)).imag
    return fitted_slope(_REFERENCE, 2, pm.delta, "momentum") / im_ref


# --- sampling ------------------------------------------------------------------


def photon_uniforms(seed: int, start: int, stop: int) -> np.ndarray:
    """Uniforms in (0, 1) for photons ``start..stop-1``, shape ``(stop - start, 8)``."""
    bg = np.random.Philox(key=seed)
    state = bg.state
    state["state"]["counter"] = np.array([start * _BLOCKS_PER_PHOTON, 0, 0, 0], dtype=np.uint64)
    state["buffer_pos"] = 4
    bg.state = state
    raw = bg.random_raw((stop - start) * _UNIFORMS_PER_PHOTON)
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return u.reshape(stop - start, _UNIFORMS_PER_PHOTON)


def _check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return seed


def _resolve_threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    return max(1, int(threads))


def _run_chunks(worker, n: int, threads: int) -> list:
    bounds = [(s, min(s + _CHUNK, n)) for s in range(0, n, _CHUNK)]
    if threads == 1 or len(bounds) == 1:
        return [worker(s, e) for s, e in bounds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda b: worker(*b), bounds))


@dataclass(frozen=True)
class ExperimentLayout:
    """Photonic setup: mechanically coupled polarizers, a doubled path, or a fixed order.

    ``coupled_polarizers`` picks the forward order with probability ``p_up``;
    ``doubled_path`` measures in either half of the ``psi, phi, phi, psi`` chain
    with probability 1/2; ``fixed_order`` uses the forward (``p_up=1``) or
    reversed (``p_up=0``) order only.
    """

    kind: Literal["coupled_polarizers", "doubled_path", "fixed_order"]
    config: PolarizerConfig
    p_up: float = 0.5

    def __post_init__(self):
        if self.kind not in ("coupled_polarizers", "doubled_path", "fixed_order"):
            raise ValueError(f"unknown layout kind {self.kind!r}")
        if not isinstance(self.config, PolarizerConfig):
            object.__setattr__(self, "config", PolarizerConfig(*self.config))
        p = check_probability(self.p_up)
        if self.kind == "doubled_path" and p != 0.5:
            raise ValueError("doubled_path measures each half with probability 1/2; p_up must be 0.5")
        if self.kind == "fixed_order" and p not in (0.0, 1.0):
            raise ValueError("fixed_order needs p_up of 0 or 1")
        object.__setattr__(self, "p_up", p)


@dataclass(frozen=True)
class PointerRecord:
    """Raw readings of detected photons in emission order."""

    photon: np.ndarray
    observable: np.ndarray
    position: np.ndarray
    momentum: np.ndarray
    n_emitted: int

    @property
    def n_detected(self) -> int:
        return int(self.photon.size)


def simulate_pointer_record(
    layout: ExperimentLayout, pm: PointerModel, n: int, seed: int, threads: int | None = None
) -> PointerRecord:
    """Simulate ``n`` emitted photons and return pointer readings of the detected ones."""
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"photon count must be a positive integer, got {n!r}")
    n, seed = int(n), _check_seed(seed)
    ts_up = polarizer_two_state(layout.config)
    ts_down = ts_up.reversed()
    dists = {
        (down, j): pointer_distribution(ts_down if down else ts_up, j, pm) for down in (False, True) for j in (1, 2, 3)
    }
    success = np.array([[dists[(d, j)].success_probability for j in (1, 2, 3)] for d in (False, True)])
    projective_pass = abs(ts_up.overlap) ** 2

    def worker(start, stop):
        idx = np.arange(start, stop, dtype=np.int64)
        u = photon_uniforms(seed, start, stop)
        obs = (idx % 3 + 1).astype(np.int64)
        detected = u[:, 0] < 0.5  # unpolarized source through the first polarizer
        if layout.kind == "coupled_polarizers":
            down = u[:, 1] >= layout.p_up
        elif layout.kind == "fixed_order":
            down = np.full(idx.shape, layout.p_up == 0.0)
        else:
            # second half of the doubled path sees the reversed selections
            down = u[:, 1] >= 0.5
            detected &= u[:, 3] < projective_pass
        detected &= u[:, 2] < success[down.astype(int), obs - 1]

        x = np.empty(int(detected.sum()))
        p = np.empty_like(x)
        sel_obs, sel_down, sel_u = obs[detected], down[detected], u[detected]
        for (d, j), dist in dists.items():
            m = (sel_down == d) & (sel_obs == j)
            if m.any():
                x[m] = dist.sample_position(sel_u[m, 4])
                p[m] = dist.sample_momentum(sel_u[m, 5])
        return idx[detected], sel_obs, x, p

    parts = _run_chunks(worker, n, _resolve_threads(threads))
    return PointerRecord(*(np.concatenate([part[k] for part in parts]) for k in range(4)), n_emitted=n)


# --- estimates -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TomographyEstimate:
    pauli_means: np.ndarray
    se_real: np.ndarray
    se_imag: np.ndarray
    counts: np.ndarray
    n_detected: int
    n_emitted: int
    reconstructed: PseudoState
    lambda_minus: complex
    lambda_minus_se: float
    seed: int

    @property
    def se_defined(self) -> bool:
        return bool(np.all(np.isfinite(self.se_real)) and np.all(np.isfinite(self.se_imag)))


def _estimate_from(est, n_detected, n_emitted, seed) -> TomographyEstimate:
    return TomographyEstimate(
        pauli_means=est.weak_values_,
        se_real=est.se_real_,
        se_imag=est.se_imag_,
        counts=est.counts_,
        n_detected=n_detected,
        n_emitted=n_emitted,
        reconstructed=est.pseudo_state_,
        lambda_minus=est.lambda_minus_,
        lambda_minus_se=est.lambda_minus_se_,
        seed=seed,
    )


def run_tomography(
    layout: ExperimentLayout,
    pm: PointerModel | None = None,
    n: int = 1_000_000,
    seed: int = 0,
    threads: int | None = None,
) -> TomographyEstimate:
    """Weak-measurement pseudo-state tomography of ``n`` emitted photons."""
    from .estimators import WeakPauliTomography

    pm = PointerModel() if pm is None else pm
    if not pm.is_weak:
        warnings.warn(f"g/delta = {pm.weakness:.3g} is outside the weak regime", RuntimeWarning, stacklevel=2)
    record = simulate_pointer_record(layout, pm, n, seed, threads)
    if record.n_detected == 0:
        raise InsufficientStatisticsError("no photon survived post-selection")
    if layout.kind == "fixed_order":
        mode = "fixed_up" if layout.p_up == 1.0 else "fixed_down"
    else:
        mode = "incoherent"
    est = WeakPauliTomography(g=pm.g, delta=pm.delta, mode=mode, p_up=layout.p_up)
    est.fit(np.column_stack([record.position, record.momentum]), record.observable)
    return _estimate_from(est, record.n_detected, record.n_emitted, _check_seed(seed))


def simulate_ideal_outcomes(ts: TwoState, n: int, seed: int, threads: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Round-robin projective Pauli outcomes (+1/-1) drawn from the ABL rule."""
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"sample count must be a positive integer, got {n!r}")
    n, seed = int(n), _check_seed(seed)
    p_plus = np.array([abl_probabilities(ts, PAULI_EIGENBASES[j])[0] for j in (1, 2, 3)])

    def worker(start, stop):
        idx = np.arange(start, stop, dtype=np.int64)
        obs = (idx % 3 + 1).astype(np.int64)
        u = photon_uniforms(seed, start, stop)[:, 0]
        return obs, np.where(u < p_plus[obs - 1], 1.0, -1.0)

    parts = _run_chunks(worker, n, _resolve_threads(threads))
    return np.concatenate([o for o, _ in parts]), np.concatenate([r for _, r in parts])


def run_ideal_tomography(ts: TwoState, n: int = 1_000_000, seed: int = 0, threads: int | None = None) -> TomographyEstimate:
    """Projective-measurement tomography; converges to :func:`causal_witness.pdo.build_r_ideal`."""
    from .estimators import IdealPauliTomography

    obs, outcomes = simulate_ideal_outcomes(ts, n, seed, threads)
    est = IdealPauliTomography().fit(outcomes.reshape(-1, 1), obs)
    return _estimate_from(est, int(n), int(n), _check_seed(seed))


__all__ = [
    "ExperimentLayout",
    "PointerDistribution",
    "PointerModel",
    "PointerRecord",
    "TomographyEstimate",
    "calibrate_momentum_coefficient",
    "fitted_slope",
    "photon_uniforms",
    "pointer_distribution",
    "run_ideal_tomography",
    "run_tomography",
    "simulate_ideal_outcomes",
    "simulate_pointer_record",
]
