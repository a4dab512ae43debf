"""scikit-learn compatible estimators.

``WeakPauliTomography`` and ``IdealPauliTomography`` turn per-photon readings
into a reconstructed pseudo-state; ``WitnessSweep`` maps rows of
``(theta, phase, p_up)`` to witness eigenvalues so a parameter scan can sit
inside a ``Pipeline`` or be driven by ``ParameterGrid``.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .cmat import eig2, pauli_assemble
from .pdo import MODES, PseudoState, build_gamma_coherent, build_gamma_incoherent
from .tomosim import PointerModel, calibrate_momentum_coefficient
from .twostate import PolarizerConfig, polarizer_two_state
from .validation import check_probability


def _check_observables(y) -> np.ndarray:
    y = np.asarray(y)
    if not np.all(np.isin(y, (1, 2, 3))):
        raise ValueError("observable labels must be Pauli indices 1, 2 or 3")
    return y.astype(np.int64)


def _mean_and_se(values: np.ndarray) -> tuple[float, float]:
    if values.size == 0:
        return 0.0, math.nan
    if values.size == 1:
        return float(values[0]), math.nan
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.size))


def _template(weights: np.ndarray) -> np.ndarray:
    return pauli_assemble(np.concatenate([[1.0], weights]) / 2)


def lambda_minus_se(weights: np.ndarray, se_real: np.ndarray, se_imag: np.ndarray, step: float = 1e-6) -> float:
    """Delta-method standard error of ``Re(lambda_minus)`` of the Pauli template.

    The six real parameters are treated as independent.
    """
    base = np.asarray(weights, dtype=np.complex128)
    grads, ses = [], []
    for k in range(3):
        for unit, se in ((1.0, se_real[k]), (1j, se_imag[k])):
            if se == 0.0:
                continue
            hi, lo = base.copy(), base.copy()
            hi[k] += unit * step
            lo[k] -= unit * step
            grads.append((eig2(_template(hi)).minus.real - eig2(_template(lo)).minus.real) / (2 * step))
            ses.append(se)
    if not ses:
        return 0.0
    return float(math.sqrt(sum((g * s) ** 2 for g, s in zip(grads, ses))))


class _PauliTomographyMixin:
    def _finish(self, weights, se_real, se_imag, counts, mode, p_up):
        self.weak_values_ = weights
        self.se_real_ = se_real
        self.se_imag_ = se_imag
        self.counts_ = counts
        self.pseudo_state_ = PseudoState(_template(weights), mode, p_up=p_up)
        self.lambda_minus_ = self.pseudo_state_.lambda_minus
        self.lambda_minus_se_ = lambda_minus_se(weights, se_real, se_imag)
        return self

    def predict(self, observables) -> np.ndarray:
        """Expectation ``tr(rho_hat O)`` of 2x2 observables under the reconstruction."""
        check_is_fitted(self, "pseudo_state_")
        obs = np.asarray(observables, dtype=np.complex128)
        single = obs.ndim == 2
        obs = obs.reshape(-1, 2, 2)
        out = np.einsum("ij,nji->n", self.pseudo_state_.matrix, obs)
        return out[0] if single else out


class WeakPauliTomography(_PauliTomographyMixin, BaseEstimator):
    """Reconstruct a pseudo-state from weakly coupled pointer readings.

    Parameters
    ----------
    g, delta : float
        Pointer coupling and position spread used to take the data.
    momentum_coefficient : float, optional
        Momentum response per unit ``g * Im(weak value)``. Calibrated from the
        exact pointer moments when omitted.
    mode, p_up :
        Labels attached to the reconstructed :class:`PseudoState`.

    ``fit(X, y)`` expects ``X`` of shape ``(n, 2)`` holding position and
    momentum readings and ``y`` the Pauli index (1..3) each photon was coupled to.
    The real part of each weak value is ``mean(x) / g`` and the imaginary part
    ``mean(p) / (momentum_coefficient * g)``.
    """

    def __init__(self, g=0.01, delta=1.0, momentum_coefficient=None, mode="incoherent", p_up=0.5):
        self.g = g
        self.delta = delta
        self.momentum_coefficient = momentum_coefficient
        self.mode = mode
        self.p_up = p_up

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, ensure_min_samples=1)
        if X.shape[1] != 2:
            raise ValueError(f"expected (position, momentum) columns, got {X.shape[1]} features")
        y = _check_observables(y)
        pm = PointerModel(self.g, self.delta)
        if pm.g == 0.0:
            raise ValueError("a zero coupling carries no weak-value information")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        kappa = calibrate_momentum_coefficient(pm) if self.momentum_coefficient is None else float(self.momentum_coefficient)
        self.momentum_coefficient_ = kappa
        self.n_features_in_ = 2

        weights = np.zeros(3, dtype=np.complex128)
        se_re, se_im, counts = np.empty(3), np.empty(3), np.zeros(3, dtype=np.int64)
        for k, j in enumerate((1, 2, 3)):
            rows = X[y == j]
            counts[k] = rows.shape[0]
            mx, sx = _mean_and_se(rows[:, 0])
            mp, sp = _mean_and_se(rows[:, 1])
            weights[k] = complex(mx / pm.g, mp / (kappa * pm.g))
            se_re[k], se_im[k] = sx / pm.g, sp / (kappa * pm.g)
        return self._finish(weights, se_re, se_im, counts, self.mode, check_probability(self.p_up))


class IdealPauliTomography(_PauliTomographyMixin, BaseEstimator):
    """Reconstruct a pseudo-state from projective Pauli outcomes.

    ``fit(X, y)`` takes ``X`` of shape ``(n, 1)`` with outcomes +1/-1 and ``y``
    the Pauli index measured on each sample.
    """

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, ensure_min_samples=1)
        if X.shape[1] != 1 or not np.all(np.isin(X, (-1.0, 1.0))):
            raise ValueError("expected a single column of +1/-1 outcomes")
        y = _check_observables(y)
        self.n_features_in_ = 1
        weights = np.zeros(3, dtype=np.complex128)
        se_re, counts = np.empty(3), np.zeros(3, dtype=np.int64)
        for k, j in enumerate((1, 2, 3)):
            vals = X[y == j, 0]
            counts[k] = vals.size
            weights[k], se_re[k] = _mean_and_se(vals)
        return self._finish(weights, se_re, np.zeros(3), counts, "ideal_abl", 0.5)


class WitnessSweep(TransformerMixin, BaseEstimator):
    """Witness eigenvalues for the polarizer two-state.

    ``transform`` maps each row ``(theta, phase, p_up)`` to the real parts of
    the negative eigenvalue of the requested builds, one column per mode.
    """

    _builders = {"incoherent": build_gamma_incoherent, "coherent": build_gamma_coherent}

    def __init__(self, modes=("incoherent", "coherent")):
        self.modes = modes

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != 3:
            raise ValueError(f"expected (theta, phase, p_up) columns, got {X.shape[1]}")
        unknown = set(self.modes) - set(self._builders)
        if unknown or not self.modes:
            raise ValueError(f"modes must be drawn from {sorted(self._builders)}, got {self.modes!r}")
        self.n_features_in_ = 3
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X, dtype=np.float64)
        out = np.empty((X.shape[0], len(self.modes)))
        for r, (theta, phase, p_up) in enumerate(X):
            ts = polarizer_two_state(PolarizerConfig(theta, phase))
            for c, mode in enumerate(self.modes):
                out[r, c] = self._builders[mode](ts, p_up).lambda_minus.real
        return out

    def get_feature_names_out(self, input_features=None):
        return np.array([f"lambda_minus_{m}" for m in self.modes], dtype=object)
