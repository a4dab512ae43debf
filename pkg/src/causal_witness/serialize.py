"""JSON encodings of matrices, pseudo-states, tomography estimates and thermal results."""

from __future__ import annotations

import math

import numpy as np

from .pdo import PseudoState
from .thermal import GibbsSpec, build_thermal_gamma, effective_beta


def _num(x: float):
    x = float(x)
    return x if math.isfinite(x) else None


def complex_pair(z) -> list:
    z = complex(z)
    return [_num(z.real), _num(z.imag)]


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=np.complex128)
    return {"rows": m.shape[0], "cols": m.shape[1], "entries": [complex_pair(z) for z in m.ravel()]}


def matrix_from_json(obj: dict) -> np.ndarray:
    rows, cols = int(obj["rows"]), int(obj["cols"])
    entries = obj["entries"]
    if len(entries) != rows * cols:
        raise ValueError(f"expected {rows * cols} entries, got {len(entries)}")
    return np.array([complex(re, im) for re, im in entries], dtype=np.complex128).reshape(rows, cols)


def pseudo_state_to_json(ps: PseudoState) -> dict:
    out = matrix_to_json(ps.matrix)
    out.update(
        mode=ps.mode,
        p_up=ps.p_up,
        trace=complex_pair(ps.trace),
        hermitian=ps.hermitian,
        eigenvalues=[complex_pair(v) for v in ps.eigenvalues],
    )
    return out


def pseudo_state_from_json(obj: dict) -> PseudoState:
    return PseudoState(matrix_from_json(obj), obj["mode"], p_up=obj["p_up"])


def estimate_to_json(est) -> dict:
    return {
        "n_emitted": int(est.n_emitted),
        "n_detected": int(est.n_detected),
        "pauli_means": [
            [_num(w.real), _num(w.imag), _num(sr), _num(si)]
            for w, sr, si in zip(est.pauli_means, est.se_real, est.se_imag)
        ],
        "matrix": pseudo_state_to_json(est.reconstructed),
        "lambda_minus": [_num(est.lambda_minus.real), _num(est.lambda_minus_se)],
        "seed": int(est.seed),
    }


def thermal_to_json(spec: GibbsSpec, p_up: float = 0.5) -> dict:
    inc = build_thermal_gamma(spec, "incoherent", p_up)
    coh = build_thermal_gamma(spec, "coherent", p_up)
    beta_inc = effective_beta(inc, spec).beta_eff
    beta_coh = effective_beta(coh, spec).beta_eff
    return {
        "beta_incoherent": _num(beta_inc.real),
        "beta_coherent": complex_pair(beta_coh),
        "diag_incoherent": [_num(v) for v in np.real(np.diag(inc.matrix))],
        "diag_coherent": [_num(v) for v in np.real(np.diag(coh.matrix))],
    }
