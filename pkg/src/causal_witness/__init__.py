"""Single-time pseudo-states of pre- and post-selected qubits.

The negative eigenvalue of the weak-measurement pseudo-state separates
coherent from incoherent superpositions of the two causal orders in which
pre- and post-selection can occur.
"""

from .cmat import EigenResult, eig2, eigvals, partial_trace, pauli, pauli_assemble, pauli_expand, tensor
from .estimators import IdealPauliTomography, WeakPauliTomography, WitnessSweep
from .exceptions import (
    BasisError,
    CausalWitnessError,
    DegenerateSelectionError,
    InsufficientStatisticsError,
    TemperaturePoleError,
    UndefinedPseudoStateError,
    UndefinedWeakValueError,
)
from .pdo import (
    MultiTimePdo,
    PseudoState,
    WitnessReport,
    build_gamma_coherent,
    build_gamma_fixed,
    build_gamma_incoherent,
    build_generalized_two_state,
    build_r_ideal,
    build_three_time_pdo,
    witness_compare,
)
from .thermal import EffectiveTemperature, GibbsSpec, build_thermal_gamma, effective_beta, gibbs_populations
from .tomosim import (
    ExperimentLayout,
    PointerModel,
    TomographyEstimate,
    pointer_distribution,
    run_ideal_tomography,
    run_tomography,
)
from .twostate import (
    PolarizerConfig,
    TwoState,
    abl_expectation,
    abl_probability,
    ket,
    parse_state,
    polarizer_two_state,
    projector_weak_value,
    weak_value,
)

__version__ = "0.1.0"
