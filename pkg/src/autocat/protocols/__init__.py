"""Measurement protocols run end-to-end on simulated models."""

from .cnot import (
    CnotCoupling,
    CnotResult,
    cnot_coupling,
    cnot_gate_time,
    cnot_sequence,
)
from .fits import (
    FitResult,
    fit_decaying_sinusoid,
    fit_exponential,
    ramsey_signal,
)
from .lifetimes import BiasScan, bias_preservation_scan, bitflip_time, phaseflip_rate
from .rates import (
    TransmonPopulationTable,
    buffer_thermal_occupation,
    detuned_photon_number,
    ideal_z_rates,
    semiclassical_buffer,
    squeezed_thermal_occupation,
    stabilization_threshold,
    transmon_bitflip_bound,
)
from .tomography import (
    MixedCatModel,
    decay_wigner_maps,
    extract_kappa2,
    fit_initial_cat,
    kappa1_from_fock_decay,
)
from .zgate import (
    ProcessZ,
    ZRotationResult,
    gate_fidelity_pi,
    gate_fidelity_pi_half,
    preparation_budget,
    process_matrix_z,
    z_rotation,
)

__all__ = [
    "FitResult",
    "ramsey_signal",
    "fit_exponential",
    "fit_decaying_sinusoid",
    "MixedCatModel",
    "fit_initial_cat",
    "decay_wigner_maps",
    "extract_kappa2",
    "kappa1_from_fock_decay",
    "bitflip_time",
    "phaseflip_rate",
    "bias_preservation_scan",
    "BiasScan",
    "ideal_z_rates",
    "semiclassical_buffer",
    "detuned_photon_number",
    "stabilization_threshold",
    "buffer_thermal_occupation",
    "squeezed_thermal_occupation",
    "TransmonPopulationTable",
    "transmon_bitflip_bound",
    "ZRotationResult",
    "z_rotation",
    "gate_fidelity_pi",
    "gate_fidelity_pi_half",
    "preparation_budget",
    "ProcessZ",
    "process_matrix_z",
    "CnotCoupling",
    "cnot_coupling",
    "cnot_gate_time",
    "CnotResult",
    "cnot_sequence",
]
