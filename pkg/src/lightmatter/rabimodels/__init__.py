"""Generalized qubit-boson models: Stark-selective resonances and beyond-LD physics."""

from .rabistark import (
    KPhotonResonance,
    RabiStarkParams,
    dressed_energies,
    excited_population_after,
    five_photon_crude_frequency,
    five_photon_scan,
    k_photon_resonance,
    one_photon_resonances,
    quadratic_peak,
    rabi_coupling,
    rabi_stark_hamiltonian,
    second_order_shifts,
)
from .nonlinear import (
    FockPumpResult,
    NQRMParams,
    anti_jc_hamiltonian,
    barrier_leakage,
    f1_nonlinear,
    f1_operator,
    f1_zero,
    fock_state_pump,
    jc_hamiltonian,
    linear_qrm_hamiltonian,
    nqrm_hamiltonian,
    sigma_z_trace,
    truncated_thermal,
)
from .ionmap import (
    IonDriveConfig,
    dressed_basis,
    dressed_model_hamiltonian,
    dressed_state,
    drive_for_model,
    ion_to_rabistark,
    matched_blue_rabi,
    simulate_ion_vs_model,
)

__all__ = [name for name in dir() if not name.startswith("_")]
