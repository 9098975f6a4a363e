"""Microwave-driven two-qubit gate engines: pulsed AXY and continuous bichromatic."""

from .axy import (
    AXYSequence,
    ClosureCandidate,
    closure_scalar,
    g_function,
    g_sequence_end,
    gate_phase,
    normalized_phase,
    refine_closure,
    search_closure,
    solve_gate_timings,
)
from .pulsed import (
    BREATHING_REFERENCE,
    COM_REFERENCE,
    HeatingReference,
    IonPairConfig,
    PulsedGateNoise,
    PulsedGateResult,
    crosstalk_rabi,
    electrode_distance_for_gradient,
    heating_scaling,
    ideal_scaffold,
    simulate_pulsed_gate,
    thermal_occupation,
)
from .continuous import (
    ContinuousGateConfig,
    ContinuousGateNoise,
    continuous_gate_phase,
    phase_modulation,
    second_order_couplings,
    simulate_continuous_gate,
    solve_drive_for_phase,
)

__all__ = [name for name in dir() if not name.startswith("_")]
