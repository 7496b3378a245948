"""Rotational excitation of diatomics by chiral trains of laser pulses.

Simulation library and CLI for polarization-rotated pulse trains driving
rigid-rotor nitrogen and spin-split oxygen: population and directionality
maps over the train period and polarization step, interference-line
analysis, and isotopologue / nuclear-spin-isomer selectivity.
"""

__version__ = "0.1.0"

from .angmom import (
    HalfInt,
    cos2beta_matrix_caseb,
    cos2beta_matrix_linear,
    wigner_3j,
    wigner_6j,
)
from .interference import first_order_transition_prob, phi_sum, resonance_lines
from .molecule import (
    MoleculeSpec,
    PRESETS,
    energy_caseb,
    energy_linear,
    excitation_period,
    get_preset,
    revival_time,
    thermal_weights,
)
from .observables import (
    absorbed_energy,
    build_report,
    directionality,
    jz_expect,
    population,
)
from .propagator import (
    CaseBState,
    RotorState,
    TruncationError,
    free_evolve,
    initial_state,
    kick_ode,
    kick_sudden,
    run_train,
)
from .pulsetrain import (
    PulseSpec,
    TrainSpec,
    bessel_train,
    equal_train,
    strength_from_intensity,
)
from .sweep import RunConfig, SweepResult, run_scan, run_single, run_sweep

__all__ = [
    "__version__",
    "HalfInt",
    "MoleculeSpec",
    "PRESETS",
    "PulseSpec",
    "TrainSpec",
    "RotorState",
    "CaseBState",
    "RunConfig",
    "SweepResult",
    "TruncationError",
    "wigner_3j",
    "wigner_6j",
    "cos2beta_matrix_linear",
    "cos2beta_matrix_caseb",
    "energy_linear",
    "energy_caseb",
    "revival_time",
    "excitation_period",
    "thermal_weights",
    "get_preset",
    "equal_train",
    "bessel_train",
    "strength_from_intensity",
    "initial_state",
    "kick_sudden",
    "kick_ode",
    "free_evolve",
    "run_train",
    "population",
    "directionality",
    "jz_expect",
    "absorbed_energy",
    "build_report",
    "phi_sum",
    "resonance_lines",
    "first_order_transition_prob",
    "run_sweep",
    "run_scan",
    "run_single",
]
