"""Dephasing STIRAP in tripod systems: master equation, effective dark-state
two-level model and closed-form analytics, cross-validated against each other."""

__version__ = "0.1.0"

from .pulses import DephasingMatrix, MixingAngles, Ordering, PulseConfig
from .tripod import TargetState, adiabatic_frame, geometric_phase, hamiltonian, target_state

__all__ = [
    "DephasingMatrix",
    "MixingAngles",
    "Ordering",
    "PulseConfig",
    "TargetState",
    "adiabatic_frame",
    "geometric_phase",
    "hamiltonian",
    "target_state",
    "__version__",
]
