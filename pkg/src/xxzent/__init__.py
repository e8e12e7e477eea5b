"""Nearest-neighbour concurrence of the antiferromagnetic XXZ ring.

Bethe-ansatz solver for finite and infinite chains, an exact-diagonalization
oracle, and the sweeps/fits that tie concurrence to the anisotropy and the
correlation length.
"""

from .anisotropy import Anisotropy, Regime, classify_anisotropy
from .bethe import (
    NonConvergence,
    QuantumNumberSet,
    RapiditySolution,
    SolverOptions,
    bae_residual,
    ground_energy,
    ground_state_quantum_numbers,
    scattering_phase,
    solve_ground_state,
    sweep_continuation,
)
from .observables import (
    C0,
    C1,
    ObservablePoint,
    concurrence_scaling_forms,
    concurrence_xxz,
    correlation_length,
    gzz,
    q_map,
)
from .thermo import thermo_energy

__all__ = [
    "Anisotropy", "Regime", "classify_anisotropy",
    "NonConvergence", "QuantumNumberSet", "RapiditySolution", "SolverOptions",
    "bae_residual", "ground_energy", "ground_state_quantum_numbers", "scattering_phase",
    "solve_ground_state", "sweep_continuation",
    "C0", "C1", "ObservablePoint", "concurrence_scaling_forms", "concurrence_xxz",
    "correlation_length", "gzz", "q_map", "thermo_energy",
]
