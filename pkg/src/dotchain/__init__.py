"""Exciton transport and entanglement distribution in quantum-dot chains.

Energies are in meV and times in ps throughout, with ``HBAR`` in meV ps.
"""

from .errors import (
    ArmMismatch,
    ConfigError,
    DimensionMismatch,
    DimensionOverflow,
    DotChainError,
    InvalidDensityMatrix,
    NegativeRate,
    NoMinimumFound,
    NoResonanceFound,
    NonHermitianInput,
    NormDriftExceeded,
    NumericalError,
    OutOfRange,
    SectorViolation,
    ValidationError,
)
from .model import HBAR, BasisIndex, ChainSpec, DotSpec, Sector, StateVector, basis_state, build_basis
from .hamiltonian import BlockSpec, DriveSpec, apply_block, chain_hamiltonian, drive_hamiltonian
from .evolve import (
    Trajectory,
    evolve_decaying,
    evolve_static,
    first_minimum,
    first_resonance,
    propagate_decaying,
    propagate_driven,
    propagate_static,
)
from .gates import BellPrepSpec, bell_prepare_pulsed, cnot, hadamard, controlled_phase, swap_in_sequence
from .protocol import (
    ArmSpec,
    DistributionReport,
    arm_transfer,
    bell_fidelity,
    concurrence,
    fidelity_budget,
    run_distribution,
)

__version__ = "0.1.0"
