"""Supersymmetric quantum mechanics on qubits.

Builds truncated Hamiltonians for three superpotentials, diagnoses
spontaneous supersymmetry breaking from exact spectra, and reproduces
the ground-state energies variationally with an adaptive, gradient-
screened VQE on a dense statevector simulator -- including shot-based
estimation with a simple depolarizing/readout noise model.
"""

__version__ = "0.1.0"

from .model import (
    BosonOperators,
    QubitHamiltonian,
    Supercharges,
    SuperpotentialSpec,
    build_hamiltonian,
    build_supercharges,
    commutator,
    exact_spectrum,
    interior_projector,
    make_boson_ops,
    superpotential_derivatives,
)
from .pauli import MeasurementGroup, PauliSum, decompose, group_commuting, reconstruct
from .sim import (
    Ansatz,
    Gate,
    NoiseModel,
    StateVector,
    apply_gate,
    expectation,
    init_basis_state,
    prepare_state,
    sample_expectation,
)
from .opt import OptimizerConfig, VQEResult, minimize, shift_gradient
from .avqe import (
    AVQEStep,
    AVQETrace,
    AvqeAborted,
    OperatorPool,
    avqe_run,
    choose_basis_state,
    extrapolate_ansatz,
    operator_pool,
    pool_gradients,
    truncate_ansatz,
)

__all__ = [
    "__version__",
    "BosonOperators",
    "QubitHamiltonian",
    "Supercharges",
    "SuperpotentialSpec",
    "build_hamiltonian",
    "build_supercharges",
    "commutator",
    "exact_spectrum",
    "interior_projector",
    "make_boson_ops",
    "superpotential_derivatives",
    "MeasurementGroup",
    "PauliSum",
    "decompose",
    "group_commuting",
    "reconstruct",
    "Ansatz",
    "Gate",
    "NoiseModel",
    "StateVector",
    "apply_gate",
    "expectation",
    "init_basis_state",
    "prepare_state",
    "sample_expectation",
    "OptimizerConfig",
    "VQEResult",
    "minimize",
    "shift_gradient",
    "AVQEStep",
    "AVQETrace",
    "AvqeAborted",
    "OperatorPool",
    "avqe_run",
    "choose_basis_state",
    "extrapolate_ansatz",
    "operator_pool",
    "pool_gradients",
    "truncate_ansatz",
]
