"""Thermofield doubles as ground states of doubled fermionic Hamiltonians,
and their entanglement-forged variational preparation."""

from .doubled import (
    bogoliubov_factors,
    build_family_variant,
    build_h_total,
    coupling_weights,
    exact_tfd,
    state_overlap,
)
from .errors import ContractViolation, ConvergenceError, HermiticityError, ResourceLimitError
from .fock import (
    FermionOperator,
    FermionTerm,
    FockState,
    PauliString,
    SparseOperator,
    apply_fermion_term,
    build_sparse,
    embed_doubled,
    fermion_term,
    jordan_wigner,
)
from .forging import (
    ForgingProblem,
    apply_ansatz,
    assemble_forged_state,
    build_layout,
    decompose_lr,
    energy_estimators,
    forged_cost,
    forged_expectation,
    partition_commuting,
    schmidt_weights,
)
from .models import (
    HubbardParams,
    free_frequencies,
    hubbard_momentum,
    hubbard_real,
    mean_field_energy,
    mean_field_frequencies,
)
from .optimize import OptimizerConfig, optimize
from .solver import eig_full, ground_state

__version__ = "0.1.0"

__all__ = [
    "ContractViolation",
    "OptimizerConfig",
    "eig_full",
    "ground_state",
    "optimize",
    "ConvergenceError",
    "FermionOperator",
    "FermionTerm",
    "FockState",
    "ForgingProblem",
    "HermiticityError",
    "HubbardParams",
    "PauliString",
    "ResourceLimitError",
    "SparseOperator",
    "apply_ansatz",
    "apply_fermion_term",
    "assemble_forged_state",
    "bogoliubov_factors",
    "build_family_variant",
    "build_h_total",
    "build_layout",
    "build_sparse",
    "coupling_weights",
    "decompose_lr",
    "embed_doubled",
    "energy_estimators",
    "exact_tfd",
    "fermion_term",
    "forged_cost",
    "forged_expectation",
    "free_frequencies",
    "hubbard_momentum",
    "hubbard_real",
    "jordan_wigner",
    "mean_field_energy",
    "mean_field_frequencies",
    "partition_commuting",
    "schmidt_weights",
    "state_overlap",
]
