"""Dark-state polariton quantum memory: simulation and verification toolkit.

Three-mode bosonic model (probe photon, excited spin wave, metastable spin
wave) with exact sector arithmetic, an exact finite-N collective-spin engine,
adiabatic write/read dynamics, and a self-check suite.
"""

from .dynamics import (
    ProbeDensityMatrix,
    RetrieveResult,
    StoreResult,
    SweepProfile,
    Trajectory,
    TransferResult,
    adiabaticity,
    coupling_closed_form,
    dark_transfer,
    default_dt,
    density_fidelity,
    evolve,
    nonadiabatic_coupling,
    read_sweep,
    retrieve,
    store,
    theta_dot,
    write_sweep,
)
from .errors import (
    BasisMismatch,
    ConfigError,
    CutoffTooSmall,
    DimensionOverflow,
    EitsimError,
    EmptySector,
    NotHermitian,
    ProfileNotClosing,
    StepTooLarge,
)
from .exact import (
    ExactBasis,
    ExactOperators,
    bosonic_commutator_defect,
    bosonic_defect,
    build_exact,
    build_exact_hamiltonian,
    commutator_defect,
    exact_sector_basis,
)
from .fock import (
    FockBasis,
    OperatorMatrix,
    StateVector,
    apply,
    basis_state,
    eigendecompose,
    enumerate_basis,
    inner,
    norm,
)
from .model import (
    MODE_A,
    MODE_C,
    MODE_PHOTON,
    ModelParams,
    SpectralData,
    build_hamiltonian,
    dark_state,
    dressed_energy,
    dressed_state,
    mixing_angle,
    sector_energies,
    spectral_data,
)
from .verify import CheckResult, run_all

__version__ = "0.1.0"

__all__ = [
    "BasisMismatch",
    "CheckResult",
    "ConfigError",
    "CutoffTooSmall",
    "DimensionOverflow",
    "EitsimError",
    "EmptySector",
    "ExactBasis",
    "ExactOperators",
    "FockBasis",
    "MODE_A",
    "MODE_C",
    "MODE_PHOTON",
    "ModelParams",
    "NotHermitian",
    "OperatorMatrix",
    "ProbeDensityMatrix",
    "ProfileNotClosing",
    "RetrieveResult",
    "SpectralData",
    "StateVector",
    "StepTooLarge",
    "StoreResult",
    "SweepProfile",
    "Trajectory",
    "TransferResult",
    "adiabaticity",
    "apply",
    "basis_state",
    "bosonic_commutator_defect",
    "bosonic_defect",
    "build_exact",
    "build_exact_hamiltonian",
    "build_hamiltonian",
    "commutator_defect",
    "coupling_closed_form",
    "dark_state",
    "dark_transfer",
    "default_dt",
    "density_fidelity",
    "dressed_energy",
    "dressed_state",
    "eigendecompose",
    "enumerate_basis",
    "evolve",
    "exact_sector_basis",
    "inner",
    "mixing_angle",
    "nonadiabatic_coupling",
    "norm",
    "read_sweep",
    "retrieve",
    "run_all",
    "sector_energies",
    "spectral_data",
    "store",
    "theta_dot",
    "write_sweep",
]
