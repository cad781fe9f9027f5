"""Variational counterdiabatic driving of a finite transverse-field Ising chain."""

__version__ = "0.1.0"

from .errors import (
    CdforgeError,
    ConfigurationError,
    ContractViolationError,
    ConvergenceError,
    DegeneracyError,
    DomainError,
    NoCrossingError,
    RankDeficiencyError,
    ResourceLimitError,
    TrackingError,
)
from .pauli import PauliString, StateVector, apply, real_pair_overlap, to_dense
from .spectral import (
    AuxMatrix,
    IsingModel,
    SpectralSnapshot,
    adiabatic_state,
    build_hamiltonian,
    diagonalize,
    eigenstate_from_snapshot,
    exact_aux,
    field_derivative,
    ground_state,
)
from .variational import (
    AnsatzSpec,
    AuxSolution,
    NormalSystem,
    OperatorBasis,
    build_system,
    enumerate_basis,
    oracle_system,
    paper_resource_count,
    residual,
    solve,
)
from .dynamics import (
    EXACT_DRIVE,
    PropagationConfig,
    QuenchProtocol,
    TrajectoryRecord,
    critical_time,
    fidelity,
    field,
    field_rate,
    propagate,
    propagate_refined,
)
from .harness import (
    ResultTable,
    load_config,
    resolve_config,
    run_kz_sweep,
    run_resources,
    run_solve_aux,
    run_state_prep,
)

__all__ = [name for name in dir() if not name.startswith("_")]
