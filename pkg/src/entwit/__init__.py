"""Entanglement detection from nonequilibrium work statistics on spin chains.

The package compares relative-entropy distances between a reference entangled
state and candidate thermal states; because the relevant distances reduce to
free-energy differences and exponential work averages, the whole test can be
phrased in quantities a two-point-measurement experiment produces.
"""

from .errors import ConfigError, EntwitError, NumericalCheckError
from .open_system import (
    CompositeSystem,
    PartitionSplit,
    composite_from_json,
    composite_to_json,
    decoupled,
    effective_hamiltonian,
    effective_spec,
    full_hamiltonian,
    log_bath_partition,
    open_trotter_evolution,
    open_witness,
    reduced_state,
    split_chain,
    subsystem_hamiltonian_at,
    subsystem_partition,
)
from .operators import (
    DensityMatrix,
    HermitianOperator,
    QubitRegister,
    SpectralDecomposition,
    UnitaryOperator,
    density_from_json,
    dicke_state,
    embed_operator,
    embed_pauli,
    evolution_operator,
    hermitian_from_json,
    hermitian_function,
    matrix_from_json,
    matrix_to_json,
    operator_to_json,
    partial_trace,
    pure_state,
    spectral_decompose,
    tensor_product,
    unitary_from_json,
)
from .spin_models import (
    DMParams,
    DrivingSchedule,
    XXZParams,
    build_dm_term,
    build_xxz,
    hamiltonian_at,
    params_at,
    schedule_from_config,
    total_sz,
    xxz_params_from_config,
)
from .thermo import (
    ThermalSpec,
    delta_beta_f,
    gibbs_relative_entropy,
    relative_entropy,
    thermal_state,
)
from .witness import (
    DetectionProtocol,
    GridAxis,
    SweepGrid,
    SweepReference,
    WitnessReport,
    build_css,
    build_sigma_prime_7,
    build_w_state,
    css_thermal_params_3,
    detection_protocol,
    sigma_prime_thermal_params_7,
    state_checksum,
    sweep_detection,
    sweep_metadata,
    sweep_reference,
    symmetric_state,
    witness_evaluate,
    write_sweep_csv,
)
from .work_stats import (
    EstimatorSummary,
    TrajectoryBatch,
    TrajectorySample,
    TransitionMatrix,
    WorkDistribution,
    exact_evolution,
    jarzynski_average,
    log_jarzynski_average,
    log_tasaki_average,
    relative_entropy_via_work,
    sample_tpm,
    tasaki_average,
    transition_matrix,
    trotter_evolution,
    work_distribution,
)

__version__ = "0.1.0"

__all__ = [
    "CompositeSystem",
    "ConfigError",
    "DMParams",
    "DensityMatrix",
    "DetectionProtocol",
    "DrivingSchedule",
    "EntwitError",
    "EstimatorSummary",
    "GridAxis",
    "HermitianOperator",
    "NumericalCheckError",
    "PartitionSplit",
    "QubitRegister",
    "SpectralDecomposition",
    "SweepGrid",
    "SweepReference",
    "ThermalSpec",
    "TrajectoryBatch",
    "TrajectorySample",
    "TransitionMatrix",
    "UnitaryOperator",
    "WitnessReport",
    "WorkDistribution",
    "XXZParams",
    "build_css",
    "build_dm_term",
    "build_sigma_prime_7",
    "build_w_state",
    "build_xxz",
    "composite_from_json",
    "composite_to_json",
    "css_thermal_params_3",
    "decoupled",
    "delta_beta_f",
    "density_from_json",
    "detection_protocol",
    "dicke_state",
    "effective_hamiltonian",
    "effective_spec",
    "embed_operator",
    "embed_pauli",
    "evolution_operator",
    "exact_evolution",
    "full_hamiltonian",
    "gibbs_relative_entropy",
    "hamiltonian_at",
    "hermitian_from_json",
    "hermitian_function",
    "jarzynski_average",
    "log_bath_partition",
    "log_jarzynski_average",
    "log_tasaki_average",
    "matrix_from_json",
    "matrix_to_json",
    "open_trotter_evolution",
    "open_witness",
    "operator_to_json",
    "params_at",
    "partial_trace",
    "pure_state",
    "reduced_state",
    "relative_entropy",
    "relative_entropy_via_work",
    "sample_tpm",
    "schedule_from_config",
    "sigma_prime_thermal_params_7",
    "spectral_decompose",
    "split_chain",
    "state_checksum",
    "subsystem_hamiltonian_at",
    "subsystem_partition",
    "sweep_detection",
    "sweep_metadata",
    "sweep_reference",
    "symmetric_state",
    "tasaki_average",
    "tensor_product",
    "thermal_state",
    "total_sz",
    "transition_matrix",
    "trotter_evolution",
    "unitary_from_json",
    "witness_evaluate",
    "work_distribution",
    "write_sweep_csv",
    "xxz_params_from_config",
]
