"""Collision chains of qubits: exact simulation of a system qubit hit by a
stream of prepared molecules, satellite-memory embeddings of overlapping
collision layouts, stepwise divisibility checks of the reduced dynamics,
and correlation measures of the stationary memory."""

__version__ = "0.1.0"

from .linalg import (
    DensityMatrix,
    PureState,
    basis_state,
    computational_basis,
    eig_hermitian,
    partial_trace,
    partial_transpose,
    tensor,
    trace_norm_distance,
    von_neumann_entropy,
)
from .gates import (
    UnitaryGate,
    embed,
    molecule_state,
    prepare_gate,
    sqrt_xor_gate,
    swap_gate,
    xor_gate,
)
from .channels import (
    ChoiMatrix,
    DivisibilityStep,
    KrausSet,
    LinearMap,
    apply_kraus,
    apply_map,
    apply_selective,
    choi,
    compose,
    divisibility_scan,
    divisibility_step,
    is_cp,
    kraus_from_collision,
    map_from_kraus,
    map_tomography,
    min_choi_eigenvalue,
)
from .chains import (
    ChainModel,
    ChainState,
    CollisionEvent,
    CollisionSchedule,
    advanced_overlap_schedule,
    build_embedding,
    chain_schedule,
    custom_chain,
    delta,
    embedded_step,
    initial_window_state,
    markov_xor,
    markov_xor_fixed_point,
    markov_xor_kraus,
    markov_xor_step,
    overlap_schedule,
    relax_to_stationary,
    repeated_xor,
    run_window,
    satellite_count,
    schedule_from_records,
    simulate_embedding,
    single_molecule_schedule,
    sliding_window_step,
    sqrt_xor,
    stationary_overlap,
    stationary_state,
    system_maps,
    window_width,
)
from .measures import (
    NMReport,
    ProjectivePair,
    classical_correlation,
    discord,
    mutual_information,
    nm_report,
)
from .trajectories import (
    EnsembleStats,
    TrajectoryRecord,
    UnsupportedScheduleError,
    branch_average,
    ensemble_stats,
    enumerate_branches,
    sample_ensemble,
    sample_trajectory,
)

__all__ = [name for name in dir() if not name.startswith("_")]
