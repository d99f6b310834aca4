"""Simulated-bifurcation solvers with a track-reconstruction front end."""

from ._core import (
    DataError,
    Doublet,
    EvalCounts,
    EvalReport,
    EventBundle,
    Hit,
    IsingProblem,
    QuboBuild,
    QuboProblem,
    SaConfig,
    SbConfig,
    ShotResult,
    SolveRun,
    TraceRow,
    TrackCandidate,
    TrackingConfig,
    Triplet,
    TripletKinematics,
    TruthParticle,
    TttReport,
    assemble_qubo,
    auto_c0,
    bias_weight,
    binary_from_spin,
    brute_force_minimum,
    build_triplets,
    compute_ttt,
    compute_ttt_at,
    default_beta_range,
    evaluate,
    extract_tracks,
    generate_doublets,
    generate_synthetic_event,
    ising_energy,
    load_index_map,
    load_qubo,
    load_solve_run,
    load_trackml_event,
    pair_strength,
    qubo_energy,
    qubo_to_ising,
    save_eval_report,
    save_index_map,
    save_qubo,
    save_solve_run,
    save_trace_csv,
    save_ttt_report,
    solve_asb,
    solve_bsb,
    solve_dsb,
    solve_sa,
    spin_from_binary,
    triplet_kinematics,
    truth_doublets,
    write_trackml_event,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
