"""Geometric quantum gates as piecewise-constant pulse schedules, with
super-robust condition checks, perturbative fidelity laws, and open-system
sweeps."""

from .core import (
    TimeGrid,
    check_hermitian,
    check_unitary,
    mat_exp_hermitian,
    propagate_state,
    propagate_unitary,
)
from .errors import (
    ConfigError,
    GeorobustError,
    InvariantError,
    SerializationError,
    SolverError,
)
from .gates import (
    FAMILIES,
    NAMED_GATES,
    SR_FAMILIES,
    GateSpec,
    PhaseJumpSolution,
    assemble_schedule,
    build_dg,
    build_ngqc,
    build_nhqc,
    build_schedule,
    build_sr_ngqc,
    build_sr_nhqc,
    family_build,
    seed_spacing,
    solve_phase_jumps,
    target_unitary,
)
from .lindblad import (
    CollapseChannel,
    cardinal_states,
    check_density,
    lindblad_rhs,
    open_gate_fidelity,
    open_gate_metrics,
    propagate_density,
    standard_channels,
)
from .pulses import (
    ErrorModel,
    PulseSchedule,
    PulseSegment,
    apply_error,
    bright_dark,
    error_operator,
    hamiltonian,
    hamiltonian_2level,
    hamiltonian_3level,
    load_schedule,
    pulse_area,
    save_schedule,
    schedule_from_text,
    schedule_propagator,
    schedule_to_text,
    segment_hamiltonian,
    segment_propagator,
)
from .robustness import (
    AuxiliaryBasis,
    auxiliary_basis,
    auxiliary_frame,
    d_matrix,
    frame_anchor,
    dynamical_integrals,
    fidelity_prediction,
    gate_fidelity,
    geometric_phase,
    leakage,
    magnus_gate_approx,
    magnus_terms,
    order_fit,
    propagator_fidelity,
    quadratic_coefficient,
    src_phasors,
    src_residual,
    trace_fidelity,
)
from .sweep import (
    SweepConfig,
    SweepRow,
    beta_grid,
    check_src_report,
    delta_rows,
    deltas_to_csv,
    report_table1,
    rows_to_csv,
    run_sweep,
    sweep_beta,
    sweep_grid,
    sweep_point,
)

__version__ = "0.1.0"
