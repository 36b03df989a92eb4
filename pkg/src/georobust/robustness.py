"""Co-moving frames, the super-robust condition (SRC), and perturbative tools.

For a systematic control error H' = H + beta * V, first-order time-dependent
perturbation theory is organized around the matrix

    D[k, m] = integral_0^tau  <psi_k(t)| V(t) |psi_m(t)> dt,

where psi_k(t) are the ideally-propagated co-moving frame states. Ordinary
geometric gates only guarantee D[k, k] = 0 (parallel transport); the SRC
additionally demands the off-diagonal elements vanish, removing the error at
first order and leaving a quartic infidelity law.

Frame conventions
-----------------
Two-level ("two") schedules: with alpha(t) = schedule.theta + accumulated area
and phi the current segment phase,

    zeta_1 = (cos(alpha/2), -i sin(alpha/2) e^{-i phi}),
    zeta_2 = (-i sin(alpha/2) e^{i phi}, cos(alpha/2)).

Lambda ("lambda") schedules: alpha(t) is the accumulated area (anchor 0), and
with |b>, |d> the bright/dark states and |e> the excited state,

    mu_1 = |d>,
    mu_2 = cos(alpha/2)|b> - i sin(alpha/2) e^{+i phi}|e>,
    mu_3 = -i sin(alpha/2) e^{-i phi}|b> + cos(alpha/2)|e>.

Both frames satisfy the Schrodinger equation segment-by-segment up to a pure
gauge phase and have identically vanishing diagonal drive elements, so the
dynamical phase is erased by construction.

For resonant drives the D-matrix integrand is piecewise constant: on segment j
the only nonzero off-diagonal element is (area_j / 2) e^{i Theta_j} with a
phasor angle Theta_j that jumps by +/- the segment phase jump at each frame
pole crossing. src_residual() evaluates that closed-form phasor sum; d_matrix()
integrates the same quantity numerically from propagated states.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import TimeGrid, mat_exp_hermitian
from .errors import InvariantError
from .pulses import (
    LAMBDA,
    TWO_LEVEL,
    ErrorModel,
    PulseSchedule,
    bright_dark,
    pulse_area,
    schedule_propagator,
    segment_hamiltonian,
)

SRC_ALIGNMENT_TOL = 1e-9


def frame_anchor(schedule: PulseSchedule) -> float:
    """Initial frame angle alpha(0): stored in theta for two-level, 0 for Lambda."""
    return float(schedule.theta) if schedule.system == TWO_LEVEL else 0.0


def auxiliary_frame(schedule: PulseSchedule, t: float) -> np.ndarray:
    """Frame vectors at time t, as the columns of a unitary matrix.

    At a segment boundary the later segment's phase applies (frames are
    right-continuous; the pole-crossing makes the physical states continuous
    anyway).
    """
    return _frame_in_segment(schedule, schedule.segment_index(t), t)


@dataclass(frozen=True)
class AuxiliaryBasis:
    """Sampled frame trajectory: frames[k] is the column matrix at times[k]."""

    times: np.ndarray
    frames: np.ndarray

    def end_overlap(self) -> np.ndarray:
        """Overlap matrix frame(tau)^dag frame(0).

        For a cyclic loop this is diagonal with unit-modulus entries, up to an
        index permutation for families whose frame swaps after an odd number
        of pi arcs.
        """
        return self.frames[-1].conj().T @ self.frames[0]


def auxiliary_basis(schedule: PulseSchedule, samples_per_segment: int = 64) -> AuxiliaryBasis:
    """Sample the analytic co-moving frame across the schedule."""
    if not schedule.segments:
        raise ValueError("schedule has no segments")
    bounds = schedule.boundaries()
    times, frames = [], []
    for j in range(len(schedule.segments)):
        for t in np.linspace(bounds[j], bounds[j + 1], samples_per_segment):
            frames.append(_frame_in_segment(schedule, j, float(t)))
            times.append(float(t))
    return AuxiliaryBasis(times=np.array(times), frames=np.array(frames))


def _frame_in_segment(schedule: PulseSchedule, seg_index: int, t: float) -> np.ndarray:
    """auxiliary_frame with the segment pinned explicitly (boundary-safe)."""
    seg = schedule.segments[seg_index]
    bounds = schedule.boundaries()
    area = sum(s.area for s in schedule.segments[:seg_index])
    alpha = frame_anchor(schedule) + area + (t - bounds[seg_index]) * seg.amplitude
    half = alpha / 2.0
    c, s = math.cos(half), math.sin(half)
    ph = np.exp(1j * seg.phase)
    if schedule.system == TWO_LEVEL:
        return np.array([[c, -1j * s * ph], [-1j * s / ph, c]], dtype=complex)
    bright, dark = bright_dark(schedule.theta, schedule.phi)
    exc = np.array([0.0, 0.0, 1.0], dtype=complex)
    mu2 = c * bright - 1j * s * ph * exc
    mu3 = -1j * s / ph * bright + c * exc
    return np.column_stack([dark, mu2, mu3])


def _segment_grids(schedule: PulseSchedule, steps_per_pi: int) -> list[TimeGrid]:
    bounds = schedule.boundaries()
    grids = []
    for j, seg in enumerate(schedule.segments):
        steps = max(1, math.ceil(steps_per_pi * seg.duration / math.pi))
        grids.append(TimeGrid(float(bounds[j]), float(bounds[j + 1]), steps))
    return grids


def _ideal_trajectories(schedule: PulseSchedule, steps_per_pi: int):
    """Per-segment ideal propagator trajectories U(t, 0), boundary-aligned.

    Yields (times, traj, seg) per segment with traj[k] = U(times[k], 0); exact
    per step because H is constant inside each segment.
    """
    dim = schedule.dim
    u = np.eye(dim, dtype=complex)
    out = []
    for seg, grid in zip(schedule.segments, _segment_grids(schedule, steps_per_pi)):
        step_u = mat_exp_hermitian(segment_hamiltonian(schedule, seg), grid.step)
        traj = np.empty((grid.steps + 1, dim, dim), dtype=complex)
        traj[0] = u
        for k in range(grid.steps):
            traj[k + 1] = step_u @ traj[k]
        u = traj[-1]
        out.append((grid.times, traj, seg))
    return out


def _error_model(error: ErrorModel | None) -> ErrorModel:
    return error if error is not None else ErrorModel.global_rabi(0.0)


def d_matrix(
    schedule: PulseSchedule,
    error: ErrorModel | None = None,
    steps_per_pi: int = 2000,
    validate: bool = True,
) -> np.ndarray:
    """First-order error matrix D in the frame-state basis (full square matrix).

    error selects V (its beta is irrelevant here); the default is the global
    Rabi error V = H. With validate=True the integral is recomputed on a grid
    half as fine and the two must agree, guarding against a too-coarse grid
    when V is time-dependent.
    """
    result = _d_matrix_once(schedule, error, steps_per_pi)
    if validate and schedule.segments:
        coarse = _d_matrix_once(schedule, error, max(50, steps_per_pi // 2))
        scale = max(1.0, float(np.linalg.norm(result)))
        dev = float(np.linalg.norm(result - coarse))
        # Trapezoid error is O(h^2), so the half-grid gap is about 3x the
        # error of the fine result; 1e-5 here bounds that error near 3e-6.
        if dev > 1e-5 * scale:
            raise InvariantError(
                f"d_matrix grid not converged: |D_fine - D_coarse| = {dev:.3e} "
                f"(tolerance {1e-5 * scale:.1e}); increase steps_per_pi"
            )
    return result


def _d_matrix_once(schedule: PulseSchedule, error: ErrorModel | None, steps_per_pi: int) -> np.ndarray:
    err = _error_model(error)
    dim = schedule.dim
    if not schedule.segments:
        return np.zeros((dim, dim), dtype=complex)
    frame0 = auxiliary_frame(schedule, 0.0)
    total = np.zeros((dim, dim), dtype=complex)
    for times, traj, seg in _ideal_trajectories(schedule, steps_per_pi):
        states = traj @ frame0
        if err.kind == "global_rabi":
            v_op = segment_hamiltonian(schedule, seg)
            integrand = np.einsum("tik,ij,tjm->tkm", states.conj(), v_op, states)
        else:
            v_t = np.array([np.asarray(err.v(t), dtype=complex) for t in times])
            integrand = np.einsum("tik,tij,tjm->tkm", states.conj(), v_t, states)
        dt = times[1] - times[0]
        total += dt * (integrand.sum(axis=0) - 0.5 * (integrand[0] + integrand[-1]))
    return total


def _boundary_parities(schedule: PulseSchedule) -> np.ndarray | None:
    """Frame angle alpha in units of pi at interior boundaries, if pole-aligned."""
    areas = np.array([s.area for s in schedule.segments])
    alphas = frame_anchor(schedule) + np.cumsum(areas)[:-1]
    m = alphas / math.pi
    if np.any(np.abs(m - np.round(m)) > SRC_ALIGNMENT_TOL):
        return None
    return np.round(m).astype(int)


def src_phasors(schedule: PulseSchedule) -> np.ndarray:
    """Per-segment closed-form contributions to the SRC off-diagonal element.

    Term j equals (area_j / 2) e^{i Theta_j}. The phasor angle starts at the
    first segment's effective phase and, at a pole crossing with alpha = m pi,
    jumps by (-1)^m times the phase jump (the gauge bookkeeping of the frame).
    For Lambda schedules the effective phase is the negated segment phase,
    mirroring the two-level <-> bright/excited block correspondence.

    Raises ValueError when an interior boundary is not pole-aligned (no closed
    form there; use d_matrix instead).
    """
    if not schedule.segments:
        return np.zeros(0, dtype=complex)
    parities = _boundary_parities(schedule)
    if parities is None:
        raise ValueError("phase jumps are not aligned with frame poles")
    sign = 1.0 if schedule.system == TWO_LEVEL else -1.0
    eff = sign * np.array([s.phase for s in schedule.segments])
    theta_ph = np.empty(len(eff))
    theta_ph[0] = eff[0]
    for j in range(1, len(eff)):
        flip = -1.0 if parities[j - 1] % 2 else 1.0
        theta_ph[j] = theta_ph[j - 1] + flip * (eff[j] - eff[j - 1])
    areas = np.array([s.area for s in schedule.segments])
    return 0.5 * areas * np.exp(1j * theta_ph)


def src_residual(schedule: PulseSchedule) -> complex:
    """The SRC off-diagonal element from the closed-form phasor sum.

    Equals d_matrix()[0, 1] for two-level schedules and d_matrix()[1, 2] for
    Lambda schedules under the global Rabi error. Falls back to the numerical
    integral (with a warning) when the closed form does not apply.
    """
    try:
        return complex(src_phasors(schedule).sum())
    except ValueError:
        warnings.warn(
            "phase jumps off the frame poles: falling back to numerical d_matrix",
            stacklevel=2,
        )
        d_op = d_matrix(schedule)
        return complex(d_op[0, 1] if schedule.system == TWO_LEVEL else d_op[1, 2])


def dynamical_integrals(schedule: PulseSchedule, samples_per_segment: int = 64) -> np.ndarray:
    """Integrals of the drive's frame-diagonal elements, one per frame state.

    These vanish identically for resonant drives (parallel transport); the
    numerical quadrature returns roundoff-level values and exists as a check.
    """
    dim = schedule.dim
    totals = np.zeros(dim, dtype=complex)
    bounds = schedule.boundaries()
    for j, seg in enumerate(schedule.segments):
        ts = np.linspace(bounds[j], bounds[j + 1], samples_per_segment)
        vals = np.empty((len(ts), dim), dtype=complex)
        ham = segment_hamiltonian(schedule, seg)
        for i, t in enumerate(ts):
            frame = _frame_in_segment(schedule, j, t)
            vals[i] = np.einsum("ik,ij,jk->k", frame.conj(), ham, frame)
        dt = ts[1] - ts[0] if len(ts) > 1 else seg.duration
        totals += dt * (vals.sum(axis=0) - 0.5 * (vals[0] + vals[-1]))
    return totals


def magnus_terms(
    schedule: PulseSchedule,
    error: ErrorModel | None = None,
    steps_per_pi: int = 2000,
) -> tuple[np.ndarray, np.ndarray]:
    """First- and second-order error operators (D_op, G_op) in the lab basis.

    With V_H(t) = U^dag(t) V(t) U(t):

        D_op = integral V_H dt,
        G_op = integral [V_H(t), D(t)] dt + D_op^2,   D(t) = cumulative integral.

    The perturbed propagator is then
    U'(tau) = U(tau) (1 - i beta D_op - (beta^2/2) G_op) + O(beta^3).
    """
    err = _error_model(error)
    dim = schedule.dim
    d_cum = np.zeros((dim, dim), dtype=complex)
    g_comm = np.zeros((dim, dim), dtype=complex)
    for times, traj, seg in _ideal_trajectories(schedule, steps_per_pi):
        if err.kind == "global_rabi":
            v_op = segment_hamiltonian(schedule, seg)
            v_h = np.einsum("tji,jk,tkm->tim", traj.conj(), v_op, traj)
        else:
            v_t = np.array([np.asarray(err.v(t), dtype=complex) for t in times])
            v_h = np.einsum("tji,tjk,tkm->tim", traj.conj(), v_t, traj)
        dt = times[1] - times[0]
        incr = 0.5 * dt * (v_h[1:] + v_h[:-1])
        d_t = np.concatenate([[d_cum], d_cum + np.cumsum(incr, axis=0)])
        comm = v_h @ d_t - d_t @ v_h
        g_comm += dt * (comm.sum(axis=0) - 0.5 * (comm[0] + comm[-1]))
        d_cum = d_t[-1]
    return d_cum, g_comm + d_cum @ d_cum


def magnus_gate_approx(
    schedule: PulseSchedule,
    error: ErrorModel,
    steps_per_pi: int = 2000,
) -> np.ndarray:
    """Second-order perturbative approximation to the perturbed propagator."""
    d_op, g_op = magnus_terms(schedule, error, steps_per_pi)
    u0 = schedule_propagator(schedule)
    beta = error.beta
    eye = np.eye(schedule.dim, dtype=complex)
    return u0 @ (eye - 1j * beta * d_op - 0.5 * beta**2 * g_op)


def gate_fidelity(u_actual: np.ndarray, u_target: np.ndarray, subspace_dim: int | None = None) -> float:
    """|Tr(T^dag A)| / M over the leading M-dimensional block.

    M defaults to the target's dimension; both matrices are truncated to their
    leading MxM block, so a 2x2 target against a 3x3 propagator compares the
    computational block only (leakage shows up as lost fidelity).
    """
    u_actual = np.asarray(u_actual)
    u_target = np.asarray(u_target)
    m = subspace_dim if subspace_dim is not None else u_target.shape[0]
    if m > u_actual.shape[0] or m > u_target.shape[0]:
        raise ValueError(
            f"subspace_dim {m} exceeds matrix dimensions "
            f"{u_actual.shape[0]} / {u_target.shape[0]}"
        )
    block_a = u_actual[:m, :m]
    block_t = u_target[:m, :m]
    return float(abs(np.trace(block_t.conj().T @ block_a)) / m)


def trace_fidelity(u_actual: np.ndarray, u_ideal: np.ndarray) -> float:
    """Full-dimension trace fidelity |Tr(U_ideal^dag U_actual)| / d."""
    u_actual = np.asarray(u_actual)
    d = u_actual.shape[0]
    return float(abs(np.trace(np.asarray(u_ideal).conj().T @ u_actual)) / d)


def propagator_fidelity(schedule: PulseSchedule, beta: float) -> float:
    """Trace fidelity of the beta-perturbed schedule against its own ideal."""
    u0 = schedule_propagator(schedule)
    ub = schedule_propagator(schedule, beta)
    return trace_fidelity(ub, u0)


def leakage(schedule: PulseSchedule, beta: float = 0.0) -> float:
    """Mean population leaked out of the computational subspace (0 for two-level)."""
    if schedule.system == TWO_LEVEL:
        return 0.0
    u = schedule_propagator(schedule, beta)
    return float(0.5 * (abs(u[2, 0]) ** 2 + abs(u[2, 1]) ** 2))


def fidelity_prediction(d_op: np.ndarray, beta: float, subspace_dim: int | None = None) -> float:
    """Quadratic fidelity estimate 1 - (beta^2 / 2M) sum_{k<M, all m} |D[k,m]|^2.

    d_op is a d_matrix() result (frame-state indices). With subspace_dim=None
    the sum runs over the full matrix, matching the trace fidelity over the
    full dimension; subspace_dim=M restricts the rows to the logical frame
    states.
    """
    d_op = np.asarray(d_op)
    m = subspace_dim if subspace_dim is not None else d_op.shape[0]
    if m > d_op.shape[0]:
        raise ValueError(f"subspace_dim {m} exceeds D-matrix dimension {d_op.shape[0]}")
    weight = float(np.sum(np.abs(d_op[:m, :]) ** 2))
    return 1.0 - 0.5 * beta**2 * weight / m


def geometric_phase(schedule: PulseSchedule) -> float:
    """Geometric phase of the schedule's cyclic frame loop, in (-pi, pi].

    Each completed 2*pi area loop contributes pi (frame antiperiodicity), and
    each pole-aligned phase jump contributes the jump weighted by
    (1 - cos(alpha))/2 for two-level frames or (cos(alpha) - 1)/2 for Lambda
    frames, i.e. +/- the jump at odd poles and nothing at even poles. For a
    two-level schedule the returned value is the gate's rotation angle (twice
    the per-state loop phase); for a Lambda schedule it is the bright-track
    loop phase, which is the holonomic rotation angle directly.

    Raises ValueError for non-cyclic schedules (total area not a multiple of
    2*pi) and for phase jumps away from the frame poles.
    """
    area = pulse_area(schedule)
    n_loops = area / (2.0 * math.pi)
    if abs(n_loops - round(n_loops)) > 1e-9:
        raise ValueError(
            f"schedule is not cyclic: total area {area!r} is not a multiple of 2*pi"
        )
    n_loops = int(round(n_loops))
    if not schedule.segments:
        return 0.0
    parities = _boundary_parities(schedule)
    if parities is None:
        raise ValueError("phase jumps are not aligned with frame poles")
    phases = [s.phase for s in schedule.segments]
    jump_sum = 0.0
    for j in range(1, len(phases)):
        if parities[j - 1] % 2:
            jump_sum += phases[j] - phases[j - 1]
    if schedule.system == TWO_LEVEL:
        value = 2.0 * (math.pi * n_loops + jump_sum)
    else:
        value = math.pi * n_loops - jump_sum
    wrapped = math.fmod(value, 2.0 * math.pi)
    if wrapped > math.pi:
        wrapped -= 2.0 * math.pi
    # map the branch cut to +pi, with a tolerance so roundoff-level values just
    # below -pi do not flip the sign of a phase that is exactly pi
    if wrapped <= -math.pi + 1e-9:
        wrapped += 2.0 * math.pi
    return wrapped


def order_fit(betas: np.ndarray, infidelities: np.ndarray) -> float:
    """Log-log slope of infidelity vs |beta| (2 for quadratic, 4 for quartic laws)."""
    betas = np.asarray(betas, dtype=float)
    infid = np.asarray(infidelities, dtype=float)
    mask = (betas > 0) & (infid > 0)
    if mask.sum() < 2:
        raise ValueError("need at least two positive (beta, infidelity) points")
    return float(np.polyfit(np.log(betas[mask]), np.log(infid[mask]), 1)[0])


def quadratic_coefficient(betas: np.ndarray, infidelities: np.ndarray) -> float:
    """Least-squares coefficient c in infidelity = c * beta^2 (zero intercept)."""
    betas = np.asarray(betas, dtype=float)
    infid = np.asarray(infidelities, dtype=float)
    mask = betas != 0
    denom = float(np.sum(betas[mask] ** 4))
    if denom == 0.0:
        raise ValueError("need nonzero beta values")
    return float(np.sum(infid[mask] * betas[mask] ** 2) / denom)
