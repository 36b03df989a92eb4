"""Open-system propagation: Lindblad master equation integrated with RK4.

The master equation is

    drho/dt = -i [H(t), rho]
              + sum_c rate_c (L_c rho L_c^dag - (1/2){L_c^dag L_c, rho}).

Schedules have piecewise-constant Hamiltonians, so the integrator uses
boundary-aligned fixed steps within each segment; the RK4 stages then all see
the same H and the step error is the standard O(dt^5).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvariantError
from .pulses import LAMBDA, TWO_LEVEL, PulseSchedule, schedule_propagator, segment_hamiltonian

DENSITY_HERMITIAN_TOL = 1e-10
DENSITY_TRACE_TOL = 1e-9
DENSITY_EIG_FLOOR = -1e-8


@dataclass(frozen=True)
class CollapseChannel:
    """One Lindblad channel: a collapse operator and its nonnegative rate."""

    rate: float
    operator: np.ndarray

    def __post_init__(self) -> None:
        if not math.isfinite(self.rate) or self.rate < 0:
            raise ValueError(f"channel rate must be finite and >= 0, got {self.rate!r}")
        op = np.asarray(self.operator, dtype=complex)
        if op.ndim != 2 or op.shape[0] != op.shape[1]:
            raise ValueError(f"collapse operator must be square, got shape {op.shape}")
        if not np.all(np.isfinite(op)):
            raise ValueError("collapse operator contains NaN or Inf")
        object.__setattr__(self, "operator", op)


def standard_channels(system: str, gamma1: float, gamma2: float) -> tuple[CollapseChannel, ...]:
    """Relaxation (gamma1) and dephasing (gamma2) channels for either system.

    Two-level: |0><1| at gamma1 and |1><1| at gamma2. Lambda: the excited
    state decays into |0> and |1> at gamma1/2 each, and |e><e| dephases at
    gamma2; the computational subspace itself is decoherence-free.
    """
    if system == TWO_LEVEL:
        lower = np.zeros((2, 2), dtype=complex)
        lower[0, 1] = 1.0
        proj1 = np.zeros((2, 2), dtype=complex)
        proj1[1, 1] = 1.0
        return (CollapseChannel(gamma1, lower), CollapseChannel(gamma2, proj1))
    if system == LAMBDA:
        dec0 = np.zeros((3, 3), dtype=complex)
        dec0[0, 2] = 1.0
        dec1 = np.zeros((3, 3), dtype=complex)
        dec1[1, 2] = 1.0
        proj_e = np.zeros((3, 3), dtype=complex)
        proj_e[2, 2] = 1.0
        return (
            CollapseChannel(gamma1 / 2.0, dec0),
            CollapseChannel(gamma1 / 2.0, dec1),
            CollapseChannel(gamma2, proj_e),
        )
    raise ValueError(f"unknown system {system!r}")


def check_density(rho: np.ndarray, name: str = "density matrix") -> None:
    """Hermiticity, unit trace, and positivity checks with diagnostic messages."""
    rho = np.asarray(rho)
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    if not np.isfinite(herm) or herm > DENSITY_HERMITIAN_TOL:
        raise InvariantError(
            f"{name} not Hermitian: max deviation {herm:.3e} exceeds {DENSITY_HERMITIAN_TOL:.1e}"
        )
    tr_dev = abs(float(np.trace(rho).real) - 1.0)
    if tr_dev > DENSITY_TRACE_TOL:
        raise InvariantError(
            f"{name} trace deviates from 1 by {tr_dev:.3e} (tol {DENSITY_TRACE_TOL:.1e})"
        )
    eig_min = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
    if eig_min < DENSITY_EIG_FLOOR:
        raise InvariantError(
            f"{name} has negative eigenvalue {eig_min:.3e} below floor {DENSITY_EIG_FLOOR:.1e}"
        )


def lindblad_rhs(rho: np.ndarray, ham: np.ndarray, channels=()) -> np.ndarray:
    """Right-hand side of the master equation. rho may be a (..., d, d) stack."""
    rho = np.asarray(rho, dtype=complex)
    ham = np.asarray(ham, dtype=complex)
    d = ham.shape[0]
    if rho.shape[-2:] != (d, d):
        raise ValueError(f"dimension mismatch: rho block {rho.shape[-2:]}, H {ham.shape}")
    out = -1j * (ham @ rho - rho @ ham)
    for ch in channels:
        op = ch.operator
        if op.shape != (d, d):
            raise ValueError(f"channel operator shape {op.shape} does not match H {ham.shape}")
        opd = op.conj().T
        opdop = opd @ op
        out = out + ch.rate * (op @ rho @ opd - 0.5 * (opdop @ rho + rho @ opdop))
    return out


def propagate_density(
    schedule: PulseSchedule,
    rho0: np.ndarray,
    channels=(),
    beta: float = 0.0,
    steps_per_pi: int = 2000,
) -> np.ndarray:
    """Evolve rho0 (one (d, d) matrix or a (k, d, d) stack) through the schedule.

    The density invariants are checked on the input and after every segment;
    violations raise InvariantError.
    """
    rho = np.asarray(rho0, dtype=complex).copy()
    single = rho.ndim == 2
    stack = rho[None, ...] if single else rho
    for mat in stack:
        check_density(mat, name="initial density matrix")
    for seg in schedule.segments:
        ham = segment_hamiltonian(schedule, seg, scale=1.0 + beta)
        steps = max(1, math.ceil(steps_per_pi * seg.duration / math.pi))
        dt = seg.duration / steps
        for _ in range(steps):
            k1 = lindblad_rhs(stack, ham, channels)
            k2 = lindblad_rhs(stack + 0.5 * dt * k1, ham, channels)
            k3 = lindblad_rhs(stack + 0.5 * dt * k2, ham, channels)
            k4 = lindblad_rhs(stack + dt * k3, ham, channels)
            stack = stack + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        for mat in stack:
            check_density(mat, name="density matrix after segment")
    return stack[0] if single else stack


def cardinal_states(dim: int) -> np.ndarray:
    """The six cardinal states of the computational qubit, embedded in dim dims."""
    inv = 1.0 / math.sqrt(2.0)
    pairs = [
        (1.0, 0.0),
        (0.0, 1.0),
        (inv, inv),
        (inv, -inv),
        (inv, 1j * inv),
        (inv, -1j * inv),
    ]
    states = np.zeros((6, dim), dtype=complex)
    for i, (a, b) in enumerate(pairs):
        states[i, 0] = a
        states[i, 1] = b
    return states


def open_gate_metrics(
    schedule: PulseSchedule,
    channels=(),
    beta: float = 0.0,
    steps_per_pi: int = 2000,
) -> tuple[float, float]:
    """(average fidelity, average leakage) over the six cardinal input states.

    Target states are the ideal (beta = 0, closed) propagator applied to each
    input; fidelity is <psi_t| rho(tau) |psi_t> averaged over the six inputs,
    and leakage is the average population outside the computational subspace.
    """
    dim = schedule.dim
    u0 = schedule_propagator(schedule)
    psis = cardinal_states(dim)
    targets = psis @ u0.T
    rho0 = np.einsum("ki,kj->kij", psis, psis.conj())
    rho_tau = propagate_density(schedule, rho0, channels, beta=beta, steps_per_pi=steps_per_pi)
    fid = np.einsum("ki,kij,kj->k", targets.conj(), rho_tau, targets).real
    pops = np.einsum("kii->ki", rho_tau).real
    leak = pops[:, 2:].sum(axis=1) if dim > 2 else np.zeros(len(psis))
    return float(fid.mean()), float(leak.mean())


def open_gate_fidelity(
    schedule: PulseSchedule,
    channels=(),
    beta: float = 0.0,
    steps_per_pi: int = 2000,
) -> float:
    """Average cardinal-state fidelity (see open_gate_metrics)."""
    return open_gate_metrics(schedule, channels, beta=beta, steps_per_pi=steps_per_pi)[0]
