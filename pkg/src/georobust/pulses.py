"""Piecewise-constant pulse schedules, drive Hamiltonians, and error models.

Units: the reference Rabi amplitude is 1, times are in units of its inverse,
hbar = 1. Segment amplitudes are in units of the reference amplitude.

Two systems are supported:

* ``"two"``: a resonant two-level drive,
  H = (amp/2) * (e^{i phase}|0><1| + e^{-i phase}|1><0|).
  ``theta`` stores the co-moving frame's initial polar angle alpha(0); ``phi``
  is unused and kept at 0 by convention.
* ``"lambda"``: a three-level Lambda system with basis (|0>, |1>, |e>), driven
  on the bright state |b> = sin(theta/2) e^{i phi}|0> + cos(theta/2)|1>,
  H = (amp/2) * (e^{-i phase}|b><e| + h.c.).
  The dark state |d> = cos(theta/2) e^{i phi}|0> - sin(theta/2)|1> is
  annihilated by H for every segment.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import SerializationError

TWO_LEVEL = "two"
LAMBDA = "lambda"
SYSTEMS = (TWO_LEVEL, LAMBDA)

BETA_HARD_LIMIT = 0.5
BETA_WARN_LIMIT = 0.1


@dataclass(frozen=True)
class PulseSegment:
    """One constant-drive interval: duration > 0, amplitude >= 0, any phase."""

    duration: float
    amplitude: float
    phase: float

    def __post_init__(self) -> None:
        for name in ("duration", "amplitude", "phase"):
            val = getattr(self, name)
            if not math.isfinite(val):
                raise ValueError(f"segment {name} must be finite, got {val!r}")
        if self.duration <= 0:
            raise ValueError(f"segment duration must be positive, got {self.duration!r}")
        if self.amplitude < 0:
            raise ValueError(f"segment amplitude must be >= 0, got {self.amplitude!r}")

    @property
    def area(self) -> float:
        return self.duration * self.amplitude


@dataclass(frozen=True)
class PulseSchedule:
    """An ordered tuple of segments plus frame parameters (see module docstring)."""

    system: str
    segments: tuple[PulseSegment, ...]
    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self) -> None:
        if self.system not in SYSTEMS:
            raise ValueError(f"unknown system {self.system!r}, expected one of {SYSTEMS}")
        object.__setattr__(self, "segments", tuple(self.segments))
        for seg in self.segments:
            if not isinstance(seg, PulseSegment):
                raise TypeError(f"segments must be PulseSegment, got {type(seg).__name__}")
        for name in ("theta", "phi"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def dim(self) -> int:
        return 2 if self.system == TWO_LEVEL else 3

    @property
    def duration(self) -> float:
        return float(sum(s.duration for s in self.segments))

    def boundaries(self) -> np.ndarray:
        """Cumulative segment boundary times, starting at 0.0."""
        return np.concatenate([[0.0], np.cumsum([s.duration for s in self.segments])])

    def segment_index(self, t: float) -> int:
        """Index of the segment containing time t (boundaries belong to the later one)."""
        if not self.segments:
            raise ValueError("schedule has no segments")
        bounds = self.boundaries()
        if t < -1e-12 or t > bounds[-1] + 1e-12:
            raise ValueError(f"t={t!r} lies outside the schedule [0, {bounds[-1]!r}]")
        idx = int(np.searchsorted(bounds, min(max(t, 0.0), bounds[-1]), side="right")) - 1
        return min(idx, len(self.segments) - 1)

    def area_at(self, t: float) -> float:
        """Accumulated pulse area between 0 and t."""
        idx = self.segment_index(t)
        bounds = self.boundaries()
        done = sum(s.area for s in self.segments[:idx])
        return float(done + (t - bounds[idx]) * self.segments[idx].amplitude)


def pulse_area(schedule: PulseSchedule) -> float:
    """Total integrated Rabi area of the schedule; 0.0 for an empty schedule."""
    return float(sum(s.area for s in schedule.segments))


def bright_dark(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """Bright and dark combinations of |0>, |1> as length-3 vectors (last entry 0)."""
    half = theta / 2.0
    bright = np.array([math.sin(half) * np.exp(1j * phi), math.cos(half), 0.0], dtype=complex)
    dark = np.array([math.cos(half) * np.exp(1j * phi), -math.sin(half), 0.0], dtype=complex)
    return bright, dark


def segment_hamiltonian(schedule: PulseSchedule, seg: PulseSegment, scale: float = 1.0) -> np.ndarray:
    """Hamiltonian of one segment, with the amplitude multiplied by `scale`."""
    if schedule.system == TWO_LEVEL:
        off = 0.5 * scale * seg.amplitude * np.exp(1j * seg.phase)
        return np.array([[0.0, off], [np.conj(off), 0.0]], dtype=complex)
    bright, _ = bright_dark(schedule.theta, schedule.phi)
    exc = np.array([0.0, 0.0, 1.0], dtype=complex)
    ham = 0.5 * scale * seg.amplitude * np.exp(-1j * seg.phase) * np.outer(bright, exc.conj())
    return ham + ham.conj().T


def hamiltonian_2level(schedule: PulseSchedule, t: float) -> np.ndarray:
    """Resonant two-level drive Hamiltonian at time t."""
    if schedule.system != TWO_LEVEL:
        raise ValueError(f"expected a {TWO_LEVEL!r} schedule, got {schedule.system!r}")
    return segment_hamiltonian(schedule, schedule.segments[schedule.segment_index(t)])


def hamiltonian_3level(schedule: PulseSchedule, t: float) -> np.ndarray:
    """Lambda-system drive Hamiltonian at time t (bright state <-> excited state)."""
    if schedule.system != LAMBDA:
        raise ValueError(f"expected a {LAMBDA!r} schedule, got {schedule.system!r}")
    return segment_hamiltonian(schedule, schedule.segments[schedule.segment_index(t)])


def hamiltonian(schedule: PulseSchedule, t: float) -> np.ndarray:
    """Dispatch to the two-level or Lambda-system Hamiltonian."""
    if schedule.system == TWO_LEVEL:
        return hamiltonian_2level(schedule, t)
    return hamiltonian_3level(schedule, t)


@dataclass(frozen=True)
class ErrorModel:
    """Systematic control error H' = H + beta * V.

    kind="global_rabi" scales the drive itself (V = H, i.e. amplitude -> (1 +
    beta) * amplitude). kind="custom" adds beta * v(t) for a user-supplied
    callable returning a Hermitian matrix.
    """

    kind: str
    beta: float
    v: object = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.kind not in ("global_rabi", "custom"):
            raise ValueError(f"unknown error kind {self.kind!r}")
        if not math.isfinite(self.beta) or abs(self.beta) > BETA_HARD_LIMIT:
            raise ValueError(
                f"beta={self.beta!r} outside the supported range |beta| <= {BETA_HARD_LIMIT}"
            )
        if abs(self.beta) > BETA_WARN_LIMIT:
            warnings.warn(
                f"beta={self.beta!r} exceeds {BETA_WARN_LIMIT}; perturbative "
                "predictions will be loose",
                stacklevel=2,
            )
        if self.kind == "custom" and not callable(self.v):
            raise ValueError("custom error models need a callable v(t)")

    @classmethod
    def global_rabi(cls, beta: float) -> "ErrorModel":
        return cls(kind="global_rabi", beta=beta)

    @classmethod
    def custom(cls, beta: float, v) -> "ErrorModel":
        return cls(kind="custom", beta=beta, v=v)


def error_operator(schedule: PulseSchedule, error: ErrorModel, t: float) -> np.ndarray:
    """The perturbation V(t) of H' = H + beta * V."""
    if error.kind == "global_rabi":
        return hamiltonian(schedule, t)
    return np.asarray(error.v(t), dtype=complex)


def apply_error(schedule: PulseSchedule, error: ErrorModel | None):
    """Return a callable t -> H(t) + beta * V(t) suitable for the propagators."""
    if error is None or error.beta == 0.0:
        return lambda t: hamiltonian(schedule, t)
    if error.kind == "global_rabi":
        scale = 1.0 + error.beta
        return lambda t: scale * hamiltonian(schedule, t)
    return lambda t: hamiltonian(schedule, t) + error.beta * np.asarray(error.v(t), dtype=complex)


def segment_propagator(schedule: PulseSchedule, seg: PulseSegment, scale: float = 1.0) -> np.ndarray:
    """Closed-form exp(-1j * H_seg * duration) with the amplitude scaled.

    A resonant segment rotates by its pulse area about an equatorial axis, so
    the exponential reduces to cos/sin of half the area; for the Lambda system
    the rotation lives in the bright/excited block and the dark state is
    untouched. Agrees with mat_exp_hermitian to machine precision.
    """
    half = 0.5 * scale * seg.area
    c, s = math.cos(half), math.sin(half)
    ph = np.exp(1j * seg.phase)
    if schedule.system == TWO_LEVEL:
        return np.array([[c, -1j * s * ph], [-1j * s / ph, c]], dtype=complex)
    bright, dark = bright_dark(schedule.theta, schedule.phi)
    exc = np.array([0.0, 0.0, 1.0], dtype=complex)
    basis = np.column_stack([dark, bright, exc])
    block = np.array(
        [[1.0, 0.0, 0.0], [0.0, c, -1j * s / ph], [0.0, -1j * s * ph, c]], dtype=complex
    )
    return basis @ block @ basis.conj().T


def schedule_propagator(schedule: PulseSchedule, beta: float = 0.0) -> np.ndarray:
    """Exact propagator of the whole schedule: the ordered product of segment
    exponentials.

    beta applies the global Rabi error, scaling every amplitude by (1 + beta).
    An empty schedule gives the identity.
    """
    u = np.eye(schedule.dim, dtype=complex)
    for seg in schedule.segments:
        u = segment_propagator(schedule, seg, scale=1.0 + beta) @ u
    return u


def schedule_to_text(schedule: PulseSchedule) -> str:
    """Serialize to the plain-text format (header line, then one line per segment).

    Floats are written with repr(), which round-trips bit-exactly.
    """
    lines = [
        f"system={schedule.system} theta={float(schedule.theta)!r} phi={float(schedule.phi)!r}"
    ]
    for seg in schedule.segments:
        lines.append(f"{float(seg.duration)!r} {float(seg.amplitude)!r} {float(seg.phase)!r}")
    return "\n".join(lines) + "\n"


def schedule_from_text(text: str) -> PulseSchedule:
    """Parse the text format produced by schedule_to_text (strict)."""
    lines = [ln for ln in (raw.strip() for raw in text.splitlines()) if ln]
    if not lines:
        raise SerializationError("empty schedule text")
    header = lines[0].split()
    fields: dict[str, str] = {}
    for tok in header:
        if "=" not in tok:
            raise SerializationError(f"malformed header token {tok!r} on line 1")
        key, _, val = tok.partition("=")
        fields[key] = val
    missing = {"system", "theta", "phi"} - fields.keys()
    if missing:
        raise SerializationError(f"header missing fields: {sorted(missing)}")
    if fields["system"] not in SYSTEMS:
        raise SerializationError(f"unknown system {fields['system']!r} on line 1")
    try:
        theta = float(fields["theta"])
        phi = float(fields["phi"])
    except ValueError as exc:
        raise SerializationError(f"bad header number: {exc}") from exc
    segments = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != 3:
            raise SerializationError(
                f"line {lineno}: expected 'duration amplitude phase', got {line!r}"
            )
        try:
            duration, amplitude, phase = (float(p) for p in parts)
        except ValueError as exc:
            raise SerializationError(f"line {lineno}: {exc}") from exc
        try:
            segments.append(PulseSegment(duration, amplitude, phase))
        except ValueError as exc:
            raise SerializationError(f"line {lineno}: {exc}") from exc
    return PulseSchedule(
        system=fields["system"], segments=tuple(segments), theta=theta, phi=phi
    )


def save_schedule(schedule: PulseSchedule, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(schedule_to_text(schedule))


def load_schedule(path) -> PulseSchedule:
    with open(path, "r", encoding="ascii") as fh:
        return schedule_from_text(fh.read())
