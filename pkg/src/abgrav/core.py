"""Shared domain types: constants, grids, wavefunctions, potential schedules.

Units are natural by default (hbar = m = e = 1) with a configurable speed of
light, so the low-velocity ratio p / (m c) can be tuned.  Newton's constant
is fixed to 1 throughout.

Sign convention: every state evolves under ``i hbar dpsi/dt = H psi``.  A
spatially uniform potential energy U(t) therefore multiplies the state by
``exp(-i/hbar * int U dt)``, and the relative phase of two arms is reported
as ``arg <psi1|psi2> = phase2 - phase1``.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence, Tuple, Union

import numpy as np


class ABError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(ABError, ValueError):
    """An argument lies outside the domain of the operation."""


class ResolutionError(DomainError):
    """A wavepacket is not resolved by the grid."""


class WeakFieldError(DomainError):
    """The weak-field approximation M/(R c^2) < 0.1 does not hold."""


class ContainmentError(ABError):
    """A packet leaks out of its domain or out of the interaction region."""


class ScenarioError(ABError):
    """Two arms, trajectories or programs are mutually inconsistent."""


class StepSizeError(ABError):
    """The time step violates a stability or anti-aliasing precondition."""


class SamplingError(ABError):
    """Recorded phases jump by pi or more between samples."""


class DecoherenceError(ABError):
    """The overlap of two states is too small for its phase to mean anything."""


class ConfigurationError(ABError, ValueError):
    """Invalid configuration of a run or a detector."""


# ---------------------------------------------------------------------------
# constants and grids


def _check_positive(name, value):
    if not (math.isfinite(value) and value > 0):
        raise DomainError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class Constants:
    """Physical constants; Newton's G is fixed to 1."""

    hbar: float = 1.0
    c: float = 1.0e3
    m: float = 1.0
    e: float = 1.0

    G = 1.0

    def __post_init__(self):
        for name in ("hbar", "c", "m", "e"):
            _check_positive(name, getattr(self, name))

    @property
    def rest_energy(self) -> float:
        return self.m * self.c**2


@dataclass(frozen=True)
class Grid1D:
    """Periodic, uniformly spaced 1-D grid centred on the origin.

    Points run from ``-length/2`` to ``length/2 - spacing``.
    """

    n_points: int
    length: float

    def __post_init__(self):
        n = self.n_points
        if int(n) != n or n < 16 or (int(n) & (int(n) - 1)):
            raise DomainError(f"n_points must be a power of two >= 16, got {n!r}")
        object.__setattr__(self, "n_points", int(n))
        _check_positive("length", self.length)

    @property
    def spacing(self) -> float:
        return self.length / self.n_points

    @property
    def x_min(self) -> float:
        return -0.5 * self.length

    @property
    def x_max(self) -> float:
        return 0.5 * self.length

    @cached_property
    def x(self) -> np.ndarray:
        x = self.x_min + self.spacing * np.arange(self.n_points)
        x.flags.writeable = False
        return x

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        k = 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.spacing)
        k.flags.writeable = False
        return k

    @property
    def k_nyquist(self) -> float:
        return np.pi / self.spacing


@dataclass(frozen=True, eq=False)
class Wavefunction:
    """Complex amplitudes sampled on a :class:`Grid1D`.

    The amplitude array is copied and frozen on construction.
    """

    amplitudes: np.ndarray
    grid: Grid1D

    def __post_init__(self):
        psi = np.array(self.amplitudes, dtype=complex)
        if psi.shape != (self.grid.n_points,):
            raise DomainError(
                f"amplitudes must have shape ({self.grid.n_points},), got {psi.shape}"
            )
        psi.flags.writeable = False
        object.__setattr__(self, "amplitudes", psi)

    @property
    def norm(self) -> float:
        """Squared L2 norm, sum |psi|^2 dx."""
        return float(np.vdot(self.amplitudes, self.amplitudes).real * self.grid.spacing)

    def normalized(self) -> "Wavefunction":
        return Wavefunction(self.amplitudes / math.sqrt(self.norm), self.grid)

    def inner(self, other: "Wavefunction") -> complex:
        """<self|other> with the grid measure."""
        if other.grid != self.grid:
            raise ScenarioError("wavefunctions live on different grids")
        return complex(np.vdot(self.amplitudes, other.amplitudes) * self.grid.spacing)

    def __mul__(self, factor):
        return Wavefunction(self.amplitudes * factor, self.grid)

    __rmul__ = __mul__


@dataclass(frozen=True)
class GaussianPacket:
    """Initial-packet parameters: centre, position spread and mean momentum."""

    center: float = 0.0
    width: float = 5.0
    momentum: float = 0.0


def make_gaussian_packet(grid: Grid1D, center: float, width: float,
                         momentum: float, constants: Constants) -> Wavefunction:
    """Normalized Gaussian with position spread ``width`` and mean momentum.

    ``width`` is the standard deviation of |psi|^2, so that
    ``psi ~ exp(-(x - center)^2 / (4 width^2) + i momentum x / hbar)``.

    Raises
    ------
    ResolutionError
        If ``width < 4 * spacing`` or the momentum-space tail at the Nyquist
        wavenumber exceeds 1e-12 of the peak.
    ContainmentError
        If the packet tail at either domain edge exceeds 1e-12 of the peak.
    """
    if width < 4.0 * grid.spacing:
        raise ResolutionError(
            f"width {width!r} is below 4 grid spacings ({4.0 * grid.spacing!r})"
        )
    if not grid.x_min < center < grid.x_max:
        raise ContainmentError(f"packet centre {center!r} lies outside the grid")
    edge = min(center - grid.x_min, grid.x_max - center)
    # log of the amplitude ratio edge/peak
    if edge**2 / (4.0 * width**2) < 12.0 * math.log(10.0):
        raise ContainmentError(
            f"packet tail at the domain edge exceeds 1e-12 of its peak "
            f"(edge distance {edge!r}, width {width!r})"
        )
    k0 = momentum / constants.hbar
    k_gap = grid.k_nyquist - abs(k0)
    if k_gap <= 0 or (k_gap * width) ** 2 < 12.0 * math.log(10.0):
        raise ResolutionError(
            f"momentum {momentum!r} with width {width!r} is not resolved below "
            f"the Nyquist wavenumber {grid.k_nyquist!r}"
        )
    dx = grid.x - center
    psi = np.exp(-(dx**2) / (4.0 * width**2) + 1j * k0 * grid.x)
    psi /= math.sqrt(np.vdot(psi, psi).real * grid.spacing)
    return Wavefunction(psi, grid)


# ---------------------------------------------------------------------------
# potential programs


@dataclass(frozen=True)
class ConstantSegment:
    duration: float
    level: float

    @property
    def start_level(self):
        return self.level

    @property
    def end_level(self):
        return self.level

    def value(self, s):
        return self.level

    def integral(self, s0, s1):
        return self.level * (s1 - s0)

    def shifted(self, offset):
        return ConstantSegment(self.duration, self.level + offset)


@dataclass(frozen=True)
class RampSegment:
    """Raised-cosine ramp from ``start`` to ``end``; zero slope at both ends."""

    duration: float
    start: float
    end: float

    @property
    def start_level(self):
        return self.start

    @property
    def end_level(self):
        return self.end

    def value(self, s):
        w = 0.5 * (1.0 - math.cos(math.pi * s / self.duration))
        return self.start + (self.end - self.start) * w

    def integral(self, s0, s1):
        T = self.duration
        a = math.pi / T
        wint = 0.5 * ((s1 - s0) - (math.sin(a * s1) - math.sin(a * s0)) / a)
        return self.start * (s1 - s0) + (self.end - self.start) * wint

    def shifted(self, offset):
        return RampSegment(self.duration, self.start + offset, self.end + offset)


Segment = Union[ConstantSegment, RampSegment]


def _close(a, b, scale=1.0):
    return math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12 * scale)


@dataclass(frozen=True)
class PotentialProgram:
    """Spatially uniform potential energy U(t) as an ordered segment schedule.

    Time runs from 0 to :attr:`duration`.  Levels are energies (``e * phi``
    for an electric potential ``phi``).  Constant segments may jump; call
    :meth:`is_continuous` where C0 matters.
    """

    segments: Tuple[Segment, ...]

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise DomainError("a program needs at least one segment")
        for seg in segs:
            if not (math.isfinite(seg.duration) and seg.duration > 0):
                raise DomainError(f"segment durations must be positive, got {seg!r}")
        object.__setattr__(self, "segments", segs)
        edges = [0.0]
        for seg in segs:
            edges.append(edges[-1] + seg.duration)
        object.__setattr__(self, "_edges", tuple(edges))

    @classmethod
    def constant(cls, level: float, duration: float) -> "PotentialProgram":
        return cls((ConstantSegment(duration, level),))

    @classmethod
    def zero(cls, duration: float) -> "PotentialProgram":
        return cls.constant(0.0, duration)

    @property
    def duration(self) -> float:
        return self._edges[-1]

    @property
    def edges(self) -> Tuple[float, ...]:
        return self._edges

    def __add__(self, other: "PotentialProgram") -> "PotentialProgram":
        """Concatenation in time."""
        return PotentialProgram(self.segments + other.segments)

    def shifted(self, offset: float) -> "PotentialProgram":
        """Same schedule with ``offset`` added to every level."""
        return PotentialProgram(tuple(s.shifted(offset) for s in self.segments))

    def is_zero(self) -> bool:
        return all(s.start_level == 0 and s.end_level == 0 for s in self.segments)

    def is_continuous(self) -> bool:
        pairs = zip(self.segments[:-1], self.segments[1:])
        return all(_close(a.end_level, b.start_level) for a, b in pairs)

    def max_abs(self) -> float:
        return max(max(abs(s.start_level), abs(s.end_level)) for s in self.segments)

    def _locate(self, t):
        i = bisect.bisect_right(self._edges, t) - 1
        return min(max(i, 0), len(self.segments) - 1)

    def _check_time(self, t):
        T = self.duration
        if not (-1e-12 * T <= t <= T * (1 + 1e-12)):
            raise DomainError(f"t = {t!r} lies outside the program support [0, {T!r}]")

    def value(self, t: float) -> float:
        self._check_time(t)
        i = self._locate(t)
        s = min(max(t - self._edges[i], 0.0), self.segments[i].duration)
        return self.segments[i].value(s)

    def integral(self, t0: Optional[float] = None, t1: Optional[float] = None) -> float:
        """Exact integral of U over ``[t0, t1]`` (whole program by default)."""
        edges = self._edges
        if t0 is None and t1 is None:
            return math.fsum(s.integral(0.0, s.duration) for s in self.segments)
        t0 = 0.0 if t0 is None else t0
        t1 = self.duration if t1 is None else t1
        self._check_time(t0)
        self._check_time(t1)
        if t1 < t0:
            return -self.integral(t1, t0)
        total = 0.0
        i = self._locate(t0)
        while i < len(self.segments) and edges[i] < t1:
            seg = self.segments[i]
            a = max(t0 - edges[i], 0.0)
            b = min(t1 - edges[i], seg.duration)
            if b > a:
                total += seg.integral(a, b)
            i += 1
        return total

    def is_active(self, t0: float, t1: float) -> bool:
        """True if U is nonzero somewhere inside ``(t0, t1)``."""
        edges = self._edges
        i = self._locate(t0)
        while i < len(self.segments) and edges[i] < t1:
            seg = self.segments[i]
            if seg.start_level != 0 or seg.end_level != 0:
                if edges[i + 1] > t0:
                    return True
            i += 1
        return False


def evaluate_program(program: PotentialProgram, t: float) -> float:
    """U(t) for a program; raises DomainError outside ``[0, duration]``."""
    return program.value(t)


def program_integral(program: PotentialProgram) -> float:
    """Exact action ``int U dt`` over the whole program."""
    return program.integral()


# ---------------------------------------------------------------------------
# metric, scenario and results


@dataclass(frozen=True)
class MetricParams:
    """Weak-field Schwarzschild parameters of one constant-altitude segment."""

    M: float
    R: float
    c: float

    def __post_init__(self):
        if not (math.isfinite(self.R) and self.R > 0):
            raise DomainError(f"radius must be positive, got {self.R!r}")
        if not (math.isfinite(self.M) and self.M >= 0):
            raise DomainError(f"mass must be non-negative, got {self.M!r}")
        _check_positive("c", self.c)

    @property
    def compactness(self) -> float:
        """M / (R c^2)."""
        return self.M / (self.R * self.c**2)

    @property
    def weak_field(self) -> bool:
        return self.compactness < 0.1


ROUTES = ("flat-electric", "newtonian", "semi-covariant", "proper-time")
METRIC_ROUTES = ("semi-covariant", "proper-time")


def _steps_in(duration, step):
    n = round(duration / step)
    if n < 0 or not math.isclose(n * step, duration, rel_tol=1e-9, abs_tol=1e-12):
        return None
    return n


@dataclass(frozen=True)
class Scenario:
    """Complete description of one two-arm run.

    For the metric routes the arms evolve under their metric Hamiltonians
    only inside the dwell window ``[lead_time, lead_time + dwell_time]`` and
    freely elsewhere; their programs must then be zero.  ``rotating_frame``
    subtracts the flat rest energy m c^2 from both arms; ``None`` picks the
    per-route default (on for flat-electric and newtonian, off otherwise).
    ``tube`` is the interaction region the packets must stay inside while
    any potential is active.
    """

    constants: Constants
    grid: Grid1D
    initial_packet: GaussianPacket
    arm1_program: PotentialProgram
    arm2_program: PotentialProgram
    dwell_time: float
    route: str
    step_size: float
    record_stride: int = 1
    metric1: Optional[MetricParams] = None
    metric2: Optional[MetricParams] = None
    lead_time: float = 0.0
    rotating_frame: Optional[bool] = None
    include_correction: bool = True
    redshift_mode: str = "weak-field"
    quadrature: str = "exact"
    tube: Optional[Tuple[float, float]] = None
    fringe_kick: Optional[float] = None

    def __post_init__(self):
        if self.route not in ROUTES:
            raise ScenarioError(f"unknown route {self.route!r}; expected one of {ROUTES}")
        if self.redshift_mode not in ("weak-field", "exact"):
            raise ScenarioError(f"unknown redshift mode {self.redshift_mode!r}")
        if self.quadrature not in ("exact", "sampled"):
            raise ScenarioError(f"unknown quadrature {self.quadrature!r}")
        T1, T2 = self.arm1_program.duration, self.arm2_program.duration
        if not _close(T1, T2, max(T1, T2)):
            raise ScenarioError(
                f"arm programs must have equal durations, got {T1!r} and {T2!r}"
            )
        if not (math.isfinite(self.step_size) and self.step_size > 0):
            raise ScenarioError(f"step_size must be positive, got {self.step_size!r}")
        n = _steps_in(T1, self.step_size)
        if n is None or n == 0:
            raise ScenarioError(
                f"total duration {T1!r} is not an integer multiple of step {self.step_size!r}"
            )
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ScenarioError(f"record_stride must be a positive integer")
        if n % self.record_stride:
            raise ScenarioError(
                f"record_stride {self.record_stride} does not divide {n} steps"
            )
        if self.dwell_time < 0:
            raise ScenarioError("dwell_time must be non-negative")
        if self.tube is not None:
            lo, hi = self.tube
            if not (self.grid.x_min <= lo < hi <= self.grid.x_max):
                raise ScenarioError(f"tube {self.tube!r} is not inside the grid")
        if self.route in ("newtonian",) + METRIC_ROUTES:
            if self.metric1 is None or self.metric2 is None:
                raise ScenarioError(f"route {self.route!r} needs metric parameters for both arms")
        if self.route in METRIC_ROUTES:
            for arm, metric in (("arm1", self.metric1), ("arm2", self.metric2)):
                if not metric.weak_field:
                    raise ScenarioError(f"{arm} violates weak-field validity M/(R c^2) < 0.1")
            if not (self.arm1_program.is_zero() and self.arm2_program.is_zero()):
                raise ScenarioError(f"route {self.route!r} takes zero arm programs")
            if _steps_in(self.lead_time, self.step_size) is None or \
                    _steps_in(self.dwell_time, self.step_size) is None:
                raise ScenarioError("lead and dwell times must be multiples of the step")
            if self.lead_time + self.dwell_time > T1 * (1 + 1e-12):
                raise ScenarioError("dwell window extends past the end of the run")

    @property
    def duration(self) -> float:
        return self.arm1_program.duration

    @property
    def n_steps(self) -> int:
        return _steps_in(self.duration, self.step_size)

    @property
    def frame_on(self) -> bool:
        if self.rotating_frame is None:
            return self.route not in METRIC_ROUTES
        return self.rotating_frame

    @property
    def region(self) -> Tuple[float, float]:
        if self.tube is not None:
            return self.tube
        return (0.8 * self.grid.x_min, 0.8 * self.grid.x_max)


def wrap_phase(phase: float) -> float:
    """Map a phase to (-pi, pi]."""
    w = math.remainder(phase, 2.0 * math.pi)
    return math.pi if w == -math.pi else w


@dataclass(frozen=True)
class PhaseComparison:
    """Numeric vs analytic inter-arm phase for one run, with diagnostics.

    ``history_residual`` is the largest |numeric - analytic| over all
    recorded times, not only the final one.
    """

    numeric_phase: float
    analytic_phase: float
    momentum_drift: float
    norm_drift: float
    history_residual: float = 0.0
    residual: float = field(init=False)
    residual_wrapped: float = field(init=False)

    def __post_init__(self):
        r = self.numeric_phase - self.analytic_phase
        object.__setattr__(self, "residual", r)
        object.__setattr__(self, "residual_wrapped", wrap_phase(r))

    def as_dict(self) -> dict:
        return {
            "numeric_phase": self.numeric_phase,
            "analytic_phase": self.analytic_phase,
            "residual": self.residual,
            "residual_wrapped": self.residual_wrapped,
            "history_residual": self.history_residual,
            "momentum_drift": self.momentum_drift,
            "norm_drift": self.norm_drift,
        }
