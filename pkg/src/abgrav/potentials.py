"""Builders turning each experiment into programs and Hamiltonian coefficients."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .analytic import redshift_factor
from .core import (
    ConstantSegment,
    Constants,
    DomainError,
    MetricParams,
    PotentialProgram,
    RampSegment,
    WeakFieldError,
)


@dataclass(frozen=True)
class HamiltonianSpec:
    """Coefficients of ``H = rest_energy + kinetic_scale * p^2/2m + U(t)``.

    ``potential`` is a spatially uniform program on the coordinate-time
    clock; ``None`` means U = 0.
    """

    kinetic_scale: float = 1.0
    rest_energy: float = 0.0
    potential: Optional[PotentialProgram] = None

    def __post_init__(self):
        if not 0.0 < self.kinetic_scale <= 1.0:
            raise DomainError(f"kinetic_scale must lie in (0, 1], got {self.kinetic_scale!r}")
        if self.rest_energy < 0:
            raise DomainError(f"rest_energy must be non-negative, got {self.rest_energy!r}")

    def with_potential(self, program: Optional[PotentialProgram]) -> "HamiltonianSpec":
        return replace(self, potential=program)

    def potential_value(self, t: float) -> float:
        return 0.0 if self.potential is None else self.potential.value(t)

    def potential_integral(self, t0: float, t1: float) -> float:
        return 0.0 if self.potential is None else self.potential.integral(t0, t1)

    def kinetic_energy(self, p_sq: float, constants: Constants) -> float:
        return self.kinetic_scale * p_sq / (2.0 * constants.m)


def free_spec(constants: Constants) -> HamiltonianSpec:
    """Flat-space particle including its rest energy m c^2."""
    return HamiltonianSpec(1.0, constants.rest_energy)


def _zero_pieces(*durations):
    if any(d < 0 for d in durations):
        raise DomainError(f"durations must be non-negative, got {durations!r}")


def _assemble(pieces) -> PotentialProgram:
    segs = tuple(seg for seg in pieces if seg is not None and seg.duration > 0)
    if not segs:
        raise DomainError("program has zero total duration")
    return PotentialProgram(segs)


def tube_pulse_program(amplitude: float, ramp: float, plateau: float,
                       lead: float = 0.0, tail: float = 0.0) -> PotentialProgram:
    """Zero, raised-cosine rise, plateau at ``amplitude``, fall, zero.

    The integral is ``amplitude * (plateau + ramp)``.
    """
    _zero_pieces(ramp, plateau, lead, tail)
    if amplitude != 0 and ramp <= 0:
        raise DomainError("a nonzero pulse needs a positive ramp time")
    return _assemble([
        ConstantSegment(lead, 0.0),
        RampSegment(ramp, 0.0, amplitude) if ramp > 0 else None,
        ConstantSegment(plateau, amplitude),
        RampSegment(ramp, amplitude, 0.0) if ramp > 0 else None,
        ConstantSegment(tail, 0.0),
    ])


def elevator_program(level: float, dwell: float, lead: float = 0.0,
                     tail: float = 0.0) -> PotentialProgram:
    """Zero, then ``level`` held for ``dwell``, then zero.

    The ascent and descent legs are identical in both arms and cancel, so
    they are represented by the zero-potential lead and tail.
    """
    _zero_pieces(dwell, lead, tail)
    return _assemble([
        ConstantSegment(lead, 0.0),
        ConstantSegment(dwell, level),
        ConstantSegment(tail, 0.0),
    ])


def newtonian_program(R: float, M: float, dwell: float, constants: Constants,
                      lead: float = 0.0, tail: float = 0.0) -> PotentialProgram:
    """Elevator program at the Newtonian potential energy ``-m G M / R``."""
    if R <= 0:
        raise DomainError(f"radius must be positive, got {R!r}")
    level = -constants.m * constants.G * M / R
    return elevator_program(level, dwell, lead, tail)


def _weak_metric(metric: MetricParams):
    if not metric.weak_field:
        raise WeakFieldError(
            f"M/(R c^2) = {metric.compactness!r} violates weak-field validity (< 0.1)"
        )
    if 2.0 * metric.compactness >= 1.0:
        raise DomainError("radius is at or inside the horizon")


def semi_covariant_spec(metric: MetricParams, constants: Constants,
                        include_correction: bool = True) -> HamiltonianSpec:
    """Constant-altitude semi-covariant Hamiltonian in the weak field.

    The total is ``(1 - M/(R c^2)) m c^2 + kinetic_scale p^2/2m``, where the
    kinetic scale carries the velocity correction ``1 - M/(R c^2)`` when
    ``include_correction`` is set and is 1 in the low-velocity reduction.
    """
    _weak_metric(metric)
    factor = redshift_factor(metric, "weak-field")
    return HamiltonianSpec(
        kinetic_scale=factor if include_correction else 1.0,
        rest_energy=constants.rest_energy * factor,
    )


def proper_time_spec(metric: MetricParams, constants: Constants,
                     mode: str = "weak-field") -> HamiltonianSpec:
    """Free Hamiltonian in proper time, rescaled to coordinate time.

    Both the rest energy and the kinetic term pick up the red-shift factor.
    """
    _weak_metric(metric)
    factor = redshift_factor(metric, mode)
    return HamiltonianSpec(kinetic_scale=factor, rest_energy=constants.rest_energy * factor)
