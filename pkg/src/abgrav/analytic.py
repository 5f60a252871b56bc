"""Closed-form and quadrature phase shifts; the oracle for the solver.

All pairwise phases are ``phase2 - phase1`` under ``i hbar dpsi/dt = H psi``,
which is the argument of ``<psi1|psi2>`` after the two arms recombine.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

import numpy as np

from .core import (
    Constants,
    DomainError,
    MetricParams,
    PotentialProgram,
    ScenarioError,
    WeakFieldError,
    _close,
)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Altitude history R(t) of one arm as ordered samples."""

    times: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        r = np.array(self.radii, dtype=float)
        if t.ndim != 1 or t.shape != r.shape or t.size < 2:
            raise DomainError("a trajectory needs matching 1-D arrays of >= 2 samples")
        if np.any(np.diff(t) <= 0):
            raise DomainError("trajectory times must be strictly increasing")
        if np.any(r <= 0) or not np.all(np.isfinite(r)):
            raise DomainError("trajectory radii must be positive and finite")
        t.flags.writeable = False
        r.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "radii", r)

    @property
    def span(self) -> Tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])

    def inverse_radius_integral(self) -> float:
        """Trapezoid estimate of the integral of 1/R dt."""
        f = 1.0 / self.radii
        return float(math.fsum(0.5 * np.diff(self.times) * (f[1:] + f[:-1])))

    def split(self, t: float) -> Tuple["Trajectory", "Trajectory"]:
        """Split at an interior time; R is linearly interpolated if ``t`` is not a sample."""
        t0, t1 = self.span
        if not t0 < t < t1:
            raise DomainError(f"split time {t!r} is not inside {self.span!r}")
        i = int(np.searchsorted(self.times, t))
        if self.times[i] == t:
            left = (self.times[: i + 1], self.radii[: i + 1])
            right = (self.times[i:], self.radii[i:])
        else:
            r = float(np.interp(t, self.times, self.radii))
            left = (np.append(self.times[:i], t), np.append(self.radii[:i], r))
            right = (np.insert(self.times[i:], 0, t), np.insert(self.radii[i:], 0, r))
        return Trajectory(*left), Trajectory(*right)


LEG_PROFILES = {
    "linear": lambda s: s,
    "cosine": lambda s: 0.5 * (1.0 - np.cos(np.pi * s)),
    "smoothstep": lambda s: s * s * (3.0 - 2.0 * s),
    # rises past the target altitude before settling
    "overshoot": lambda s: s + 0.4 * np.sin(np.pi * s),
}


def dwell_trajectories(R1: float, R2: float, dwell: float, leg_time: float = 1.0,
                       profile: Union[str, Callable] = "linear",
                       samples_per_leg: int = 64) -> Tuple[Trajectory, Trajectory]:
    """Arm histories that differ only by a dwell at R1 versus at R2.

    Both arms climb from R1 to R2.  Arm 1 comes straight back down and then
    waits ``dwell`` at R1; arm 2 waits ``dwell`` at R2 and then descends
    along the same leg shape.  Leg samples sit at identical offsets inside
    each leg, so the legs cancel exactly under trapezoid quadrature.
    """
    shape = LEG_PROFILES[profile] if isinstance(profile, str) else profile
    s = np.linspace(0.0, 1.0, samples_per_leg + 1)
    up = R1 + (R2 - R1) * shape(s)
    down = up[::-1]
    leg_t = leg_time * s

    def join(pieces):
        times, radii, t_start = [], [], 0.0
        for i, (dt, r) in enumerate(pieces):
            sl = slice(None) if i == 0 else slice(1, None)
            times.append((t_start + dt)[sl])
            radii.append(r[sl])
            t_start += dt[-1]
        return Trajectory(np.concatenate(times), np.concatenate(radii))

    hold = np.array([0.0, dwell])
    if dwell > 0:
        arm1 = join([(leg_t, up), (leg_t, down), (hold, np.full(2, R1))])
        arm2 = join([(leg_t, up), (hold, np.full(2, R2)), (leg_t, down)])
    else:
        arm1 = arm2 = join([(leg_t, up), (leg_t, down)])
    return arm1, arm2


# ---------------------------------------------------------------------------
# electric effect


def electric_ab_phase(program1: PotentialProgram, program2: PotentialProgram,
                      constants: Constants) -> float:
    """Closed-circuit phase ``(S1 - S2) / hbar`` with ``S = int U dt``.

    Program levels are energies, so the charge is already folded in.
    """
    T1, T2 = program1.duration, program2.duration
    if not _close(T1, T2, max(T1, T2)):
        raise ScenarioError(f"programs have unequal durations {T1!r} and {T2!r}")
    return (program1.integral() - program2.integral()) / constants.hbar


def elevator_phase(V1: float, V2: float, dwell: float, constants: Constants) -> float:
    """``(e/hbar) (V1 - V2) dwell`` for electric potentials V1, V2."""
    if dwell < 0:
        raise DomainError("dwell must be non-negative")
    return constants.e / constants.hbar * (V1 - V2) * dwell


def newtonian_phase(R1: float, R2: float, dwell: float, M: float,
                    constants: Constants) -> float:
    """``(m M / hbar) (1/R2 - 1/R1) dwell``."""
    if R1 <= 0 or R2 <= 0:
        raise DomainError(f"radii must be positive, got {R1!r}, {R2!r}")
    return constants.m * M / constants.hbar * (1.0 / R2 - 1.0 / R1) * dwell


def weakfield_loop_phase(traj1: Trajectory, traj2: Trajectory, M: float,
                         constants: Constants) -> float:
    """``-(m/hbar) * loop integral of M/R dt``: traj1 forward, traj2 backward."""
    if not (_close(traj1.span[0], traj2.span[0], 1.0)
            and _close(traj1.span[1], traj2.span[1], max(abs(traj1.span[1]), 1.0))):
        raise ScenarioError(f"trajectory spans differ: {traj1.span!r} vs {traj2.span!r}")
    loop = traj1.inverse_radius_integral() - traj2.inverse_radius_integral()
    return -constants.m * M / constants.hbar * loop


# ---------------------------------------------------------------------------
# red shift


def _check_mode(mode):
    if mode not in ("exact", "weak-field"):
        raise DomainError(f"mode must be 'exact' or 'weak-field', got {mode!r}")


def redshift_deviation(metric: Optional[MetricParams], mode: str = "weak-field") -> float:
    """``sqrt(-g_tt) - 1`` evaluated without cancellation; 0 for flat space (None)."""
    _check_mode(mode)
    if metric is None:
        return 0.0
    x = metric.compactness
    if 2.0 * x >= 1.0:
        raise DomainError(f"2M/(R c^2) = {2 * x!r} is at or inside the horizon")
    if mode == "weak-field":
        return -x
    return math.expm1(0.5 * math.log1p(-2.0 * x))


def redshift_factor(metric: MetricParams, mode: str = "exact") -> float:
    """Proper-time rate ``sqrt(-g_tt)``.

    ``exact`` gives ``sqrt(1 - 2M/(R c^2))``, ``weak-field`` gives
    ``1 - M/(R c^2)``.  Raises DomainError at or inside the horizon.
    """
    _check_mode(mode)
    x = metric.compactness
    if 2.0 * x >= 1.0:
        raise DomainError(f"2M/(R c^2) = {2 * x!r} is at or inside the horizon")
    if mode == "weak-field":
        return 1.0 - x
    return math.sqrt(1.0 - 2.0 * x)


def redshift_route_phase(metric1: Optional[MetricParams], metric2: Optional[MetricParams],
                         dwell: float, momentum: float, constants: Constants,
                         mode: str = "weak-field") -> float:
    """Phase from each arm running its own clock through the dwell.

    Each arm evolves under ``m c^2 + p^2/2m`` for a proper time
    ``sqrt(-g_tt) * dwell``; ``None`` stands for a flat-space arm.
    """
    d1 = redshift_deviation(metric1, mode)
    d2 = redshift_deviation(metric2, mode)
    energy = constants.rest_energy + momentum**2 / (2.0 * constants.m)
    return -(d2 - d1) * energy * dwell / constants.hbar


def proper_time_route_phase(R1: float, R2: float, dwell: float, M: float,
                            momentum: float, constants: Constants,
                            mode: str = "weak-field") -> float:
    """Red-shift phase for two arms at radii R1, R2 around mass M.

    At ``momentum = 0`` with weak-field factors this equals
    :func:`newtonian_phase`; a nonzero momentum adds the velocity
    correction ``(M/c^2)(1/R2 - 1/R1) (p^2/2m) dwell / hbar``.
    """
    metrics = []
    for R in (R1, R2):
        metric = MetricParams(M, R, constants.c)
        if not metric.weak_field:
            raise WeakFieldError(f"M/(R c^2) = {metric.compactness!r} at R = {R!r}")
        metrics.append(metric)
    return redshift_route_phase(metrics[0], metrics[1], dwell, momentum, constants, mode)
