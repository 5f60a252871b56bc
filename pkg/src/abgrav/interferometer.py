"""Two-arm experiment: split, evolve, recombine, extract and compare the phase."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import analytic
from .core import (
    ConfigurationError,
    ContainmentError,
    DecoherenceError,
    METRIC_ROUTES,
    PhaseComparison,
    PotentialProgram,
    SamplingError,
    Scenario,
    ScenarioError,
    Wavefunction,
    Constants,
    make_gaussian_packet,
    wrap_phase,
)
from .potentials import HamiltonianSpec, free_spec, semi_covariant_spec
from .solver import (
    OVERLAP_THRESHOLD,
    PhaseTracker,
    Propagator,
    _normalized_overlap,
    check_step,
    region_weights,
)

CONTAINMENT_TOLERANCE = 1e-8


@dataclass(frozen=True, eq=False)
class FringePattern:
    """Detector intensity after recombining the arms with opposite kicks.

    ``incoherent_total`` is the integral of the two single-arm intensities;
    it matches ``total`` once the kick separates the fringes from the
    envelope.
    """

    screen_positions: np.ndarray
    intensities: np.ndarray
    extracted_shift: float
    kick: float
    total: float
    incoherent_total: float


def default_kick(scenario: Scenario) -> float:
    """Kick giving several fringes per packet width, well below Nyquist."""
    hbar = scenario.constants.hbar
    kick = max(4.0 * hbar / scenario.initial_packet.width,
               4.0 * math.pi * hbar / scenario.grid.length)
    return min(kick, 0.25 * hbar * scenario.grid.k_nyquist)


def fringe_synthesize(arm1: Wavefunction, arm2: Wavefunction, kick: float,
                      constants: Constants) -> FringePattern:
    """Recombine two normalized arms and read the phase off the fringes.

    The arms get momentum kicks of +kick and -kick and are superposed with
    equal weights.  The shift is recovered by fitting the coherent part of
    the pattern to calibration patterns taken at shifts 0 and pi/2 from
    arm 1 alone.
    """
    if arm1.grid != arm2.grid:
        raise ConfigurationError("arms live on different grids")
    grid = arm1.grid
    hbar = constants.hbar
    if abs(kick) * grid.length / hbar < 4.0 * math.pi:
        raise ConfigurationError(
            f"kick {kick!r} gives fewer than two fringes across the screen"
        )
    if 2.0 * abs(kick) / hbar >= grid.k_nyquist:
        raise ConfigurationError(f"kick {kick!r} is not resolved by the grid")
    carrier = np.exp(1j * kick * grid.x / hbar)
    s = 1.0 / math.sqrt(2.0)
    a = s * arm1.amplitudes * carrier
    b = s * arm2.amplitudes * carrier.conj()
    intensity = np.abs(a + b) ** 2
    background = np.abs(a) ** 2 + np.abs(b) ** 2

    b0 = s * arm1.amplitudes * carrier.conj()
    ref0 = np.abs(a + b0) ** 2 - np.abs(a) ** 2 - np.abs(b0) ** 2
    ref90 = np.abs(a + 1j * b0) ** 2 - np.abs(a) ** 2 - np.abs(b0) ** 2
    basis = np.stack([ref0, ref90], axis=1)
    (A, B), *_ = np.linalg.lstsq(basis, intensity - background, rcond=None)
    shift = wrap_phase(math.atan2(B, A))
    dx = grid.spacing
    return FringePattern(
        screen_positions=np.array(grid.x),
        intensities=intensity,
        extracted_shift=shift,
        kick=kick,
        total=float(intensity.sum() * dx),
        incoherent_total=float(background.sum() * dx),
    )


@dataclass(frozen=True, eq=False)
class History:
    """Per-record samples of both arms; ``dphi`` is the unwrapped phase2 - phase1."""

    t: np.ndarray
    norm1: np.ndarray
    norm2: np.ndarray
    mean_p1: np.ndarray
    mean_p2: np.ndarray
    phase1: np.ndarray
    phase2: np.ndarray
    dphi: np.ndarray
    analytic_dphi: np.ndarray

    CSV_COLUMNS = ("t", "norm1", "norm2", "mean_p1", "mean_p2", "phase1", "phase2",
                   "dphi_unwrapped")

    def rows(self):
        cols = (self.t, self.norm1, self.norm2, self.mean_p1, self.mean_p2,
                self.phase1, self.phase2, self.dphi)
        return zip(*cols)


@dataclass(frozen=True, eq=False)
class TwoArmRun:
    scenario: Scenario
    comparison: PhaseComparison
    history: History
    arm1: Wavefunction
    arm2: Wavefunction
    fringes: Optional[FringePattern]


@dataclass(frozen=True)
class RouteEquivalence:
    phase_semi_covariant: float
    phase_proper_time: float
    difference: float
    expected_difference: float


class _ArmSchedule:
    """Hamiltonian and clock shift of one arm at each coordinate step.

    The dwell Hamiltonians are written as the flat rest energy plus a small
    uniform shift, the same total operator as the metric specs, so the
    common m c^2 phase cancels bitwise between the arms.
    """

    def __init__(self, scenario: Scenario, arm: int):
        c = scenario.constants
        program = scenario.arm1_program if arm == 1 else scenario.arm2_program
        metric = scenario.metric1 if arm == 1 else scenario.metric2
        self.program = program
        self.flat = free_spec(c).with_potential(program)
        self.dwell_spec, self.dwell_shift = self.flat, 0.0
        self.metric_route = scenario.route in METRIC_ROUTES
        if scenario.route == "semi-covariant":
            semi = semi_covariant_spec(metric, c, scenario.include_correction)
            shift = c.rest_energy * analytic.redshift_deviation(metric, "weak-field")
            self.dwell_spec = HamiltonianSpec(
                semi.kinetic_scale, c.rest_energy,
                PotentialProgram.constant(shift, scenario.duration),
            )
        elif scenario.route == "proper-time":
            self.dwell_spec = free_spec(c)
            self.dwell_shift = analytic.redshift_deviation(metric, scenario.redshift_mode)
        h = scenario.step_size
        self.j_start = round(scenario.lead_time / h)
        self.j_end = self.j_start + round(scenario.dwell_time / h)
        self.h = h

    def at(self, j):
        if self.metric_route:
            if self.j_start <= j < self.j_end:
                return self.dwell_spec, self.dwell_shift, True
            return self.flat, 0.0, False
        t = j * self.h
        return self.flat, 0.0, self.program.is_active(t, t + self.h)

    def pairs(self):
        return {(self.flat, 0.0), (self.dwell_spec, self.dwell_shift)}


def initial_state(scenario: Scenario) -> Wavefunction:
    pk = scenario.initial_packet
    return make_gaussian_packet(scenario.grid, pk.center, pk.width, pk.momentum,
                                scenario.constants)


def _packet_p_sq(psi, constants):
    psi_k = np.fft.fft(psi.amplitudes)
    w = np.abs(psi_k) ** 2
    k = psi.grid.wavenumbers
    return float(constants.hbar**2 * np.dot(k * k, w) / w.sum())


def analytic_phase(scenario: Scenario, p_sq: float) -> float:
    """Closed-form inter-arm phase for the scenario's route.

    ``p_sq`` is the packet's ``<p^2>``, which enters only the velocity
    correction of the metric routes.
    """
    c = scenario.constants
    if scenario.route == "flat-electric":
        return analytic.electric_ab_phase(scenario.arm1_program, scenario.arm2_program, c)
    m1, m2 = scenario.metric1, scenario.metric2
    if scenario.route == "newtonian":
        return analytic.newtonian_phase(m1.R, m2.R, scenario.dwell_time, m1.M, c)
    corrected = scenario.route == "proper-time" or scenario.include_correction
    mode = scenario.redshift_mode if scenario.route == "proper-time" else "weak-field"
    p = math.sqrt(p_sq) if corrected else 0.0
    return analytic.redshift_route_phase(m1, m2, scenario.dwell_time, p, c, mode)


def _analytic_history(scenario: Scenario, times, final):
    if scenario.route in METRIC_ROUTES:
        if scenario.dwell_time == 0:
            return np.zeros_like(times)
        lo, hi = scenario.lead_time, scenario.lead_time + scenario.dwell_time
        covered = np.clip(times, lo, hi) - lo
        return final * covered / scenario.dwell_time
    T = scenario.duration
    hbar = scenario.constants.hbar
    p1, p2 = scenario.arm1_program, scenario.arm2_program
    return np.array([(p1.integral(0.0, min(t, T)) - p2.integral(0.0, min(t, T))) / hbar
                     for t in times])


def simulate_two_arm(scenario: Scenario, fringes: bool = True) -> TwoArmRun:
    """Run both arms in lockstep and collect the full history.

    Raises ContainmentError if either arm leaves the interaction region
    while a potential acts on it, and DecoherenceError or SamplingError if
    the relative phase cannot be tracked.
    """
    c = scenario.constants
    grid = scenario.grid
    h = scenario.step_size
    psi0 = initial_state(scenario)
    arms = [_ArmSchedule(scenario, 1), _ArmSchedule(scenario, 2)]
    for arm in arms:
        for spec, shift in arm.pairs():
            check_step(spec, h, grid, c, shift)

    p_sq0 = _packet_p_sq(psi0, c)
    interval = scenario.record_stride * h
    for arm in arms:
        for spec, shift in arm.pairs():
            drift = abs(spec.kinetic_scale * (1.0 + shift) - 1.0) * p_sq0 / (2 * c.m) / c.hbar
            if drift * interval >= math.pi:
                raise SamplingError("arm phase drifts by pi between records; "
                                    "reduce record_stride")

    e_ref = c.rest_energy if scenario.frame_on else 0.0
    props = [Propagator(psi0, c, h, reference_energy=e_ref, quadrature=scenario.quadrature)
             for _ in arms]
    psi0_k = np.fft.fft(psi0.amplitudes)
    k2 = grid.wavenumbers ** 2

    def free_reference(t):
        return psi0_k * np.exp(-1j * c.hbar * k2 * t / (2.0 * c.m))

    trackers = [PhaseTracker(free_reference, grid.spacing) for _ in arms]
    weights = region_weights(grid, scenario.region)

    def check_containment(t):
        for i, prop in enumerate(props):
            dens = np.abs(prop.amplitudes) ** 2
            frac = float(np.dot(weights, dens) / dens.sum())
            if frac < 1.0 - CONTAINMENT_TOLERANCE:
                raise ContainmentError(
                    f"arm {i + 1} is only {frac:.10f} inside the region "
                    f"{scenario.region!r} at t = {t!r} while a potential acts on it"
                )

    rows = []
    last_dphi = [None]

    def record():
        t = props[0].t
        row = [t]
        stats = []
        for prop, tracker in zip(props, trackers):
            psi_k = prop.momentum_amplitudes
            w = np.abs(psi_k) ** 2
            norm = float(w.sum() * grid.spacing / grid.n_points)
            mean_p = float(c.hbar * np.dot(grid.wavenumbers, w) / w.sum())
            phase = tracker.sample(t, psi_k, prop.applied_phase)
            stats.append((norm, mean_p, phase))
        z, mag = _normalized_overlap(props[0].amplitudes, props[1].amplitudes, grid.spacing)
        if mag < OVERLAP_THRESHOLD:
            raise DecoherenceError(f"arms decohered (overlap {mag:.3g}) at t = {t!r}")
        predicted = stats[1][2] - stats[0][2]
        correction = wrap_phase(math.atan2(z.imag, z.real) - predicted)
        if abs(correction) >= 0.5 * math.pi:
            raise SamplingError(f"inter-arm phase lost track at t = {t!r}; reduce record_stride")
        dphi = predicted + correction
        if last_dphi[0] is not None and abs(dphi - last_dphi[0]) >= math.pi:
            raise SamplingError(
                f"inter-arm phase jumps by {abs(dphi - last_dphi[0]):.3g} rad between "
                f"records at t = {t!r}; reduce record_stride"
            )
        last_dphi[0] = dphi
        rows.append((t, stats[0][0], stats[1][0], stats[0][1], stats[1][1],
                     stats[0][2], stats[1][2], dphi))

    record()
    n = scenario.n_steps
    was_active = False
    for j in range(n):
        steps = [arm.at(j) for arm in arms]
        active = any(s[2] for s in steps)
        if active or was_active:
            check_containment(props[0].t)
        for prop, (spec, shift, _) in zip(props, steps):
            prop.advance(spec, shift)
        was_active = active
        if (j + 1) % scenario.record_stride == 0:
            record()
    if was_active:
        check_containment(props[0].t)

    cols = [np.array(col) for col in zip(*rows)]
    final = analytic_phase(scenario, p_sq0)
    expected = _analytic_history(scenario, cols[0], final)
    history = History(*cols, analytic_dphi=expected)

    mean_p0 = history.mean_p1[0]
    drift_p = float(max(np.max(np.abs(history.mean_p1 - mean_p0)),
                        np.max(np.abs(history.mean_p2 - mean_p0))))
    drift_n = float(max(np.max(np.abs(history.norm1 - 1.0)),
                        np.max(np.abs(history.norm2 - 1.0))))
    comparison = PhaseComparison(
        numeric_phase=float(history.dphi[-1]),
        analytic_phase=final,
        momentum_drift=drift_p,
        norm_drift=drift_n,
        history_residual=float(np.max(np.abs(history.dphi - expected))),
    )
    arm1, arm2 = props[0].wavefunction(), props[1].wavefunction()
    pattern = None
    if fringes:
        kick = scenario.fringe_kick or default_kick(scenario)
        pattern = fringe_synthesize(arm1, arm2, kick, c)
    return TwoArmRun(scenario, comparison, history, arm1, arm2, pattern)


def run_two_arm(scenario: Scenario) -> PhaseComparison:
    """Numeric versus analytic inter-arm phase for one scenario."""
    return simulate_two_arm(scenario, fringes=False).comparison


def route_equivalence(scenario: Scenario) -> RouteEquivalence:
    """Run the scenario under both metric routes and compare.

    With ``include_correction`` set the two routes share the same
    Hamiltonian and must agree to discretization error; without it they
    differ by the velocity-correction term reported as
    ``expected_difference``.  Arm programs are replaced by zero programs,
    so a Newtonian scenario can be passed as is.
    """
    if scenario.metric1 is None or scenario.metric2 is None:
        raise ScenarioError("route comparison needs metric parameters for both arms")
    zero = PotentialProgram.zero(scenario.duration)
    base = replace(scenario, arm1_program=zero, arm2_program=zero)
    semi = replace(base, route="semi-covariant", redshift_mode="weak-field")
    proper = replace(base, route="proper-time")
    phase_semi = run_two_arm(semi).numeric_phase
    phase_tau = run_two_arm(proper).numeric_phase
    expected = 0.0
    if not scenario.include_correction:
        c = scenario.constants
        p_sq = _packet_p_sq(initial_state(scenario), c)
        d1 = analytic.redshift_deviation(scenario.metric1, "weak-field")
        d2 = analytic.redshift_deviation(scenario.metric2, "weak-field")
        expected = (d2 - d1) * p_sq / (2.0 * c.m) * scenario.dwell_time / c.hbar
    return RouteEquivalence(phase_semi, phase_tau, phase_semi - phase_tau, expected)
