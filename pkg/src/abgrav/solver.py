"""Split-step spectral propagation on a periodic grid.

Potentials here are spatially uniform, so each half-kick is a scalar phase.
The propagator keeps a compensated running sum of every kick it applies;
phase unwrapping uses that sum to pick the 2 pi branch, and the value
itself always comes from the evolved amplitudes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np

from .analytic import redshift_deviation
from .core import (
    Constants,
    DecoherenceError,
    DomainError,
    Grid1D,
    MetricParams,
    SamplingError,
    ScenarioError,
    StepSizeError,
    Wavefunction,
    wrap_phase,
)
from .potentials import HamiltonianSpec, free_spec

OVERLAP_THRESHOLD = 0.1


class Observables(NamedTuple):
    norm: float
    mean_x: float
    mean_p: float
    mean_p_sq: float
    energy_expectation: float


def _momentum_moments(psi_k, grid, hbar):
    w = np.abs(psi_k) ** 2
    total = w.sum()
    k = grid.wavenumbers
    return total, hbar * np.dot(k, w) / total, hbar**2 * np.dot(k * k, w) / total


def observables(psi: Wavefunction, constants: Constants) -> Observables:
    """Norm and first moments of a state.

    Position moments are direct sums; momentum moments are spectral sums.
    ``energy_expectation`` is the free kinetic energy ``<p^2>/2m``.
    """
    grid = psi.grid
    dens = np.abs(psi.amplitudes) ** 2
    norm = float(dens.sum() * grid.spacing)
    mean_x = float(np.dot(grid.x, dens) * grid.spacing / norm)
    _, mean_p, mean_p_sq = _momentum_moments(np.fft.fft(psi.amplitudes), grid, constants.hbar)
    return Observables(norm, mean_x, float(mean_p), float(mean_p_sq),
                       float(mean_p_sq / (2.0 * constants.m)))


def momentum_norm(psi: Wavefunction) -> float:
    """Norm evaluated in momentum space (Parseval)."""
    psi_k = np.fft.fft(psi.amplitudes)
    return float(np.vdot(psi_k, psi_k).real * psi.grid.spacing / psi.grid.n_points)


def _normalized_overlap(a, b, dx):
    z = np.vdot(a, b)
    na = np.vdot(a, a).real
    nb = np.vdot(b, b).real
    return complex(z), abs(z) / math.sqrt(na * nb)


def global_phase(psi_ref: Wavefunction, psi: Wavefunction) -> float:
    """``arg <psi_ref|psi>`` in (-pi, pi].

    Raises DecoherenceError when the normalized overlap is below 0.1.
    """
    if psi_ref.grid != psi.grid:
        raise ScenarioError("states live on different grids")
    z, mag = _normalized_overlap(psi_ref.amplitudes, psi.amplitudes, psi.grid.spacing)
    if mag < OVERLAP_THRESHOLD:
        raise DecoherenceError(f"overlap magnitude {mag:.3g} is below {OVERLAP_THRESHOLD}")
    return wrap_phase(math.atan2(z.imag, z.real))


def region_weights(grid: Grid1D, region: Tuple[float, float]) -> np.ndarray:
    """Quadrature weights of ``[lo, hi]`` on the grid: 1 inside, 1/2 on an edge."""
    lo, hi = region
    tol = 1e-12 * grid.length
    if lo < grid.x_min - tol or hi > grid.x_max + tol or hi < lo:
        raise DomainError(f"region {region!r} is not inside the grid")
    if lo <= grid.x_min + tol and hi >= grid.x_max - tol:
        return np.ones(grid.n_points)
    x = grid.x
    w = ((x > lo) & (x < hi)).astype(float)
    w[np.abs(x - lo) <= tol] = 0.5
    w[np.abs(x - hi) <= tol] = 0.5
    return w


def containment_fraction(psi: Wavefunction, region: Tuple[float, float]) -> float:
    """Fraction of the norm inside ``[lo, hi]``; grid points on an edge count half."""
    dens = np.abs(psi.amplitudes) ** 2
    frac = np.dot(region_weights(psi.grid, region), dens) / dens.sum()
    return float(min(max(frac, 0.0), 1.0))


def check_step(spec: HamiltonianSpec, step: float, grid: Grid1D, constants: Constants,
               clock_shift: float = 0.0) -> None:
    """Raise StepSizeError if ``step`` breaks the stability preconditions.

    The scheduled potential must turn by less than pi/4 per step and the
    kinetic phase at the Nyquist wavenumber by less than pi.  The constant
    rest energy is exempt: it is a global phase tracked exactly.
    """
    if not step > 0:
        raise StepSizeError(f"step must be positive, got {step!r}")
    if spec.potential is not None:
        kick = spec.potential.max_abs() * step / constants.hbar
        if kick >= math.pi / 4:
            raise StepSizeError(
                f"potential phase per step {kick:.3g} rad exceeds pi/4; reduce the step"
            )
    nyq = (spec.kinetic_scale * (1.0 + clock_shift) * constants.hbar * grid.k_nyquist**2
           * step / (2.0 * constants.m))
    if nyq >= math.pi:
        raise StepSizeError(
            f"kinetic phase at the Nyquist wavenumber {nyq:.3g} rad exceeds pi; reduce the step"
        )


def max_stable_step(grid: Grid1D, constants: Constants, max_potential: float = 0.0,
                    safety: float = 0.5) -> float:
    """Largest step meeting :func:`check_step` times ``safety``."""
    h = 2.0 * constants.m * math.pi / (constants.hbar * grid.k_nyquist**2)
    if max_potential > 0:
        h = min(h, math.pi / 4 * constants.hbar / max_potential)
    return safety * h


class _CompensatedSum:
    """Neumaier summation; the propagator's phase ledger."""

    def __init__(self):
        self._sum = 0.0
        self._comp = 0.0

    def add(self, x):
        s = self._sum + x
        if abs(self._sum) >= abs(x):
            self._comp += (self._sum - s) + x
        else:
            self._comp += (x - s) + self._sum
        self._sum = s

    @property
    def value(self):
        return self._sum + self._comp


class Propagator:
    """Strang split-step propagator with a fixed coordinate-time step.

    Each step is a half-kick, an exact spectral kinetic step and a second
    half-kick.  The kicks are uniform, hence diagonal in momentum space as
    well, so the state stays in momentum space between steps and position
    amplitudes are synthesized on demand.  This keeps FFT round-off from
    accumulating in the norm.

    ``clock_shift`` lets an arm run its own clock at rate ``1 + clock_shift``:
    the rest energy and the kinetic term then act for that fraction of each
    step while scheduled potentials stay on coordinate time.  The shift is
    passed as a deviation so the small rest-energy difference between arms
    is never formed by cancellation.  ``reference_energy`` is removed per
    unit coordinate time (rotating frame).

    With ``quadrature="exact"`` each half-kick integrates U exactly over its
    half-interval; ``"sampled"`` uses U at the outer step edges, the
    textbook trapezoid form of Strang splitting.
    """

    def __init__(self, psi: Wavefunction, constants: Constants, step: float, *,
                 t0: float = 0.0, reference_energy: float = 0.0,
                 quadrature: str = "exact"):
        if quadrature not in ("exact", "sampled"):
            raise DomainError(f"unknown quadrature {quadrature!r}")
        self.grid = psi.grid
        self.constants = constants
        self.step = step
        self.t0 = t0
        self.reference_energy = reference_energy
        self.quadrature = quadrature
        self.steps_taken = 0
        self._psi_k = np.fft.fft(psi.amplitudes)
        self._psi_x = np.array(psi.amplitudes, dtype=complex)
        self._ledger = _CompensatedSum()
        self._kinetic = {}

    @property
    def t(self) -> float:
        return self.t0 + self.steps_taken * self.step

    @property
    def applied_phase(self) -> float:
        """Total uniform phase applied so far; the state carries ``exp(-i * this)``."""
        return self._ledger.value

    @property
    def amplitudes(self) -> np.ndarray:
        """Position-space amplitudes (read-only view)."""
        if self._psi_x is None:
            self._psi_x = np.fft.ifft(self._psi_k)
        return self._psi_x

    @property
    def momentum_amplitudes(self) -> np.ndarray:
        """Unnormalized discrete Fourier coefficients of the state."""
        return self._psi_k

    def wavefunction(self) -> Wavefunction:
        return Wavefunction(self.amplitudes, self.grid)

    def _kinetic_factor(self, scale):
        K = self._kinetic.get(scale)
        if K is None:
            c = self.constants
            K = np.exp(-1j * scale * c.hbar * self.grid.wavenumbers**2
                       * self.step / (2.0 * c.m))
            self._kinetic[scale] = K
        return K

    def _kick_parts(self, spec, clock_shift):
        h = self.step
        a = self.t
        b = a + h
        mid = a + 0.5 * h
        hbar = self.constants.hbar
        # the common part is bitwise identical across arms and is applied
        # as its own factor so the small per-arm part keeps full precision
        common = (spec.rest_energy - self.reference_energy) * 0.5 * h / hbar
        shifted = spec.rest_energy * clock_shift * 0.5 * h
        if self.quadrature == "exact":
            ua = spec.potential_integral(a, mid)
            ub = spec.potential_integral(mid, b)
        else:
            ua = spec.potential_value(a) * 0.5 * h
            ub = spec.potential_value(b) * 0.5 * h
        return common, (shifted + ua) / hbar, (shifted + ub) / hbar

    def kick_phases(self, spec: HamiltonianSpec, clock_shift: float = 0.0) -> Tuple[float, float]:
        """Phases of the two half-kicks of the next step."""
        common, small_a, small_b = self._kick_parts(spec, clock_shift)
        return common + small_a, common + small_b

    def advance(self, spec: HamiltonianSpec, clock_shift: float = 0.0) -> None:
        common, small_a, small_b = self._kick_parts(spec, clock_shift)
        K = self._kinetic_factor(spec.kinetic_scale * (1.0 + clock_shift))
        # the kicks are scalars, so both half-kicks fold into one factor
        kick = np.exp(-2j * common) * np.exp(-1j * (small_a + small_b))
        self._psi_k = (self._psi_k * K) * kick
        self._psi_x = None
        for theta in (common, small_a, common, small_b):
            self._ledger.add(theta)
        self.steps_taken += 1


class PhaseTracker:
    """Unwraps ``arg <reference(t)|psi(t)>`` sample by sample.

    The propagator's ledger predicts the branch; the measured overlap fixes
    the value.  What remains after removing the ledger is the slow
    kinetic part, unwrapped by increments.
    """

    def __init__(self, reference: Callable[[float], np.ndarray], dx: float):
        self.reference = reference
        self.dx = dx
        self._last = None
        self._rest = 0.0

    def sample(self, t: float, psi: np.ndarray, ledger: float) -> float:
        z, mag = _normalized_overlap(self.reference(t), psi, self.dx)
        if mag < OVERLAP_THRESHOLD:
            raise DecoherenceError(
                f"overlap with the reference fell to {mag:.3g} at t = {t!r}"
            )
        raw = wrap_phase(math.atan2(z.imag, z.real) + ledger)
        if self._last is None:
            self._rest = raw
        else:
            self._rest += wrap_phase(raw - self._last)
        self._last = raw
        return self._rest - ledger


@dataclass(frozen=True, eq=False)
class EvolutionRecord:
    """Observables sampled every ``record_stride`` steps, starting at t0.

    ``global_phases`` is the unwrapped ``arg <psi(t0)|psi(t)>``; it holds
    NaN when phase tracking was switched off.
    """

    times: np.ndarray
    norms: np.ndarray
    mean_positions: np.ndarray
    mean_momenta: np.ndarray
    mean_sq_momenta: np.ndarray
    global_phases: np.ndarray

    def __len__(self):
        return len(self.times)


def _check_sampling(psi, spec, constants, interval, clock_shift):
    obs = observables(psi, constants)
    rate = spec.kinetic_energy(obs.mean_p_sq, constants) * (1.0 + clock_shift) / constants.hbar
    if rate * interval >= math.pi:
        raise SamplingError(
            f"kinetic phase per record {rate * interval:.3g} rad reaches pi; "
            f"reduce record_stride"
        )


def split_step_evolve(psi: Wavefunction, spec: HamiltonianSpec, step: float, n_steps: int,
                      record_stride: int = 1, constants: Constants = Constants(), *,
                      t0: float = 0.0, clock_shift: float = 0.0,
                      reference_energy: float = 0.0, quadrature: str = "exact",
                      track_phase: bool = True) -> Tuple[Wavefunction, EvolutionRecord]:
    """Evolve ``psi`` for ``n_steps`` Strang steps under ``spec``.

    Returns the final state and the record.  Raises StepSizeError when the
    step is unstable, SamplingError when records are too sparse to unwrap
    the phase, and DecoherenceError when ``track_phase`` is on and the state
    stops overlapping its initial value.
    """
    if int(n_steps) != n_steps or n_steps < 0:
        raise DomainError(f"n_steps must be a non-negative integer, got {n_steps!r}")
    if int(record_stride) != record_stride or record_stride < 1:
        raise DomainError(f"record_stride must be a positive integer, got {record_stride!r}")
    if n_steps % record_stride:
        raise DomainError(f"record_stride {record_stride} does not divide n_steps {n_steps}")
    check_step(spec, step, psi.grid, constants, clock_shift)
    if track_phase and n_steps:
        _check_sampling(psi, spec, constants, record_stride * step, clock_shift)

    prop = Propagator(psi, constants, step, t0=t0, reference_energy=reference_energy,
                      quadrature=quadrature)
    start = np.fft.fft(psi.amplitudes)
    tracker = PhaseTracker(lambda t: start, psi.grid.spacing) if track_phase else None
    rows = []

    def record():
        obs = observables(prop.wavefunction(), constants)
        ph = math.nan
        if tracker is not None:
            ph = tracker.sample(prop.t, prop.momentum_amplitudes, prop.applied_phase)
        rows.append((prop.t, obs.norm, obs.mean_x, obs.mean_p, obs.mean_p_sq, ph))

    record()
    for j in range(int(n_steps)):
        prop.advance(spec, clock_shift)
        if (j + 1) % record_stride == 0:
            record()
    cols = [np.array(c) for c in zip(*rows)]
    return prop.wavefunction(), EvolutionRecord(*cols)


def proper_time_evolve(psi: Wavefunction, metric: MetricParams, step: float, n_steps: int,
                       record_stride: int = 1, constants: Constants = Constants(), *,
                       mode: str = "weak-field", **kwargs) -> Tuple[Wavefunction, EvolutionRecord]:
    """Free evolution on the arm's own clock, ``d tau = sqrt(-g_tt) dt``.

    ``step`` and the recorded times are coordinate time.  Equivalent to
    :func:`split_step_evolve` under :func:`~abgrav.potentials.proper_time_spec`.
    """
    shift = redshift_deviation(metric, mode)
    return split_step_evolve(psi, free_spec(constants), step, n_steps, record_stride,
                             constants, clock_shift=shift, **kwargs)
