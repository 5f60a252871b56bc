"""Randomized checks of the structural properties of the model."""
import cmath
import math

import numpy as np
from hypothesis import given, settings, strategies as st

from abgrav.analytic import (
    dwell_trajectories,
    electric_ab_phase,
    newtonian_phase,
    proper_time_route_phase,
    redshift_factor,
    weakfield_loop_phase,
)
from abgrav.core import (
    ConstantSegment,
    Constants,
    Grid1D,
    MetricParams,
    PotentialProgram,
    RampSegment,
    make_gaussian_packet,
    wrap_phase,
)
from abgrav.interferometer import fringe_synthesize
from abgrav.potentials import HamiltonianSpec
from abgrav.solver import global_phase, split_step_evolve

from oracles import piecewise, quad_integral

C = Constants()
SMALL = Grid1D(256, 100.0)

levels = st.floats(-5.0, 5.0, allow_nan=False)
durations = st.floats(0.05, 3.0, allow_nan=False)
segment = st.one_of(st.builds(ConstantSegment, durations, levels),
                    st.builds(RampSegment, durations, levels, levels))
programs = st.lists(segment, min_size=1, max_size=5).map(lambda s: PotentialProgram(tuple(s)))


def as_oracle_segments(program):
    out = []
    for seg in program.segments:
        if isinstance(seg, RampSegment):
            out.append(("ramp", seg.duration, seg.start, seg.end))
        else:
            out.append(("const", seg.duration, seg.level))
    return out


def matched_zero(program):
    return PotentialProgram.zero(program.duration)


@given(programs, programs)
def test_integral_additive_over_concatenation(a, b):
    assert math.isclose((a + b).integral(), a.integral() + b.integral(),
                        rel_tol=1e-12, abs_tol=1e-12)


@given(programs)
def test_integral_matches_quadrature(p):
    U, T = piecewise(as_oracle_segments(p))
    ref = quad_integral(U, T, breakpoints=p.edges[1:-1])
    assert math.isclose(p.integral(), ref, rel_tol=1e-9, abs_tol=1e-9)


@given(programs, st.floats(-100.0, 100.0))
def test_offset_gauge(p, v0):
    q = matched_zero(p)
    base = electric_ab_phase(p, q, C)
    shifted = electric_ab_phase(p.shifted(v0), q.shifted(v0), C)
    scale = abs(v0) * p.duration + abs(base) + 1.0
    assert abs(shifted - base) <= 1e-13 * scale


@given(programs, programs)
def test_electric_antisymmetry(a, b):
    b = PotentialProgram(b.segments + (ConstantSegment(1.0, 0.0),))
    # stretch both programs to a common duration
    pad = a.duration - b.duration
    if pad > 0:
        b = b + PotentialProgram.zero(pad)
    elif pad < 0:
        a = a + PotentialProgram.zero(-pad)
    if not math.isclose(a.duration, b.duration, rel_tol=0, abs_tol=1e-12):
        return
    assert electric_ab_phase(a, b, C) == -electric_ab_phase(b, a, C)


radii = st.floats(0.5, 20.0)


@given(radii, radii, st.floats(0.0, 50.0), st.floats(0.0, 10.0))
def test_newtonian_antisymmetry(r1, r2, dwell, M):
    assert newtonian_phase(r1, r2, dwell, M, C) == -newtonian_phase(r2, r1, dwell, M, C)


@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_wrap_range(phi):
    w = wrap_phase(phi)
    assert -math.pi < w <= math.pi
    assert abs(math.remainder(w - phi, 2 * math.pi)) < 1e-9


@given(st.floats(1e-8, 0.1, exclude_max=True))
def test_redshift_taylor_bound(x):
    m = MetricParams(x, 1.0, 1.0)
    assert abs(redshift_factor(m, "exact") - redshift_factor(m, "weak-field")) <= x * x


@given(radii, radii, st.floats(0.5, 20.0), st.floats(0.05, 0.95),
       st.sampled_from(["linear", "cosine", "smoothstep", "overshoot"]))
def test_loop_additivity(r1, r2, dwell, frac, profile):
    t1, t2 = dwell_trajectories(r1, r2, dwell, profile=profile)
    whole = weakfield_loop_phase(t1, t2, 1e-3, C)
    lo, hi = t1.span
    # cut on a sample so the trapezoid rule splits exactly
    idx = max(1, min(len(t1.times) - 2, int(frac * (len(t1.times) - 1))))
    cut = float(t1.times[idx])
    a1, b1 = t1.split(cut)
    a2, b2 = t2.split(cut)
    parts = weakfield_loop_phase(a1, a2, 1e-3, C) + weakfield_loop_phase(b1, b2, 1e-3, C)
    assert abs(parts - whole) < 1e-12
    assert lo < cut < hi


@given(radii, radii, st.floats(0.1, 20.0), st.floats(0.0, 1e-2), st.floats(-10.0, 10.0))
def test_proper_time_correction_algebra(r1, r2, dwell, M, p):
    val = proper_time_route_phase(r1, r2, dwell, M, p, C)
    x1, x2 = M / (r1 * C.c**2), M / (r2 * C.c**2)
    corr = (x2 - x1) * p * p / (2 * C.m) * dwell / C.hbar
    ref = newtonian_phase(r1, r2, dwell, M, C) + corr
    assert math.isclose(val, ref, rel_tol=1e-12, abs_tol=1e-15)


small_programs = st.lists(
    st.one_of(st.builds(ConstantSegment, st.sampled_from([0.5, 1.0]), st.floats(-2.0, 2.0)),
              st.builds(RampSegment, st.sampled_from([0.5, 1.0]), st.floats(-2.0, 2.0),
                        st.floats(-2.0, 2.0))),
    min_size=1, max_size=3).map(lambda s: PotentialProgram(tuple(s)))


@settings(max_examples=15)
@given(small_programs, st.floats(-1.5, 1.5))
def test_unitarity_ehrenfest_phase_law(prog, p0):
    h = 0.01
    n = round(prog.duration / h)
    psi = make_gaussian_packet(SMALL, 0.0, 4.0, p0, C)
    spec = HamiltonianSpec(1.0, 0.0, prog)
    out, rec = split_step_evolve(psi, spec, h, n, 10, C)
    free, _ = split_step_evolve(psi, HamiltonianSpec(1.0, 0.0), h, n, 10, C)
    assert np.max(np.abs(rec.norms - 1.0)) < 1e-12
    assert np.max(np.abs(rec.mean_momenta - rec.mean_momenta[0])) < 1e-10
    ref = free.amplitudes * np.exp(-1j * prog.integral() / C.hbar)
    assert np.max(np.abs(out.amplitudes - ref)) < 1e-10


@settings(max_examples=15)
@given(st.floats(0.1, 1.0), st.floats(-1.0, 1.0))
def test_kinetic_scale_identity(kappa, p0):
    psi = make_gaussian_packet(SMALL, 0.0, 4.0, p0, C)
    a, _ = split_step_evolve(psi, HamiltonianSpec(kappa, 0.0), 0.01, 100, 10, C,
                             track_phase=False)
    b, _ = split_step_evolve(psi, HamiltonianSpec(1.0, 0.0), 0.01 * kappa, 100, 10, C,
                             track_phase=False)
    assert np.max(np.abs(a.amplitudes - b.amplitudes)) < 1e-12


@given(st.floats(-math.pi, math.pi, exclude_min=True))
def test_fringe_extraction_tracks_phase(theta):
    psi = make_gaussian_packet(SMALL, 0.0, 4.0, 0.0, C)
    arm2 = psi * cmath.exp(1j * theta)
    fp = fringe_synthesize(psi, arm2, 1.0, C)
    assert abs(math.remainder(fp.extracted_shift - global_phase(psi, arm2), 2 * math.pi)) < 0.01
    assert np.all(fp.intensities >= 0)
