import math

import numpy as np
import pytest

from abgrav.core import (
    ConstantSegment,
    Constants,
    ContainmentError,
    DomainError,
    GaussianPacket,
    Grid1D,
    MetricParams,
    PhaseComparison,
    PotentialProgram,
    RampSegment,
    ResolutionError,
    Scenario,
    ScenarioError,
    Wavefunction,
    evaluate_program,
    make_gaussian_packet,
    program_integral,
    wrap_phase,
)

from oracles import dft_mean_momentum, midpoint_integral, piecewise

C = Constants()


class TestConstants:
    def test_defaults(self):
        assert (C.hbar, C.c, C.m, C.e) == (1.0, 1.0e3, 1.0, 1.0)
        assert Constants.G == 1.0
        assert C.rest_energy == 1.0e6

    @pytest.mark.parametrize("field", ["hbar", "c", "m", "e"])
    @pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
    def test_rejects_non_positive(self, field, bad):
        with pytest.raises(DomainError):
            Constants(**{field: bad})


class TestGrid:
    def test_spacing_and_wavenumbers(self):
        g = Grid1D(64, 32.0)
        assert g.spacing == 0.5
        k = g.wavenumbers
        assert k.shape == (64,)
        # symmetric about zero, Nyquist entry on the negative side
        assert sorted(k[1:32]) == sorted(-k[33:])
        assert k[32] == pytest.approx(-g.k_nyquist)
        assert g.x[0] == -16.0 and g.x[-1] == 16.0 - 0.5

    @pytest.mark.parametrize("n", [8, 100, 1000, 0, -16])
    def test_rejects_bad_sizes(self, n):
        with pytest.raises(DomainError):
            Grid1D(n, 10.0)

    def test_rejects_bad_length(self):
        with pytest.raises(DomainError):
            Grid1D(64, 0.0)

    def test_arrays_are_read_only(self):
        g = Grid1D(16, 1.0)
        with pytest.raises(ValueError):
            g.x[0] = 1.0


class TestWavefunction:
    def test_norm_and_normalized(self):
        g = Grid1D(16, 4.0)
        psi = Wavefunction(np.full(16, 2.0 + 0j), g)
        assert psi.norm == pytest.approx(16.0)
        assert psi.normalized().norm == pytest.approx(1.0, abs=1e-12)

    def test_shape_checked(self):
        with pytest.raises(DomainError):
            Wavefunction(np.zeros(8), Grid1D(16, 1.0))

    def test_amplitudes_copied_and_frozen(self):
        g = Grid1D(16, 1.0)
        raw = np.ones(16, dtype=complex)
        psi = Wavefunction(raw, g)
        raw[0] = 5.0
        assert psi.amplitudes[0] == 1.0
        with pytest.raises(ValueError):
            psi.amplitudes[0] = 2.0


class TestGaussianPacket:
    def test_symmetric_packet(self):
        g = Grid1D(1024, 200.0)
        psi = make_gaussian_packet(g, 0.0, 5.0, 0.0, C)
        dens = np.abs(psi.amplitudes) ** 2
        assert psi.norm == pytest.approx(1.0, abs=1e-12)
        assert abs(np.dot(g.x, dens) * g.spacing) < g.spacing / 10
        assert abs(dft_mean_momentum(psi.amplitudes, g.spacing)) < 1e-10 / 5.0

    def test_mean_momentum_matches_dft_oracle(self):
        g = Grid1D(1024, 200.0)
        psi = make_gaussian_packet(g, 0.0, 5.0, 2.0, C)
        assert dft_mean_momentum(psi.amplitudes, g.spacing) == pytest.approx(2.0, abs=1e-10)

    def test_offset_centre(self):
        g = Grid1D(1024, 200.0)
        psi = make_gaussian_packet(g, 12.5, 4.0, -1.0, C)
        dens = np.abs(psi.amplitudes) ** 2
        assert np.dot(g.x, dens) * g.spacing == pytest.approx(12.5, abs=g.spacing / 10)

    def test_unresolved_width(self):
        g = Grid1D(1024, 204.8)
        assert g.spacing == pytest.approx(0.2)
        with pytest.raises(ResolutionError):
            make_gaussian_packet(g, 0.0, 0.01, 0.0, C)

    def test_unresolved_momentum(self):
        g = Grid1D(512, 200.0)
        with pytest.raises(ResolutionError):
            make_gaussian_packet(g, 0.0, 5.0, g.k_nyquist, C)

    def test_tail_at_edge(self):
        g = Grid1D(1024, 200.0)
        with pytest.raises(ContainmentError):
            make_gaussian_packet(g, 90.0, 5.0, 0.0, C)
        with pytest.raises(ContainmentError):
            make_gaussian_packet(g, 0.0, 20.0, 0.0, C)


class TestProgram:
    def test_constant_value(self):
        p = PotentialProgram.constant(3.0, 2.0)
        assert evaluate_program(p, 1.3) == 3.0

    def test_ramp_midpoint(self):
        p = PotentialProgram((RampSegment(2.0, 0.0, 1.0),))
        assert evaluate_program(p, 1.0) == pytest.approx(0.5, abs=1e-15)
        assert evaluate_program(p, 0.0) == 0.0
        assert evaluate_program(p, 2.0) == pytest.approx(1.0)

    @pytest.mark.parametrize("t", [-1e-6, 2.0 + 1e-6, 5.0])
    def test_outside_support(self, t):
        p = PotentialProgram.constant(1.0, 2.0)
        with pytest.raises(DomainError):
            evaluate_program(p, t)

    def test_integrals(self):
        assert program_integral(PotentialProgram.constant(2.0, 3.0)) == 6.0
        V, T = 1.7, 2.5
        ramp = PotentialProgram((RampSegment(T, 0.0, V),))
        assert program_integral(ramp) == pytest.approx(V * T / 2, rel=1e-15)

    def test_multi_segment_matches_midpoint_oracle(self):
        segs = [("const", 0.5, 0.0), ("ramp", 1.5, 0.0, 2.0), ("const", 1.0, 2.0),
                ("ramp", 0.7, 2.0, -0.5), ("const", 0.3, -0.5), ("ramp", 1.0, -0.5, 0.0)]
        prog = PotentialProgram(tuple(
            ConstantSegment(s[1], s[2]) if s[0] == "const" else RampSegment(*s[1:])
            for s in segs))
        U, T = piecewise(segs)
        assert T == pytest.approx(prog.duration)
        ref = midpoint_integral(U, T)
        assert program_integral(prog) == pytest.approx(ref, rel=1e-9)
        ts = np.linspace(0, T, 97)
        np.testing.assert_allclose([prog.value(t) for t in ts], U(ts), atol=1e-13)

    def test_partial_integral(self):
        p = PotentialProgram((ConstantSegment(1.0, 2.0), RampSegment(2.0, 2.0, 0.0)))
        assert p.integral(0.0, 0.5) == pytest.approx(1.0)
        assert p.integral(0.5, 3.0) + p.integral(0.0, 0.5) == pytest.approx(p.integral())
        assert p.integral(3.0, 0.5) == pytest.approx(-p.integral(0.5, 3.0))

    def test_additive_over_concatenation(self):
        a = PotentialProgram((RampSegment(1.0, 0.0, 1.0), ConstantSegment(2.0, 1.0)))
        b = PotentialProgram((RampSegment(1.5, 1.0, -3.0),))
        assert program_integral(a + b) == pytest.approx(
            program_integral(a) + program_integral(b), rel=1e-15)

    def test_continuity_at_boundaries(self):
        p = PotentialProgram((ConstantSegment(1.0, 0.0), RampSegment(2.0, 0.0, 1.5),
                              ConstantSegment(1.0, 1.5), RampSegment(2.0, 1.5, 0.0)))
        assert p.is_continuous()
        d = 1e-9 * p.duration
        for edge in p.edges[1:-1]:
            assert abs(p.value(edge + d) - p.value(edge - d)) < 1e-8
            # ramps are C1: one-sided slopes vanish at the joints
            slope = (p.value(edge + d) - p.value(edge)) / d
            assert abs(slope) < 1e-6

    def test_step_program_is_not_continuous(self):
        p = PotentialProgram((ConstantSegment(1.0, 0.0), ConstantSegment(1.0, 1.0)))
        assert not p.is_continuous()

    def test_rejects_empty_and_bad_durations(self):
        with pytest.raises(DomainError):
            PotentialProgram(())
        with pytest.raises(DomainError):
            PotentialProgram((ConstantSegment(0.0, 1.0),))
        with pytest.raises(DomainError):
            PotentialProgram((RampSegment(-1.0, 0.0, 1.0),))

    def test_shift_and_activity(self):
        p = PotentialProgram((ConstantSegment(1.0, 0.0), ConstantSegment(1.0, 2.0)))
        assert p.shifted(1.0).integral() == pytest.approx(p.integral() + 2.0)
        assert not p.is_active(0.0, 1.0)
        assert p.is_active(0.5, 1.5)
        assert PotentialProgram.zero(3.0).is_zero()


class TestMetric:
    def test_validation(self):
        with pytest.raises(DomainError):
            MetricParams(1.0, 0.0, 1.0)
        with pytest.raises(DomainError):
            MetricParams(-1.0, 1.0, 1.0)

    def test_weak_field_flag(self):
        assert MetricParams(0.05, 1.0, 1.0).weak_field
        assert not MetricParams(0.1, 1.0, 1.0).weak_field
        assert MetricParams(1e-3, 2.0, 1e3).compactness == pytest.approx(5e-10)


def _scenario(**kw):
    base = dict(constants=C, grid=Grid1D(256, 100.0), initial_packet=GaussianPacket(),
                arm1_program=PotentialProgram.zero(1.0), arm2_program=PotentialProgram.zero(1.0),
                dwell_time=1.0, route="flat-electric", step_size=0.01)
    base.update(kw)
    return Scenario(**base)


class TestScenario:
    def test_valid(self):
        s = _scenario(record_stride=10)
        assert s.n_steps == 100
        assert s.frame_on
        assert s.region == (-40.0, 40.0)

    def test_unequal_durations(self):
        with pytest.raises(ScenarioError):
            _scenario(arm2_program=PotentialProgram.zero(2.0))

    def test_non_integer_steps(self):
        with pytest.raises(ScenarioError):
            _scenario(step_size=0.03)

    def test_stride_must_divide(self):
        with pytest.raises(ScenarioError):
            _scenario(record_stride=7)

    def test_metric_routes_need_metrics(self):
        with pytest.raises(ScenarioError):
            _scenario(route="newtonian")
        with pytest.raises(ScenarioError):
            _scenario(route="proper-time")

    def test_metric_route_rules(self):
        m = MetricParams(1e-3, 1.0, C.c)
        ok = _scenario(route="semi-covariant", metric1=m, metric2=m, lead_time=0.0)
        assert not ok.frame_on
        with pytest.raises(ScenarioError):
            _scenario(route="semi-covariant", metric1=m, metric2=m,
                      arm1_program=PotentialProgram.constant(1.0, 1.0))
        with pytest.raises(ScenarioError):
            _scenario(route="semi-covariant", metric1=m, metric2=m, lead_time=0.5)
        strong = MetricParams(0.2e6, 1.0, C.c)
        with pytest.raises(ScenarioError):
            _scenario(route="proper-time", metric1=strong, metric2=m)

    def test_unknown_route(self):
        with pytest.raises(ScenarioError):
            _scenario(route="magnetic")


class TestPhaseComparison:
    def test_residuals(self):
        pc = PhaseComparison(7.0, 0.5, 0.0, 0.0)
        assert pc.residual == 6.5
        assert pc.residual_wrapped == pytest.approx(6.5 - 2 * math.pi)
        d = pc.as_dict()
        assert set(d) >= {"numeric_phase", "analytic_phase", "residual", "residual_wrapped",
                          "momentum_drift", "norm_drift"}

    def test_wrap_range(self):
        assert wrap_phase(math.pi) == math.pi
        assert wrap_phase(-math.pi) == math.pi
        assert wrap_phase(3 * math.pi) == pytest.approx(math.pi)
        assert wrap_phase(0.25) == 0.25
