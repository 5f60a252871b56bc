"""Aharonov-Bohm type phases of two-arm interferometers in uniform potentials.

Electric tubes, electric and gravitational elevators, and weak-field
Schwarzschild arms are simulated with a split-step spectral solver and
compared against closed-form phases.
"""
from .analytic import (
    Trajectory,
    dwell_trajectories,
    electric_ab_phase,
    elevator_phase,
    newtonian_phase,
    proper_time_route_phase,
    redshift_deviation,
    redshift_factor,
    redshift_route_phase,
    weakfield_loop_phase,
)
from .config import ParseError, ValidationError, echo_scenario, load_scenario, parse_scenario
from .core import (
    ABError,
    ConfigurationError,
    ConstantSegment,
    Constants,
    ContainmentError,
    DecoherenceError,
    DomainError,
    GaussianPacket,
    Grid1D,
    MetricParams,
    PhaseComparison,
    PotentialProgram,
    RampSegment,
    ResolutionError,
    SamplingError,
    Scenario,
    ScenarioError,
    StepSizeError,
    Wavefunction,
    WeakFieldError,
    evaluate_program,
    make_gaussian_packet,
    program_integral,
    wrap_phase,
)
from .interferometer import (
    FringePattern,
    fringe_synthesize,
    route_equivalence,
    run_two_arm,
    simulate_two_arm,
)
from .potentials import (
    HamiltonianSpec,
    elevator_program,
    newtonian_program,
    proper_time_spec,
    semi_covariant_spec,
    tube_pulse_program,
)
from .solver import (
    EvolutionRecord,
    containment_fraction,
    global_phase,
    observables,
    proper_time_evolve,
    split_step_evolve,
)

__version__ = "0.1.0"
