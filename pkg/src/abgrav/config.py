"""Scenario files: an INI-style key/value format read with :mod:`configparser`.

Units are natural: hbar, m and e default to 1, Newton's G is 1, and c
defaults to 1000.  Times, lengths and energies are in those units; arm
``level`` and ``amplitude`` values are potential energies.

Schema (every key is optional unless marked)::

    [constants]  hbar, c, m, e
    [grid]       n_points (power of two), length
    [packet]     center, width, momentum
    [run]        route          flat-electric | newtonian | semi-covariant | proper-time
                 dwell          dwell time; required unless arms fix it
                 lead, tail     zero-potential time before and after (default 0)
                 mass           central mass M for the gravitational routes
                 step           time step (default: largest stable step that
                                lands on every schedule breakpoint)
                 record_stride  steps per record (default: about 500 records)
                 rotating_frame auto | true | false
                 include_correction  true | false
                 redshift_mode  weak-field | exact
                 quadrature     exact | sampled
                 tube           "lo, hi" interaction region (default 80% of grid)
                 fringe_kick    detector momentum kick (default: automatic)
    [arm1], [arm2]
                 kind           pulse | elevator | newtonian | segments | none
                 amplitude, ramp, plateau          (pulse; plateau defaults to dwell)
                 level                             (elevator)
                 radius                            (newtonian and metric routes)
                 segments  "const:DUR:LEVEL, ramp:DUR:FROM:TO, ..."
                           the complete program; lead and tail are not added

The arm ``kind`` defaults to pulse on the flat-electric route, newtonian on
the newtonian route and none on the metric routes.  :func:`echo_scenario`
writes the fully resolved scenario with explicit segments, and parsing the
echo reproduces an equal :class:`~abgrav.core.Scenario`.
"""
from __future__ import annotations

import configparser
import io
import math
from fractions import Fraction
from pathlib import Path
from typing import Dict, Optional, Union

from .core import (
    ABError,
    ConfigurationError,
    ConstantSegment,
    Constants,
    GaussianPacket,
    Grid1D,
    METRIC_ROUTES,
    MetricParams,
    PotentialProgram,
    RampSegment,
    ROUTES,
    Scenario,
)
from .potentials import elevator_program, newtonian_program, tube_pulse_program
from .solver import max_stable_step


class ParseError(ConfigurationError):
    """Malformed text, unknown section or key, or a value of the wrong type."""


class ValidationError(ConfigurationError):
    """Well-formed configuration describing an invalid scenario."""


SCHEMA = {
    "constants": {"hbar", "c", "m", "e"},
    "grid": {"n_points", "length"},
    "packet": {"center", "width", "momentum"},
    "run": {"route", "dwell", "lead", "tail", "mass", "step", "record_stride",
            "rotating_frame", "include_correction", "redshift_mode", "quadrature",
            "tube", "fringe_kick"},
    "arm1": {"kind", "amplitude", "ramp", "plateau", "level", "radius", "segments"},
    "arm2": {"kind", "amplitude", "ramp", "plateau", "level", "radius", "segments"},
}
ARM_KINDS = ("pulse", "elevator", "newtonian", "segments", "none")
TARGET_RECORDS = 500


def _parser() -> configparser.ConfigParser:
    return configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))


class _Section:
    """Typed access to the values of one section."""

    def __init__(self, name: str, items: Dict[str, str]):
        self.name = name
        self.items = items

    def _raw(self, key):
        return self.items.get(key)

    def float(self, key, default=None):
        raw = self._raw(key)
        if raw is None:
            return default
        try:
            value = float(raw)
        except ValueError:
            raise ParseError(f"[{self.name}] {key} = {raw!r} is not a number") from None
        if not math.isfinite(value):
            raise ParseError(f"[{self.name}] {key} must be finite")
        return value

    def int(self, key, default=None):
        raw = self._raw(key)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise ParseError(f"[{self.name}] {key} = {raw!r} is not an integer") from None

    def str(self, key, default=None):
        raw = self._raw(key)
        return default if raw is None else raw.strip()

    def bool(self, key, default=None, allow_auto=False):
        raw = self._raw(key)
        if raw is None:
            return default
        word = raw.strip().lower()
        if allow_auto and word == "auto":
            return None
        if word in ("true", "yes", "on", "1"):
            return True
        if word in ("false", "no", "off", "0"):
            return False
        raise ParseError(f"[{self.name}] {key} = {raw!r} is not a boolean")

    def auto_float(self, key):
        raw = self._raw(key)
        if raw is None or raw.strip().lower() == "auto":
            return None
        return self.float(key)


def _read(text: str) -> Dict[str, _Section]:
    cp = _parser()
    try:
        cp.read_string(text)
    except configparser.Error as err:
        raise ParseError(f"malformed configuration: {err}") from None
    sections = {}
    for name in cp.sections():
        if name not in SCHEMA:
            raise ParseError(f"unknown section [{name}]")
        items = dict(cp.items(name))
        for key in items:
            if key not in SCHEMA[name]:
                raise ParseError(f"unknown key {key!r} in section [{name}]")
        sections[name] = _Section(name, items)
    for name in SCHEMA:
        sections.setdefault(name, _Section(name, {}))
    return sections


def parse_segments(text: str) -> PotentialProgram:
    """Parse ``"const:DUR:LEVEL, ramp:DUR:FROM:TO, ..."`` into a program."""
    segs = []
    for item in text.split(","):
        parts = [p.strip() for p in item.strip().split(":")]
        try:
            if parts[0] == "const" and len(parts) == 3:
                segs.append(ConstantSegment(float(parts[1]), float(parts[2])))
            elif parts[0] == "ramp" and len(parts) == 4:
                segs.append(RampSegment(float(parts[1]), float(parts[2]), float(parts[3])))
            else:
                raise ValueError
        except ValueError:
            raise ParseError(f"bad segment {item.strip()!r}; expected const:DUR:LEVEL "
                             f"or ramp:DUR:FROM:TO") from None
    return PotentialProgram(tuple(segs))


def format_segments(program: PotentialProgram) -> str:
    out = []
    for seg in program.segments:
        if isinstance(seg, RampSegment):
            out.append(f"ramp:{seg.duration!r}:{seg.start!r}:{seg.end!r}")
        else:
            out.append(f"const:{seg.duration!r}:{seg.level!r}")
    return ", ".join(out)


def _arm_program(sec: _Section, route, dwell, lead, tail, mass, constants):
    default_kind = {"flat-electric": "pulse", "newtonian": "newtonian"}.get(route, "none")
    kind = sec.str("kind", default_kind)
    if kind not in ARM_KINDS:
        raise ParseError(f"[{sec.name}] kind = {kind!r}; expected one of {ARM_KINDS}")
    if kind == "segments":
        text = sec.str("segments")
        if not text:
            raise ParseError(f"[{sec.name}] kind = segments needs a segments key")
        return parse_segments(text)
    if kind == "pulse":
        ramp = sec.float("ramp", 1.0)
        plateau = sec.float("plateau", dwell)
        if plateau is None:
            raise ValidationError(f"[{sec.name}] pulse needs a plateau or [run] dwell")
        return tube_pulse_program(sec.float("amplitude", 0.0), ramp, plateau, lead, tail)
    if dwell is None:
        raise ValidationError(f"[{sec.name}] kind = {kind} needs [run] dwell")
    if kind == "elevator":
        return elevator_program(sec.float("level", 0.0), dwell, lead, tail)
    if kind == "newtonian":
        radius = sec.float("radius")
        if radius is None:
            raise ValidationError(f"[{sec.name}] newtonian arm needs a radius")
        return newtonian_program(radius, mass, dwell, constants, lead, tail)
    return PotentialProgram.zero(lead + dwell + tail)


def _breakpoint_unit(times) -> Fraction:
    fracs = []
    for t in times:
        if t == 0:
            continue
        f = Fraction(t).limit_denominator(10**6)
        if abs(float(f) - t) > 1e-12 * max(abs(t), 1.0):
            raise ValidationError(
                f"breakpoint {t!r} is not a simple fraction; set [run] step explicitly"
            )
        fracs.append(f)
    den = 1
    for f in fracs:
        den = den * f.denominator // math.gcd(den, f.denominator)
    num = 0
    for f in fracs:
        num = math.gcd(num, int(f * den))
    return Fraction(num, den)


def default_step(grid: Grid1D, constants: Constants, breakpoints, max_potential: float) -> float:
    """Largest stable step that divides every schedule breakpoint."""
    h_max = max_stable_step(grid, constants, max_potential)
    unit = _breakpoint_unit(breakpoints)
    n = math.ceil(float(unit) / h_max)
    return float(unit / n)


def default_stride(n_steps: int, step: float, phase_rate: float) -> int:
    """Divisor of ``n_steps`` giving a record count closest to ~500 (in ratio)
    while keeping the phase change per record under a quarter turn."""
    divisors = [d for d in range(1, n_steps + 1) if n_steps % d == 0]
    ok = [d for d in divisors if phase_rate * d * step < 0.5 * math.pi] or [1]
    return min(ok, key=lambda d: (abs(math.log(n_steps / d / TARGET_RECORDS)), d))


def _pair(sec, key):
    raw = sec.str(key)
    if raw is None or raw.lower() == "auto":
        return None
    try:
        lo, hi = (float(v) for v in raw.split(","))
    except ValueError:
        raise ParseError(f"[{sec.name}] {key} = {raw!r} must be 'lo, hi'") from None
    return (lo, hi)


def parse_scenario(text: str) -> Scenario:
    """Build a validated Scenario from configuration text.

    Raises ParseError for unknown keys or malformed values and
    ValidationError when the values violate a scenario invariant.
    """
    s = _read(text)
    try:
        return _build(s)
    except ConfigurationError:
        raise
    except (ABError, ValueError) as err:
        raise ValidationError(str(err)) from err


def _build(s) -> Scenario:
    constants = Constants(
        hbar=s["constants"].float("hbar", 1.0),
        c=s["constants"].float("c", 1.0e3),
        m=s["constants"].float("m", 1.0),
        e=s["constants"].float("e", 1.0),
    )
    grid = Grid1D(s["grid"].int("n_points", 4096), s["grid"].float("length", 400.0))
    packet = GaussianPacket(
        s["packet"].float("center", 0.0),
        s["packet"].float("width", 5.0),
        s["packet"].float("momentum", 0.0),
    )
    run = s["run"]
    route = run.str("route", "flat-electric")
    if route not in ROUTES:
        raise ParseError(f"[run] route = {route!r}; expected one of {ROUTES}")
    dwell = run.float("dwell")
    lead = run.float("lead", 0.0)
    tail = run.float("tail", 0.0)
    mass = run.float("mass", 0.0)
    programs = [_arm_program(s[a], route, dwell, lead, tail, mass, constants)
                for a in ("arm1", "arm2")]

    metrics = [None, None]
    if route != "flat-electric":
        for i, arm in enumerate(("arm1", "arm2")):
            radius = s[arm].float("radius")
            if radius is None:
                raise ValidationError(f"route {route!r} needs [{arm}] radius")
            metrics[i] = MetricParams(mass, radius, constants.c)
    if dwell is None:
        dwell = programs[0].duration - lead - tail

    breakpoints = set(programs[0].edges) | set(programs[1].edges) | {lead, lead + dwell}
    max_u = max(p.max_abs() for p in programs)
    shift = 0.0
    if route in METRIC_ROUTES:
        shift = max(constants.m * mass / m.R for m in metrics)
    step = run.float("step")
    if step is None:
        step = default_step(grid, constants, sorted(breakpoints), max(max_u, shift))

    stride = run.int("record_stride")
    if stride is None:
        n = round(programs[0].duration / step)
        rate = (2.0 * max_u + 2.0 * shift) / constants.hbar
        stride = default_stride(n, step, rate)

    return Scenario(
        constants=constants,
        grid=grid,
        initial_packet=packet,
        arm1_program=programs[0],
        arm2_program=programs[1],
        dwell_time=dwell,
        route=route,
        step_size=step,
        record_stride=stride,
        metric1=metrics[0],
        metric2=metrics[1],
        lead_time=lead,
        rotating_frame=run.bool("rotating_frame", None, allow_auto=True),
        include_correction=run.bool("include_correction", True),
        redshift_mode=run.str("redshift_mode", "weak-field"),
        quadrature=run.str("quadrature", "exact"),
        tube=_pair(run, "tube"),
        fringe_kick=run.auto_float("fringe_kick"),
    )


def load_scenario(path: Union[str, Path]) -> Scenario:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


def _fmt_bool(value: Optional[bool]) -> str:
    return "auto" if value is None else ("true" if value else "false")


def echo_scenario(scenario: Scenario) -> str:
    """Fully resolved configuration text; parses back to an equal scenario."""
    sc = scenario
    c = sc.constants
    lead = sc.lead_time
    dwell = sc.dwell_time
    cp = _parser()
    cp["constants"] = {"hbar": repr(c.hbar), "c": repr(c.c), "m": repr(c.m), "e": repr(c.e)}
    cp["grid"] = {"n_points": str(sc.grid.n_points), "length": repr(sc.grid.length)}
    pk = sc.initial_packet
    cp["packet"] = {"center": repr(pk.center), "width": repr(pk.width),
                    "momentum": repr(pk.momentum)}
    run = {
        "route": sc.route,
        "dwell": repr(dwell),
        "lead": repr(lead),
        "step": repr(sc.step_size),
        "record_stride": str(sc.record_stride),
        "rotating_frame": _fmt_bool(sc.rotating_frame),
        "include_correction": _fmt_bool(sc.include_correction),
        "redshift_mode": sc.redshift_mode,
        "quadrature": sc.quadrature,
        "tube": "auto" if sc.tube is None else f"{sc.tube[0]!r}, {sc.tube[1]!r}",
        "fringe_kick": "auto" if sc.fringe_kick is None else repr(sc.fringe_kick),
    }
    if sc.metric1 is not None:
        run["mass"] = repr(sc.metric1.M)
    cp["run"] = run
    for name, program, metric in (("arm1", sc.arm1_program, sc.metric1),
                                  ("arm2", sc.arm2_program, sc.metric2)):
        arm = {"kind": "segments", "segments": format_segments(program)}
        if metric is not None:
            arm["radius"] = repr(metric.R)
        cp[name] = arm
    buf = io.StringIO()
    buf.write("# resolved scenario; natural units, G = 1\n")
    cp.write(buf)
    return buf.getvalue()
