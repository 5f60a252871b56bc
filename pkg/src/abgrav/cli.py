"""Command-line entry point: ``abgrav {analytic,simulate,sweep,compare-routes}``.

Exit codes: 0 success, 1 an ``--assert`` check failed, 2 usage error,
3 the scenario could not be built or simulated.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from importlib import resources
from pathlib import Path
from typing import List, Optional, Sequence

from . import analytic
from .config import echo_scenario, parse_scenario, parse_segments
from .core import ABError, Constants, MetricParams, PhaseComparison, Scenario
from .interferometer import History, route_equivalence, simulate_two_arm

SWEEP_PARAMS = ("dwell", "R2", "M", "amplitude", "step")
# where each sweep parameter lives in a scenario file
_SWEEP_KEYS = {"dwell": ("run", "dwell"), "R2": ("arm2", "radius"),
               "M": ("run", "mass"), "amplitude": ("arm1", "amplitude")}


def fmt(x: float) -> str:
    """Round-trip text for a float (17 significant digits)."""
    return format(float(x), ".17g")


@dataclass
class RunReport:
    scenario_echo: str
    comparison: PhaseComparison
    timing: float
    convergence: Optional[dict] = None

    def as_dict(self) -> dict:
        return {
            "scenario_echo": self.scenario_echo,
            "comparison": self.comparison.as_dict(),
            "timing": self.timing,
            "convergence": self.convergence,
        }


# ---------------------------------------------------------------------------
# scenario loading


def bundled_scenarios() -> List[str]:
    root = resources.files("abgrav") / "scenarios"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def resolve_config(name: str) -> str:
    """Text of a scenario file, or of a bundled scenario given by bare name."""
    path = Path(name)
    if path.is_file():
        return path.read_text(encoding="utf-8")
    stem = name[:-4] if name.endswith(".cfg") else name
    bundled = resources.files("abgrav") / "scenarios" / f"{stem}.cfg"
    if bundled.is_file():
        return bundled.read_text(encoding="utf-8")
    raise FileNotFoundError(
        f"no scenario file {name!r}; bundled scenarios: {', '.join(bundled_scenarios())}"
    )


def halved(scenario: Scenario) -> Scenario:
    """Same scenario at half the step, recording at the same times."""
    return replace(scenario, step_size=0.5 * scenario.step_size,
                   record_stride=2 * scenario.record_stride)


def convergence_pair(scenario: Scenario) -> dict:
    """Richardson pair at ``step`` and ``step / 2``."""
    coarse = simulate_two_arm(scenario, fringes=False).comparison
    fine = simulate_two_arm(halved(scenario), fringes=False).comparison
    ratio = (coarse.history_residual / fine.history_residual
             if fine.history_residual > 0 else math.inf)
    return {
        "step": scenario.step_size,
        "history_residual": coarse.history_residual,
        "half_step": 0.5 * scenario.step_size,
        "half_step_history_residual": fine.history_residual,
        "ratio": ratio,
    }


# ---------------------------------------------------------------------------
# writers


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_history(path: Path, history: History) -> None:
    write_csv(path, History.CSV_COLUMNS, history.rows())


def write_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(data, indent=2, allow_nan=True) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# analytic


def _constants(args) -> Constants:
    return Constants(hbar=args.hbar, c=args.c, m=args.m, e=args.e)


def cmd_analytic(args) -> List[tuple]:
    c = _constants(args)
    f = args.formula
    if f == "electric":
        p1 = parse_segments(args.segments1)
        p2 = parse_segments(args.segments2)
        rows = [("phase", analytic.electric_ab_phase(p1, p2, c))]
    elif f == "elevator":
        rows = [("phase", analytic.elevator_phase(args.V1, args.V2, args.dwell, c))]
    elif f == "newtonian":
        rows = [("phase", analytic.newtonian_phase(args.R1, args.R2, args.dwell, args.M, c))]
    elif f == "weakfield":
        t1, t2 = analytic.dwell_trajectories(args.R1, args.R2, args.dwell, args.leg_time,
                                             args.profile, args.samples)
        rows = [("phase", analytic.weakfield_loop_phase(t1, t2, args.M, c))]
    elif f == "redshift":
        metric = MetricParams(args.M, args.R, c.c)
        exact = analytic.redshift_factor(metric, "exact")
        weak = analytic.redshift_factor(metric, "weak-field")
        rows = [("exact", exact), ("weak_field", weak), ("difference", exact - weak)]
    else:
        rows = [("phase", analytic.proper_time_route_phase(
            args.R1, args.R2, args.dwell, args.M, args.p, c, args.mode))]
    for name, value in rows:
        print(f"{name} = {fmt(value)}")
    return rows


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    scenario = parse_scenario(resolve_config(args.config))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    run = simulate_two_arm(scenario)
    timing = time.perf_counter() - start
    conv = convergence_pair(scenario) if args.convergence else None
    report = RunReport(echo_scenario(scenario), run.comparison, timing, conv)
    write_json(out / "report.json", report.as_dict())
    write_history(out / "history.csv", run.history)
    fr = run.fringes
    write_csv(out / "fringes.csv", ("screen_position", "intensity"),
              zip(fr.screen_positions, fr.intensities))
    cmp_ = run.comparison
    print(f"numeric_phase = {fmt(cmp_.numeric_phase)}")
    print(f"analytic_phase = {fmt(cmp_.analytic_phase)}")
    print(f"residual = {fmt(cmp_.residual)}")
    print(f"fringe_shift = {fmt(fr.extracted_shift)}")
    if conv is not None:
        print(f"convergence_ratio = {fmt(conv['ratio'])}")
    if args.assert_ and abs(cmp_.residual) > args.tol:
        print(f"FAIL: |residual| {abs(cmp_.residual):.3e} exceeds tolerance {args.tol:g}",
              file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# sweep


def sweep_scenarios(text: str, param: str, values: Sequence[float]) -> List[Scenario]:
    """One scenario per value, derived from the configuration text."""
    if param not in SWEEP_PARAMS:
        raise ValueError(f"unknown sweep parameter {param!r}; expected one of {SWEEP_PARAMS}")
    if param == "step":
        base = parse_scenario(text)
        out = []
        for h in values:
            ratio = base.step_size / h
            stride = base.record_stride * ratio
            if abs(stride - round(stride)) > 1e-9 * stride or round(stride) < 1:
                stride = 1
            out.append(replace(base, step_size=h, record_stride=int(round(stride))))
        return out
    section, key = _SWEEP_KEYS[param]
    out = []
    for v in values:
        cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        cp.read_string(text)
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, key, repr(float(v)))
        buf = io.StringIO()
        cp.write(buf)
        out.append(parse_scenario(buf.getvalue()))
    return out


def _sweep_one(scenario: Scenario) -> PhaseComparison:
    return simulate_two_arm(scenario, fringes=False).comparison


def run_sweep(scenarios: Sequence[Scenario], workers: int = 1) -> List[PhaseComparison]:
    """Run independent scenarios; results come back in input order."""
    if workers <= 1 or len(scenarios) <= 1:
        return [_sweep_one(s) for s in scenarios]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_one, scenarios))


def cmd_sweep(args) -> int:
    text = resolve_config(args.config)
    values = [float(v) for v in args.values.split(",") if v.strip()]
    scenarios = sweep_scenarios(text, args.param, values)
    results = run_sweep(scenarios, args.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = [(v, r.numeric_phase, r.analytic_phase, r.residual, r.history_residual)
            for v, r in zip(values, results)]
    write_csv(out / "sweep.csv",
              ("value", "numeric_phase", "analytic_phase", "residual", "history_residual"),
              rows)
    for row in rows:
        print(",".join(fmt(x) for x in row))
    if args.assert_ and any(abs(r.residual) > args.tol for r in results):
        print(f"FAIL: a residual exceeds tolerance {args.tol:g}", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# compare-routes


def cmd_compare_routes(args) -> int:
    scenario = parse_scenario(resolve_config(args.config))
    eq = route_equivalence(scenario)
    for name, value in asdict(eq).items():
        print(f"{name} = {fmt(value)}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "routes.json", asdict(eq))
    # the toggled-correction expectation is a leading-order scale
    allowed = max(args.tol, 0.05 * abs(eq.expected_difference))
    if args.assert_ and abs(eq.difference - eq.expected_difference) > allowed:
        print("FAIL: route difference outside the expected bound", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="abgrav", description=(
        "Phase shifts of two-arm interferometers in uniform electric and "
        "gravitational potentials."))
    sub = ap.add_subparsers(dest="command", required=True)

    an = sub.add_parser("analytic", help="closed-form phases")
    an.add_argument("formula", choices=("electric", "elevator", "newtonian", "weakfield",
                                        "redshift", "proper-time"))
    for name, default in (("hbar", 1.0), ("c", 1.0e3), ("m", 1.0), ("e", 1.0)):
        an.add_argument(f"--{name}", type=float, default=default)
    an.add_argument("--segments1", default="const:1:0", help="arm 1 program (electric)")
    an.add_argument("--segments2", default="const:1:0", help="arm 2 program (electric)")
    an.add_argument("--V1", type=float, default=0.0)
    an.add_argument("--V2", type=float, default=0.0)
    an.add_argument("--R1", type=float, default=1.0)
    an.add_argument("--R2", type=float, default=2.0)
    an.add_argument("--R", type=float, default=1.0)
    an.add_argument("--M", type=float, default=0.0)
    an.add_argument("--dwell", type=float, default=0.0)
    an.add_argument("--p", type=float, default=0.0, help="packet momentum")
    an.add_argument("--mode", choices=("weak-field", "exact"), default="weak-field")
    an.add_argument("--leg-time", type=float, default=1.0)
    an.add_argument("--profile", choices=tuple(analytic.LEG_PROFILES), default="linear")
    an.add_argument("--samples", type=int, default=64, help="samples per leg")

    def common(p, out_required=True):
        p.add_argument("--config", required=True,
                       help="scenario file or bundled name (" + ", ".join(bundled_scenarios()) + ")")
        p.add_argument("--out", required=out_required)
        p.add_argument("--assert", dest="assert_", action="store_true",
                       help="exit 1 when the residual exceeds --tol")
        p.add_argument("--tol", type=float, default=1e-6)

    sim = sub.add_parser("simulate", help="run one scenario and write report and CSVs")
    common(sim)
    sim.add_argument("--convergence", action="store_true",
                     help="add a Richardson pair at step and step/2")

    sw = sub.add_parser("sweep", help="run a scenario over a list of parameter values")
    common(sw)
    sw.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    sw.add_argument("--values", required=True, help="comma-separated values")
    sw.add_argument("--workers", type=int, default=1)

    cr = sub.add_parser("compare-routes", help="semi-covariant versus proper-time route")
    common(cr, out_required=False)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "analytic":
            cmd_analytic(args)
            return 0
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        return cmd_compare_routes(args)
    except (ABError, ValueError, FileNotFoundError) as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 3
