"""Gravitational analog: two elevators parked at different heights.

Run with ``python demos/gravity_routes.py``.  The Newtonian potential
version is compared with the two relativistic treatments, and the
velocity-dependent correction is switched off to expose its size.
"""
from dataclasses import replace

from abgrav import parse_scenario, route_equivalence, run_two_arm
from abgrav.cli import resolve_config

newt = run_two_arm(parse_scenario(resolve_config("newtonian")))
print(f"newtonian route: dphi = {newt.numeric_phase:.12e}  (analytic {newt.analytic_phase:.12e})")

for name in ("schwarzschild_semi", "schwarzschild_tau"):
    r = run_two_arm(parse_scenario(resolve_config(name)))
    print(f"{name:>19}: dphi = {r.numeric_phase:.12e}  residual {r.residual:.1e}")

sc = parse_scenario(resolve_config("schwarzschild_semi"))
for flag in (True, False):
    eq = route_equivalence(replace(sc, include_correction=flag))
    print(f"correction {'on ' if flag else 'off'}: semi - proper = {eq.difference:.6e}"
          f"  (expected {eq.expected_difference:.6e})")
