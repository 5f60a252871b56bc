"""Reading the relative phase back off a synthetic fringe pattern.

Run with ``python demos/fringe_sweep.py``.  Each run holds arm 1 at a
constant potential theta for unit time, so the arms differ by theta.
"""
import math

import numpy as np

from abgrav import (
    Constants, GaussianPacket, Grid1D, PotentialProgram, Scenario, elevator_program,
    simulate_two_arm,
)

c = Constants()
grid = Grid1D(512, 200.0)
print("  theta     fringe shift")
for theta in np.linspace(-math.pi, math.pi, 9)[1:]:
    sc = Scenario(c, grid, GaussianPacket(), elevator_program(float(theta), 1.0, 0.0, 0.0),
                  PotentialProgram.zero(1.0), 1.0, "flat-electric", 0.01, 1)
    fr = simulate_two_arm(sc).fringes
    print(f"{theta: .4f}   {fr.extracted_shift: .4f}")
