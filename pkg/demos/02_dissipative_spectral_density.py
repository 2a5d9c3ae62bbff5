#!/usr/bin/env python3
"""Frequency-resolved dissipation for a continuous (Debye) bath.

Each state carries its own overdamped spectral density.  The dissipative
potential I(omega) measures how much energy a probe mode at omega would
absorb per unit reorganization energy; weighting it by J(omega)/omega gives
the dissipative spectral density, and combining with populations gives the
time- and frequency-resolved dissipation density.
"""

import os

import numpy as np

import mqmed as mq
from mqmed import svgplot
from mqmed.quadrature import QuadratureSettings

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

lam, wc = 0.3, 1.0
grid = np.linspace(0.02, 10.0, 320)
debye = 2 * lam * wc * grid / (grid ** 2 + wc ** 2)
bath = mq.Bath("sd-table", tables={
    "A": mq.SpectralDensityTable(grid, debye, kind=("A", "A")),
    "B": mq.SpectralDensityTable(grid, 0.8 * debye, kind=("B", "B")),
})
sub = mq.SubsystemSpec(("A", "B"), {"A": 1.0, "B": 0.0}, {("A", "B"): 0.1})
thermal = mq.ThermalSpec(beta=1.0)
settings = QuadratureSettings(rel_tol=1e-9, abs_tol=1e-13)

print(f"reorganization energies: A {bath.tables['A'].reorganization_energy():.4f}, "
      f"B {bath.tables['B'].reorganization_energy():.4f}")

for w in (0.5, 1.0, 2.0):
    ii = mq.dissipative_potential(sub, bath, thermal, "A", "B", w, settings)
    print(f"dissipative potential I(omega={w}) = {ii:.5g}")

omega_grid = np.linspace(0.1, 4.0, 40)
dsd = mq.dissipative_spectral_density(sub, bath, thermal, "A", "B",
                                      omega_grid, settings)
fwd_int, bwd_int = dsd.integrated()
print(f"integrated J^A: forward {fwd_int:.5g}, backward {bwd_int:.5g}")

rs = mq.compute_rateset(sub, bath, thermal, settings)
times = np.linspace(0.0, 6.0 / min(rs.K.values()), 60)
traj = mq.propagate(rs, {"A": 1.0}, times)
pops = {lab: traj.population(lab) for lab in traj.labels}
density = mq.dissipation_density([dsd], pops)

svg = svgplot.heatmap_svg(times, omega_grid, density,
                          title="dissipation density of the A bath",
                          xlabel="t", ylabel="omega")
with open(os.path.join(OUT, "dissipation_density.svg"), "w") as fh:
    fh.write(svg)
print(f"wrote {OUT}/dissipation_density.svg")
