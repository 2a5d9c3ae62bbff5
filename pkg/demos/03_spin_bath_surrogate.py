#!/usr/bin/env python3
"""A qubit relaxing into environmental spins, and its boson surrogate.

Discrete spin traces never decay, so the rate integrals are regularized
with a small artificial damping (stamped in the rate set).  In the
weak-coupling regime the spin bath is equivalent to a harmonic bath whose
spectral density is J_s(omega) tanh(beta omega / 2): the demo computes the
rates three ways and prints the agreement.
"""

import numpy as np

import mqmed as mq
from mqmed.quadrature import QuadratureSettings

e_gap, v, beta, eta = 1.0, 0.3, 1.0, 0.05
omegas = (0.62, 0.81, 1.0, 1.22, 1.41)
gamma_ratio = 0.01

sub = mq.SubsystemSpec(("+", "-"), {"+": e_gap / 2, "-": -e_gap / 2},
                       {("+", "-"): v})
spin_bath = mq.Bath("spin", tuple(mq.SpinMode(w, gamma_ratio * w) for w in omegas))
thermal = mq.ThermalSpec(beta=beta)
settings = QuadratureSettings(rel_tol=1e-10, abs_tol=1e-14, damping_eta=eta)

prof = mq.spin_bath_profiles(spin_bath, thermal)
print("spin-bath reorganization energies:",
      ", ".join(f"{x:.3e}" for x in prof.lambdas), f"(total {prof.total:.3e})")

exact = mq.spin_rates(sub, spin_bath, thermal, settings, variant="exact")
weak = mq.spin_rates(sub, spin_bath, thermal, settings, variant="weak")

# surrogate harmonic bath: lambda_j = (gamma_j^2/omega_j) tanh(beta omega_j/2)
modes = []
for w in omegas:
    lam = (gamma_ratio * w) ** 2 / w * np.tanh(beta * w / 2)
    d = np.sqrt(2 * lam) / w
    modes.append(mq.HarmonicMode(w, {"+": +d, "-": -d}))
surrogate = mq.compute_rateset(sub, mq.Bath("ho-general", tuple(modes)),
                               thermal, settings, method="product")

print(f"\n{'quantity':<16}{'exact spin':>14}{'weak':>14}{'surrogate':>14}{'dev':>10}")
for key in sorted(exact.K):
    e, w_, s = exact.K[key], weak.K[key], surrogate.K[key]
    print(f"K({key[0]}->{key[1]})       {e:14.6e}{w_:14.6e}{s:14.6e}"
          f"{abs(e - s) / s:10.2e}")
for j in range(len(omegas)):
    key = (j, "+", "-")
    e, w_, s = exact.Kdiss[key], weak.Kdiss[key], surrogate.Kdiss[key]
    print(f"Kd[{j}](+->-)    {e:14.6e}{w_:14.6e}{s:14.6e}{abs(e - s) / s:10.2e}")

report = mq.verify_balance(exact, sub, spin_bath, thermal, tolerance=0.05)
print(f"\ndetailed balance at eta={eta}: max deviation {report.max_deviation:.3g} "
      f"({'ok' if report.passed else 'off'} at tolerance 0.05; "
      f"damped rates satisfy balance only as eta -> 0)")
