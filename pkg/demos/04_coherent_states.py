"""
Coherent states and a wall
==========================

A tap is a hard wall at x = 0.  The half-oscillator state is the difference
between a coherent packet and its mirror image, which keeps a node at the
wall for all times.
"""
import math

import numpy as np

from wavesearch import coherent

s = coherent.CoherentState(1.0 + 0.5j)
e = coherent.expectations(s)
print(f"dx={e.delta_x:.6f} dp={e.delta_p:.6f} product={e.delta_x * e.delta_p:.3f} energy={e.energy}")

# <x>(t) follows the classical orbit
for t in np.linspace(0, 2 * math.pi, 5):
    st = coherent.evolve_coherent(s, t)
    x = coherent.quadrature_grid(coherent.expectations(st).x, st.delta_x)
    rho = np.abs(coherent.wavepacket_at(st, x)) ** 2
    mean = np.sum(x * rho) / np.sum(rho)
    print(f"t={t:5.3f}  <x>={mean:+.6f}  classical={float(coherent.classical_trajectory(e.x, e.p, t)):+.6f}")

# the tapped state
tapped = coherent.tapped_state(-2.0)
print("normalization C:", tapped.normalization)
x = np.linspace(-8, 0, 2001)
for t in np.linspace(0, 2 * math.pi, 9):
    psi = coherent.tapped_wavefunction_at(tapped.evolve(t), x)
    print(f"t={t:5.3f}  |psi(0)|={abs(psi[-1]):.1e}  half-line norm={np.sum(np.abs(psi) ** 2) * (x[1] - x[0]):.6f}")

# only odd Fock states survive the wall
c = coherent.number_coefficients(tapped)
print("|c_n|^2 for n < 8 (full-line basis, total 2):", np.round(np.abs(c[:8]) ** 2, 5))
