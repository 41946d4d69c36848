"""
Normal modes of the big-mass register
=====================================

N unit oscillators hang off one big oscillator.  Only the centre of mass of
the register talks to the big mass, so the spectrum is two coupled modes plus
an (N-1)-fold degenerate unit frequency.
"""
import numpy as np

from wavesearch import oscillators as osc

n = 6
for family in ("A", "B"):
    for p in (1, 2):
        params = osc.family_params(family, p, n)
        sp = osc.spectral(params)
        print(f"family {family} p={p}: M={params.big_mass:.4f} K={params.big_spring:.4f}"
              f"  w+={sp.omega_plus:.6f} w-={sp.omega_minus:.6f}")

# brute-force check against the full (N+1) x (N+1) eigenproblem
params = osc.family_params("A", 1, n)
stiff = np.zeros((n + 1, n + 1))
stiff[0, 0] = params.big_spring + n
stiff[0, 1:] = stiff[1:, 0] = -1
stiff[1:, 1:] = np.eye(n)
w = 1 / np.sqrt(np.r_[params.big_mass, np.ones(n)])
print("full eigenvalues:", np.round(np.linalg.eigvalsh(w[:, None] * stiff * w), 10))

# energy bookkeeping and the focusing bound
start = osc.initial_conditions("uniform", 1.0, params)
print("energy at start:", osc.total_energy(start, params))
print("max gain from uniform start:", osc.max_gain(start, 0))
