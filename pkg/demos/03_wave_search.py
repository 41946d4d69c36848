"""
Search with classical waves
===========================

Tapping the target oscillator flips its velocity (the oracle) and letting
the tuned system evolve for half a period reflects the velocities about
their mean.  Register velocities then track the search amplitudes exactly.
"""
import math

import numpy as np

from wavesearch import engine, search
from wavesearch import oscillators as osc

n = 16
params = osc.family_params("B", 1, n)
q = search.optimal_queries(n).q_optimal
traj, report = engine.run_search(params, 5, queries=q, samples_per_interval=8)

print(f"N={n}, Q={q}, tap interval {traj.extras['interval'] / math.pi:.0f} pi")
for i in traj.at_taps():
    print(f"  t={traj.times[i]:7.4f}  target energy share {traj.target_fraction[i]:.6f}")
print("gain:", report.realized_gain, "bound:", report.max_gain)

# the same run with the fixed-step integrator
numeric, _ = engine.run_search(params, 5, queries=q, method="numeric")
print("numeric - exact:", abs(numeric.target_fraction[-1] - traj.target_fraction[-1]))

# running the schedule backwards spreads a focused excitation evenly
reverse = engine.run_reverse(osc.family_params("B", 1, 4), 0, 1)
print("reverse, N=4:", reverse.kinetic_fractions(-1))

# stopping at a random tap instant keeps only half of the peak on average
print("random stop, mean/max:", engine.random_stop_gain(osc.family_params("B", 1, 4), 0, 10_000))

# several marked items with the same tuning
multi, _ = engine.run_search(params, [1, 5, 9, 13], queries=1)
print("4 targets out of 16 after one tap:", multi.target_fraction[-1])

# mistimed taps are refused
try:
    engine.run_search(params, 0, queries=2, interval=1.0)
except Exception as exc:
    print(type(exc).__name__, exc)
