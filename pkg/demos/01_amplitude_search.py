"""
Amplitude amplification on an abstract register
===============================================

Two reflections, one about the marked item and one about the mean, rotate
the uniform state toward the target.  The overlap follows sin^2((2q+1) theta).
"""
import numpy as np

from wavesearch import search

n = 100
plan = search.optimal_queries(n)
print(f"N={n}: theta={plan.theta:.5f}, best Q={plan.q_optimal}, overlap={plan.predicted_overlap:.6f}")

state, trace = search.grover_iterate(n, target=42, q=2 * plan.q_optimal)
for q, p in enumerate(trace):
    print(f"  q={q:2d}  P(target)={p:.6f}  closed form={search.closed_form_overlap(n, q):.6f}")

# the state never leaves span{uniform, target}: every other amplitude is equal
others = np.delete(state.amplitudes, 42)
print("spread of non-target amplitudes:", np.ptp(others))

# N = 4 is special: one query finds the item with certainty
print("N=4:", search.optimal_queries(4))

# classical guessing for comparison
for memory in (False, True):
    counts = search.simulate_classical_search(n, memory, trials=20_000, seed=1)
    print(f"classical, memory={memory}: mean {counts.mean():.2f}"
          f" (expected {search.classical_baseline(n, memory)})")
