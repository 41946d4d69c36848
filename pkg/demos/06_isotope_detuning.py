"""
Detuning the target
===================

Making the target heavier (an isotope-like swap) moves it off resonance and
the focusing fades.  A toy rate model turns focused energy into a Boltzmann
enhancement.
"""
from wavesearch import experiments

spec = experiments.SweepSpec("detune", [1.0, 1.1, 1.25, 1.5, 2.0, 4.0, 8.0], family="A", n_items=8)
table = experiments.detuning_sweep(spec)
for factor, gain, frac in table.rows:
    print(f"mass x{factor:<5g} peak gain {gain:7.4f}  fraction of tuned {frac:.4f}")

for e_f in (0.0, 1.0, 2.0, 5.0, 20.0):
    k = experiments.rate_enhancement(experiments.RateInputs(barrier=10.0, thermal=1.0, focused=e_f))
    print(f"E_f={e_f:5.1f} kT -> rate x{k:.4g}")
