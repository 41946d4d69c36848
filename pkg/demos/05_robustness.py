"""
Damping and mass scaling
========================

Weak drag costs a little gain and shifts frequencies only quadratically.
Scaling every mass and spring by the same factor changes nothing; scaling
them oscillator by oscillator is reported empirically.
"""
from wavesearch import experiments

table = experiments.damping_sweep(experiments.SweepSpec("gamma", [0, 1e-3, 1e-2, 2e-2]))
print(table.columns)
for row in table.rows:
    print("  " + "  ".join(f"{v:.6g}" for v in row))
shifts = table.column("frequency_shift")
print("shift ratio 2e-2 / 1e-2:", shifts[3] / shifts[2])

spec = experiments.SweepSpec("alpha", [2.0], n_items=8, trials=10, seed=0)
rep = experiments.scaling_check(2.0, spec)
print("global scaling, max deviation:", rep.max_deviation)
print("random per-oscillator scaling, winner per trial:", rep.argmax_oscillator)
print("target share per trial:", [round(f, 3) for f in rep.target_fraction])
