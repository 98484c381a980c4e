"""Disorder stabilizes SPT order: Anderson-localized SSH and a
phenomenological many-body-localized quench.

Run:  python demos/disorder_demo.py   (about a minute)
"""

import numpy as np

from sptquench import experiments

print("=== disordered SSH quench (0.5, 1, clean) -> (1, 0.5, f = 0.6) ===")
times = [1.0, 5.0, 20.0, 100.0, 200.0]
for l in (10, 20):
    rows = experiments.disordered_ssh(l, (0.5, 1.0, 0.0), (1.0, 0.5, 0.6),
                                      times, realizations=100, seed=17)
    sat = rows[-1]
    print(f"l = {l}: saturated gap = {sat['gap_mean']:.3e} "
          f"+- {sat['gap_stderr']:.1e}, entropy = {sat['entropy_mean']:.2f}")
print("(the saturation value drops with l: localization freezes the "
      "entanglement edge modes)")

print("\n=== MBL-type quench of the Z2 x Z2 SPT state, L = 6 cells ===")
times = np.geomspace(0.1, 1000.0, 12)
rows = experiments.mbl(6, 0.49, 0.49, 3.0, 3.0, times, realizations=50,
                       seed=23)
print(f"{'t':>8}  {'entropy':>8}  {'mb gap':>10}")
for row in rows:
    print(f"{row['t']:8.1f}  {row['entropy_mean']:8.3f}  "
          f"{row['gap_mean']:10.3e}")
print("(logarithmic entropy growth; the gap grows slowly, consistent "
      "with a power law rather than the clean exponential)")
