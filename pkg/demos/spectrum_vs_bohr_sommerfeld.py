"""Eigenvalues of a perturbed height operator next to their Bohr-Sommerfeld predictions.

Run: python demos/spectrum_vs_bohr_sommerfeld.py
"""

import numpy as np

from btlab import bohr_sommerfeld as bsm
from btlab import toeplitz as tpz
from btlab.geometry import fubini_study_model
from btlab.observables import x1, x3
from btlab.quantum import quantum_space

model = fubini_study_model()
f = x3 + 0.1 * x1 * x3
window = (0.2, 0.8)

# one sweep of level loops serves every k
profile = bsm.action_profile(model, "delta", f, window)
print(f"half-form index eps = {profile.eps}, swept area = {profile.volume:.6f}")

reports = []
for k in (8, 16, 32, 64, 128):
    ev = tpz.spectrum(tpz.quantize_gq(f, quantum_space(k, "delta")))
    rep = bsm.match_spectrum(bsm.solve_bs(profile, k), ev, window)
    reports.append(rep)
    print(f"k={k:4d}  eigenvalues in window: {rep.n_true:3d}  BS points: {rep.n_bs:3d}  "
          f"max |lambda - lambda'| = {rep.max_deviation:.3e}")

fit = bsm.fit_match(reports)
print(f"log-log slope of the deviation: {fit.slope:.3f}")

k = 16
rep = reports[1]
print(f"\nk = {k}:")
for lt, lb in zip(rep.lambda_true, rep.lambda_bs):
    print(f"  {lt: .12f}  {lb: .12f}  {lt - lb: .2e}")
