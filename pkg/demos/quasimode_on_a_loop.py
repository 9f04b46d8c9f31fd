"""Build a Lagrangian quasimode on a Bohr-Sommerfeld loop and watch its residual shrink.

Run: python demos/quasimode_on_a_loop.py
"""

import numpy as np

from btlab import bohr_sommerfeld as bsm
from btlab import lagrangian as lag
from btlab import toeplitz as tpz
from btlab.fitting import fit_loglog
from btlab.geometry import fubini_study_model
from btlab.observables import x1, x3
from btlab.quantum import quantum_space

model = fubini_study_model()
f = x3 + 0.1 * x1 * x3
profile = bsm.action_profile(model, "delta", f, (0.2, 0.8))

ks = (16, 32, 64, 128)
rows = []
for k in ks:
    space = quantum_space(k, "delta")
    pts = bsm.solve_bs(profile, k).points
    lam = float(pts[np.argmin(np.abs(pts - 0.5))])
    sol = lag.solve_transport(profile.loop_at(lam), f, "delta")
    A = tpz.quantize_gq(f, space)
    q = lag.build_quasimode(space, sol)
    q_flat = lag.build_quasimode(space, lag.naive_transport(sol))
    rows.append((k, lam, lag.residual_check(A, lam, q), lag.residual_check(A, lam, q_flat),
                 q.peak_index, q.mass_within(4 * np.sqrt(k))))

print("   k   lambda          transport g0   constant g0   peak   mass(4 sqrt k)")
for k, lam, rt, rn, peak, mass in rows:
    print(f"{k:4d}   {lam:.10f}   {rt:.3e}      {rn:.3e}     {peak:4d}   {mass:.6f}")

print(f"slopes: transport {fit_loglog(ks, [r[2] for r in rows]).slope:.2f}, "
      f"constant {fit_loglog(ks, [r[3] for r in rows]).slope:.2f}")
