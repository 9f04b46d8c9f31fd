"""Leading and higher stationary phase coefficients for complex phases.

Run: python demos/stationary_phase_terms.py
"""

from btlab import asymptotics as asy

for phase, amp, x in [("model", "cos", 0.0), ("intermediate", "cos", 0.2), ("fresnel", "bump", 0.3)]:
    rep = asy.ps1_check(asy.make_problem(phase, amp), x)
    ex = rep.expansion
    print(f"{phase:12s} a={amp:5s} x={x}: y_c={ex.y_c:.4f}  d={ex.d:.4f}  "
          f"remainder slope {rep.fit.slope:.3f}")
    for tau, I, L in zip(rep.taus, rep.integrals, rep.leading):
        print(f"    tau={tau:4d}  I={I:.10e}  leading={L:.10e}")

print()
for amp, x, i in [("y2", 0.0, 1), ("y4", 0.0, 2), ("c2", 0.3, 1), ("c1", 0.3, 0)]:
    rep = asy.ps2_check(asy.make_problem("model", amp), x, i)
    print(f"a={amp:3s} x={x} b_{i}: fitted {rep.coefficient:.10f}  formula {rep.formula:.10f}")
