"""Sign and orientation conventions used throughout the package.

Every choice that the theory leaves to convention lives here.  They are
fixed once by requiring that the Bohr-Sommerfeld set of the height
function reproduces the exact spectrum of its geometric quantization
(``tests/test_acceptance.py::test_a1_bs_exactness``).

* Level loops are traversed counterclockwise in the north chart, i.e. as
  the oriented boundary of the region that contains ``z = 0``.
* Parallel transport along a loop multiplies by ``exp(-\\oint A)`` where
  ``A = -d'psi`` is the Chern connection form in the holomorphic chart
  frame.  Actions are ``a = i \\oint A`` (real, not reduced mod 2 pi).
* Hamiltonian vector fields satisfy ``i_X omega = -df``; in the chart
  ``X^z = i (1 + |z|^2)^2 d f / d zbar``.
* The subprincipal correction to a Bohr-Sommerfeld phase is
  ``-\\oint f_1 dt`` with ``dt`` the flow-time form of ``X`` restricted to the
  oriented loop (``dt(X) = 1``).  For the height function the loop runs
  against the flow, so ``\\oint dt = -pi``.
* The Z4 holonomy of a loop of Lagrangian planes is reported as
  ``v(0) / v(1)`` for a continuous lift ``v`` with ``v^2 det U = +-1``.
"""

#: +1 for counterclockwise loops in the north chart.
LOOP_ORIENTATION = 1

#: Holonomy of a connection form A along a loop is exp(HOLONOMY_SIGN * \oint A).
HOLONOMY_SIGN = -1

#: Sign in the Hamiltonian vector field  X^z = HAMILTONIAN_SIGN * i * G^{-1} f_zbar.
HAMILTONIAN_SIGN = 1

#: Sign of the f_1 flow-time integral in Bohr-Sommerfeld phases.
SUBPRINCIPAL_SIGN = -1

#: Sign relating i k [T_f, T_g] to X_f g (fixed by the su(2) commutators).
POISSON_SIGN = 1

#: Z4 holonomy reported as v(0)/v(1) (True) or v(1)/v(0) (False).
Z4_INVERSE_TRANSPORT = True

#: a_1 + eps*pi is congruent mod 2 pi to this multiple of the geodesic-curvature
#: integral of the loop (K trivial).  The half comes from delta being a square
#: root of the canonical bundle; the minus sign from the loop orientation.
GEODESIC_CURVATURE_FACTOR = -0.5
