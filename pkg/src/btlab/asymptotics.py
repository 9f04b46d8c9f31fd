"""Complex stationary phase in one transverse variable, and Maslov indices.

Phases and polynomial amplitudes are stored as 2-D coefficient arrays in
``(x, y)`` (``c[a, b]`` multiplies ``x^a y^b``) so that every derivative
is exact and complex arguments are allowed.  The leading term of

    I(x, tau) = int exp(i tau phi(x, y)) a(x, y) dy

is ``(2 pi / tau)^(1/2) d(x) exp(i tau phi_r(x)) b0(x)`` with ``y_c`` the
(complex) critical point, ``phi_r = phi(x, y_c)`` and
``d = ((1/i) phi_yy)^(-1/2)`` on the principal branch, which is the branch
continuous from ``phi_yy = i`` where ``d = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as npoly
from numpy.polynomial.legendre import leggauss

from . import conventions
from .fitting import ConvergenceFit, fit_loglog

__all__ = [
    "Phase",
    "Amplitude",
    "SPProblem",
    "SPExpansion",
    "PHASES",
    "AMPLITUDES",
    "make_problem",
    "polynomial_phase",
    "polynomial_amplitude",
    "critical_point",
    "expansion",
    "oscillatory_integral",
    "ps1_check",
    "ps2_formula",
    "ps2_check",
    "PS1Report",
    "PS2Report",
    "UnitaryPath",
    "maslov_winding",
    "z4_holonomy",
    "random_lagrangian_loop",
    "diagonal_loop",
]


# ---------------------------------------------------------------- phases
@dataclass(frozen=True)
class Phase:
    name: str
    coef: np.ndarray

    def __call__(self, x, y):
        x, y = np.broadcast_arrays(x, y)
        return npoly.polyval2d(x, y, self.coef)

    def d(self, nx: int, ny: int) -> "Phase":
        c = self.coef
        if nx:
            c = npoly.polyder(c, nx, axis=0)
        if ny:
            c = npoly.polyder(c, ny, axis=1)
        return Phase(f"{self.name}_x{nx}y{ny}", np.atleast_2d(c))


def polynomial_phase(coef, name: str = "polynomial") -> Phase:
    c = np.atleast_2d(np.asarray(coef, dtype=complex))
    return Phase(name, c)


def _coef(entries: dict) -> np.ndarray:
    n = 1 + max(max(a, b) for a, b in entries)
    c = np.zeros((n, n), dtype=complex)
    for (a, b), v in entries.items():
        c[a, b] = v
    return c


PHASES = {
    # xy + (i/2)(x^2 + y^2)
    "model": Phase("model", _coef({(1, 1): 1.0, (2, 0): 0.5j, (0, 2): 0.5j})),
    # xy + (i/2) y^2
    "intermediate": Phase("intermediate", _coef({(1, 1): 1.0, (0, 2): 0.5j})),
    # y^2/2 + xy, real and nondegenerate
    "fresnel": Phase("fresnel", _coef({(1, 1): 1.0, (0, 2): 0.5})),
}


# ------------------------------------------------------------ amplitudes
@dataclass(frozen=True)
class Amplitude:
    """Amplitude with exact ``y``-derivatives when available.

    ``ydiff(x, y, n)`` returns the ``n``-th ``y``-derivative; ``support`` is a
    finite ``y``-interval for compactly supported amplitudes.
    """

    name: str
    fn: Callable
    ydiff: Callable | None = None
    support: tuple[float, float] | None = None
    entire: bool = True

    def __call__(self, x, y):
        return self.fn(x, y)


def polynomial_amplitude(coef, name: str = "poly") -> Amplitude:
    c = np.atleast_2d(np.asarray(coef, dtype=complex))

    def ydiff(x, y, n):
        cc = npoly.polyder(c, n, axis=1) if n else c
        return npoly.polyval2d(*np.broadcast_arrays(x, y), np.atleast_2d(cc))

    return Amplitude(name, lambda x, y: npoly.polyval2d(*np.broadcast_arrays(x, y), c), ydiff)


def _bump(lo: float, hi: float) -> Amplitude:
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)

    def fn(x, y):
        s = (np.real(y) - mid) / half
        out = np.zeros(np.shape(s))
        inside = np.abs(s) < 1
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
        return out

    return Amplitude(f"bump[{lo},{hi}]", fn, None, (lo, hi), False)


def _cos() -> Amplitude:
    return Amplitude("cos", lambda x, y: np.cos(y) + 0 * x,
                     lambda x, y, n: np.cos(y + n * np.pi / 2) + 0 * x)


def _shifted_power(m: int, shift: complex = -1j) -> Amplitude:
    # (y + shift * x)^m, vanishing to order m on y = i x for shift = -i
    def ydiff(x, y, n):
        if n > m:
            return np.zeros(np.broadcast(x, y).shape, dtype=complex)
        return factorial(m) / factorial(m - n) * (y + shift * x) ** (m - n)

    return Amplitude(f"(y-ix)^{m}", lambda x, y: (y + shift * x) ** m, ydiff)


AMPLITUDES = {
    "one": polynomial_amplitude([[1.0]], "one"),
    "cos": _cos(),
    "y": polynomial_amplitude([[0, 1]], "y"),
    "y2": polynomial_amplitude([[0, 0, 1]], "y2"),
    "y3": polynomial_amplitude([[0, 0, 0, 1]], "y3"),
    "y4": polynomial_amplitude([[0, 0, 0, 0, 1]], "y4"),
    "bump": _bump(-2.0, 2.0),
    "bump_far": _bump(1.0, 3.0),
    "c1": _shifted_power(1),
    "c2": _shifted_power(2),
    "c4": _shifted_power(4),
}


@dataclass(frozen=True)
class SPProblem:
    phase: Phase
    amplitude: Amplitude
    y_domain: tuple[float, float] = (-14.0, 14.0)
    dims: tuple[int, int] = (1, 1)

    @property
    def name(self) -> str:
        return f"{self.phase.name}/{self.amplitude.name}"

    def check_phase(self, x: float, samples: int = 401) -> float:
        """Minimum of ``Im phi`` on a real ``y`` grid; must be ``>= -1e-12``."""
        y = np.linspace(*self.y_domain, samples)
        return float(np.min(np.imag(self.phase(x, y))))


def make_problem(phase: str | Phase, amplitude: str | Amplitude,
                 y_domain: tuple[float, float] | None = None) -> SPProblem:
    ph = PHASES[phase] if isinstance(phase, str) else phase
    am = AMPLITUDES[amplitude] if isinstance(amplitude, str) else amplitude
    dom = y_domain or (am.support if am.support is not None else (-14.0, 14.0))
    return SPProblem(ph, am, dom)


# ------------------------------------------------------ critical points
def critical_point(phase: Phase, x: float, seed: complex = 0.0, tol: float = 1e-14,
                   maxiter: int = 50) -> complex:
    """Newton iteration on ``phi_y(x, y) = 0`` in complex ``y``."""
    py, pyy = phase.d(0, 1), phase.d(0, 2)
    y = complex(seed)
    for _ in range(maxiter):
        h = pyy(x, y)
        if abs(h) < 1e-14:
            raise ValueError("degenerate critical point (phi_yy = 0)")
        step = py(x, y) / h
        y -= step
        if abs(step) < tol * max(1.0, abs(y)):
            return y
    raise ValueError("Newton iteration for the critical point did not converge")


@dataclass(frozen=True)
class SPExpansion:
    """Data of the leading term at one base point ``x``."""

    x: float
    y_c: complex
    d: complex
    phi_r: complex
    b0: complex

    def leading(self, tau: float) -> complex:
        return np.sqrt(2 * np.pi / tau) * self.d * np.exp(1j * tau * self.phi_r) * self.b0

    def normalizer(self, tau: float) -> complex:
        """``(2 pi / tau)^(1/2) d exp(i tau phi_r)``; ``b(x, tau) = I / normalizer``."""
        return np.sqrt(2 * np.pi / tau) * self.d * np.exp(1j * tau * self.phi_r)


def expansion(problem: SPProblem, x: float, seed: complex | None = None) -> SPExpansion:
    ph = problem.phase
    if seed is None:
        seed = -ph.d(1, 1)(x, 0.0) * x / ph.d(0, 2)(x, 0.0) if x else 0.0
    yc = critical_point(ph, x, seed)
    h = ph.d(0, 2)(x, yc)
    if abs(h) < 1e-12:
        raise ValueError("singular Hessian on the critical locus")
    d = 1.0 / np.sqrt(h / 1j)
    return SPExpansion(x, yc, complex(d), complex(ph(x, yc)), complex(problem.amplitude(x, yc)))


# ---------------------------------------------------- numerical integral
def oscillatory_integral(problem: SPProblem, x: float, tau: float, rtol: float = 1e-12,
                         contour_shift: float = 0.0, order: int = 24,
                         max_panels: int = 8192) -> complex:
    """``int exp(i tau phi(x, y)) a(x, y) dy`` over ``problem.y_domain``.

    Composite Gauss-Legendre with panel doubling until two passes agree to
    ``rtol`` times ``int |integrand|``.  For entire amplitudes with Gaussian
    decay the line may be moved to ``Im y = contour_shift`` (Cauchy), which
    avoids cancellation when the critical point is complex.
    """
    lo, hi = problem.y_domain
    if contour_shift and not problem.amplitude.entire:
        raise ValueError("contour shift needs an entire amplitude")
    t, w = leggauss(order)

    def integrate(panels):
        edges = np.linspace(lo, hi, panels + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        y = (mid[:, None] + half[:, None] * t[None, :]).ravel() + 1j * contour_shift
        if not contour_shift:
            y = y.real
        ww = (half[:, None] * w[None, :]).ravel()
        f = np.exp(1j * tau * problem.phase(x, y)) * problem.amplitude(x, y)
        return np.sum(ww * f), np.sum(ww * np.abs(f))

    panels = 16
    prev, _ = integrate(panels)
    while panels < max_panels:
        panels *= 2
        cur, scale = integrate(panels)
        if abs(cur - prev) <= rtol * max(scale, 1e-300):
            return complex(cur)
        prev = cur
    raise ValueError("oscillatory integral did not converge under panel refinement")


def _integral(problem: SPProblem, exp: SPExpansion, tau: float) -> complex:
    shift = exp.y_c.imag if problem.amplitude.entire else 0.0
    return oscillatory_integral(problem, exp.x, tau, contour_shift=shift)


@dataclass(frozen=True)
class PS1Report:
    problem: str
    x: float
    taus: tuple
    integrals: tuple
    leading: tuple
    residuals: tuple
    fit: ConvergenceFit
    expansion: SPExpansion = field(repr=False)

    @property
    def relative_leading_error(self) -> float:
        """``|I - leading| / |leading|`` at the largest ``tau``."""
        return abs(self.integrals[-1] - self.leading[-1]) / abs(self.leading[-1])


def ps1_check(problem: SPProblem, x: float, taus=(25, 50, 100, 200)) -> PS1Report:
    """Leading term of the expansion against the numerical integral.

    Residuals are ``|I - leading| / |exp(i tau phi_r)|``: the exponential
    factor is divided out so that the fitted slope measures the power of
    ``tau`` in the remainder (expected ``-1/2 - 1``).
    """
    if problem.check_phase(x) < -1e-12:
        raise ValueError("phase has negative imaginary part on the integration line")
    ex = expansion(problem, x)
    ints, leads, res = [], [], []
    for tau in taus:
        I = _integral(problem, ex, tau)
        Lt = ex.leading(tau)
        ints.append(I)
        leads.append(Lt)
        res.append(abs(I - Lt) / abs(np.exp(1j * tau * ex.phi_r)))
    return PS1Report(problem.name, x, tuple(taus), tuple(ints), tuple(leads), tuple(res),
                     fit_loglog(taus, res, floor=1e-13), ex)


def ps2_formula(problem: SPProblem, x: float, i: int) -> complex:
    """``[b_i] = (1/i!) Delta^i A_{2i}`` with ``Delta = (i/2) phi^{yy} d_Y^2``.

    Valid when the amplitude vanishes to order ``2i`` on the critical locus,
    where ``A_{2i}(Y) = a^{(2i)}(x, y_c) Y^{2i} / (2i)!``.
    """
    amp = problem.amplitude
    if amp.ydiff is None:
        raise ValueError("amplitude has no derivative information")
    ex = expansion(problem, x)
    inv = 1.0 / problem.phase.d(0, 2)(x, ex.y_c)
    return complex((0.5j * inv) ** i / factorial(i) * amp.ydiff(x, ex.y_c, 2 * i))


@dataclass(frozen=True)
class PS2Report:
    problem: str
    x: float
    i: int
    extracted: tuple
    formula: complex
    taus: tuple

    @property
    def coefficient(self) -> complex:
        return self.extracted[self.i]

    @property
    def error(self) -> float:
        return abs(self.coefficient - self.formula)


def ps2_check(problem: SPProblem, x: float, i: int, taus=None, terms: int | None = None) -> PS2Report:
    """Fit ``b(x, tau) = sum_j beta_j tau^-j`` and compare ``beta_i`` with the formula."""
    taus = tuple(taus or (25 * 2.0 ** j for j in range(6)))
    terms = terms or i + 3
    if len(taus) < terms:
        raise ValueError("tau schedule shorter than the number of fitted terms")
    ex = expansion(problem, x)
    b = np.array([_integral(problem, ex, t) / ex.normalizer(t) for t in taus])
    V = np.array(taus, dtype=float)[:, None] ** (-np.arange(terms)[None, :])
    if np.linalg.cond(V) > 1e14:
        raise ValueError("ill-conditioned coefficient fit")
    beta, *_ = np.linalg.lstsq(V, b, rcond=None)
    return PS2Report(problem.name, x, i, tuple(complex(v) for v in beta),
                     ps2_formula(problem, x, i), taus)


# ------------------------------------------------------------- Maslov
@dataclass(frozen=True)
class UnitaryPath:
    """Samples ``U(t_j)`` of a loop of Lagrangian planes ``U(t) R^n``, ``t_j`` from 0 to 1 inclusive."""

    samples: np.ndarray

    def __post_init__(self):
        U = np.asarray(self.samples, dtype=complex)
        if U.ndim != 3 or U.shape[1] != U.shape[2]:
            raise ValueError("expected an array of square matrices")
        eye = np.eye(U.shape[1])
        err = np.max(np.abs(np.einsum("tji,tjk->tik", U.conj(), U) - eye))
        if err > 1e-10:
            raise ValueError(f"samples are not unitary (error {err:.2e})")
        M = U[0].conj().T @ U[-1]
        if np.max(np.abs(M.imag)) > 1e-9:
            raise ValueError("path does not close in the Lagrangian Grassmannian")
        object.__setattr__(self, "samples", U)

    @property
    def n(self) -> int:
        return self.samples.shape[1]

    def concatenate(self, other: "UnitaryPath") -> "UnitaryPath":
        # continue ``other`` from the end of ``self`` (same plane, possibly different frame)
        O = other.samples[0].conj().T @ self.samples[-1]
        return UnitaryPath(np.concatenate([self.samples, other.samples[1:] @ O.real]))


def _det_phase_steps(path: UnitaryPath) -> np.ndarray:
    d2 = np.linalg.det(path.samples) ** 2
    steps = np.angle(d2[1:] / d2[:-1])
    if np.max(np.abs(steps)) >= np.pi / 2:
        raise ValueError("path under-sampled: det^2 phase step >= pi/2")
    return steps


def maslov_winding(path: UnitaryPath) -> int:
    """Winding number of ``det^2 U(t)``."""
    return int(round(np.sum(_det_phase_steps(path)) / (2 * np.pi)))


def z4_holonomy(path: UnitaryPath) -> complex:
    """Holonomy in ``{1, i, -1, -i}`` of the cover ``v^2 det U = +-1``.

    ``v`` is continued by choosing, at each sample, the fourth root of
    ``1 / det^2 U`` closest to the previous value.
    """
    _det_phase_steps(path)
    det = np.linalg.det(path.samples)
    roots = np.array([1, 1j, -1, -1j])
    v0 = 1.0 / np.sqrt(det[0])
    v = v0
    for dt in det[1:]:
        cand = roots / np.sqrt(dt)
        v = cand[np.argmin(np.abs(cand - v))]
    h = v0 / v if conventions.Z4_INVERSE_TRANSPORT else v / v0
    return complex(roots[np.argmin(np.abs(roots - h))])


def diagonal_loop(exponents, samples: int = 201) -> UnitaryPath:
    """``U(t) = diag(exp(i pi m_l t))``."""
    t = np.linspace(0, 1, samples)
    m = np.asarray(exponents, dtype=float)
    U = np.zeros((samples, m.size, m.size), dtype=complex)
    idx = np.arange(m.size)
    U[:, idx, idx] = np.exp(1j * np.pi * t[:, None] * m[None, :])
    return UnitaryPath(U)


def _expm_hermitian(H: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(H)
    return (V * np.exp(1j * w)) @ V.conj().T


def random_lagrangian_loop(rng: np.random.Generator, n: int, max_index: int = 3,
                           harmonics: int = 2, amplitude: float = 0.6) -> tuple[UnitaryPath, int]:
    """Random closed loop with known Maslov index.

    ``U(t) = U0 exp(i S(t)) diag(exp(i pi m_l t)) exp(t K)`` with ``S`` periodic
    Hermitian and ``K`` real antisymmetric; ``U(1) R^n = U(0) R^n`` and the
    index is ``sum m_l``.
    """
    m = rng.integers(-max_index, max_index + 1, size=n)
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    U0, _ = np.linalg.qr(A)
    Ks = rng.normal(size=(n, n))
    K = Ks - Ks.T
    coeffs = []
    for _ in range(2 * harmonics):
        B = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        coeffs.append(amplitude * 0.5 * (B + B.conj().T) / n)
    samples = 200 * (1 + int(np.sum(np.abs(m)))) + 200
    t = np.linspace(0, 1, samples)
    wK, VK = np.linalg.eig(K)
    U = np.empty((samples, n, n), dtype=complex)
    for j, tj in enumerate(t):
        S = sum(coeffs[2 * h] * np.cos(2 * np.pi * (h + 1) * tj)
                + coeffs[2 * h + 1] * np.sin(2 * np.pi * (h + 1) * tj) for h in range(harmonics))
        R = ((VK * np.exp(tj * wK)) @ np.linalg.inv(VK)).real
        U[j] = U0 @ _expm_hermitian(S) @ np.diag(np.exp(1j * np.pi * m * tj)) @ R
    return UnitaryPath(U), int(np.sum(m))
