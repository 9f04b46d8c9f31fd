"""The projective line with its Fubini-Study form, line bundles, loops and holonomy.

Everything is computed in the north chart ``z``, where the Kahler potential
is ``Phi = ln(1 + |z|^2)`` and ``omega = i (1 + |z|^2)^-2 dz ^ dzbar``.
With this normalization the total area is ``2 pi``, so the prequantum
bundle is the degree-one bundle and Riemann-Roch counts are integers.

The substitution ``u = |z|^2 / (1 + |z|^2) = (1 - x3) / 2`` turns the
Liouville measure into ``du dtheta`` on ``[0, 1] x [0, 2 pi)``, which is
what the quadrature is built on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import conventions
from .observables import Observable

__all__ = [
    "KahlerModel",
    "LineBundleData",
    "QuadratureGrid",
    "LoopPath",
    "fubini_study_model",
    "bundle",
    "auxiliary_bundle",
    "omega1_scalar",
    "build_quadrature",
    "holonomy",
    "action",
    "enclosed_area",
    "level_set_loops",
    "circle_loop",
    "project_level",
    "spectral_derivative",
    "spectral_antiderivative",
]

Twist = Literal["delta", "trivial"]
TWISTS = ("delta", "trivial")


def potential(z):
    """Kahler potential ``ln(1 + |z|^2)``."""
    return np.log1p(np.abs(z) ** 2)


def form_density(z):
    """``G`` in ``omega = i G dz ^ dzbar``."""
    return 1.0 / (1.0 + np.abs(z) ** 2) ** 2


@dataclass(frozen=True)
class KahlerModel:
    """CP^1 seen from one affine chart.

    ``liouville_density`` is the density of ``omega`` against ``dx dy``,
    which is ``2 G`` since ``i dz ^ dzbar = 2 dx ^ dy``.
    """

    chart_id: Literal["north", "south"] = "north"
    total_area: float = 2 * np.pi

    def potential(self, z):
        return potential(z)

    def form_density(self, z):
        return form_density(z)

    def liouville_density(self, z):
        return 2.0 * form_density(z)

    def embedding(self, z):
        """Point of the sphere ``x1^2 + x2^2 + x3^2 = 1`` for chart coordinate ``z``."""
        z = np.asarray(z, dtype=complex)
        t = np.abs(z) ** 2
        w = 2 * z / (1 + t)
        x3 = (1 - t) / (1 + t)
        if self.chart_id == "south":
            x3 = -x3
            w = np.conj(w)
        return np.stack([w.real, w.imag, x3])

    @staticmethod
    def chart_transition(z):
        """North/south chart change ``z -> 1/z``."""
        return 1.0 / np.asarray(z, dtype=complex)

    def pullback_density(self, z):
        """Form density transported through the chart transition; equals ``form_density``."""
        z = np.asarray(z, dtype=complex)
        return form_density(1.0 / z) / np.abs(z) ** 4


def fubini_study_model(chart: Literal["north", "south"] = "north") -> KahlerModel:
    return KahlerModel(chart_id=chart)


@dataclass(frozen=True)
class LineBundleData:
    """Holomorphic Hermitian line bundle on CP^1 with ``psi = weight * Phi``.

    A section represented by a holomorphic ``f`` in the chart frame has
    squared norm ``|f|^2 exp(-psi)``.  For the bundles used here the weight
    equals the degree, so the curvature is ``degree * (1/i) omega``.
    """

    kind: str
    degree: int
    weight: float

    def metric_log_weight(self, z):
        return self.weight * potential(z)

    def connection_form(self, z):
        """Coefficient of ``dz`` in the Chern connection form ``-d'psi``."""
        z = np.asarray(z, dtype=complex)
        return -self.weight * np.conj(z) / (1.0 + np.abs(z) ** 2)

    def curvature_scalar(self, z):
        """``(1/i) curvature`` as a multiple of ``omega``."""
        return np.full(np.shape(z), float(self.weight))

    def tensor(self, other: "LineBundleData") -> "LineBundleData":
        return LineBundleData(f"{self.kind}*{other.kind}", self.degree + other.degree,
                              self.weight + other.weight)

    def dual(self) -> "LineBundleData":
        return LineBundleData(f"{self.kind}^-1", -self.degree, -self.weight)

    def power(self, n: int) -> "LineBundleData":
        return LineBundleData(f"{self.kind}^{n}", n * self.degree, n * self.weight)


_BUNDLES = {
    "prequantum": (1, 1.0),
    "canonical": (-2, -2.0),
    "halfform": (-1, -1.0),
    "trivial": (0, 0.0),
}


def bundle(kind: str, twist: Twist | None = None) -> LineBundleData:
    """Build one of the standard bundles.

    ``kind`` is ``prequantum``, ``canonical``, ``halfform``, ``trivial`` or
    ``twist``; the last one is ``K`` and needs ``twist`` in ``{"delta", "trivial"}``.
    """
    if kind == "twist":
        if twist not in TWISTS:
            raise ValueError(f"twist must be one of {TWISTS}, got {twist!r}")
        kind = "halfform" if twist == "delta" else "trivial"
        deg, w = _BUNDLES[kind]
        return LineBundleData(f"K={twist}", deg, w)
    if kind not in _BUNDLES:
        raise ValueError(f"unknown bundle kind {kind!r}")
    deg, w = _BUNDLES[kind]
    return LineBundleData(kind, deg, w)


def auxiliary_bundle(twist: Twist) -> LineBundleData:
    """``L1`` with ``K = L1 (x) delta``."""
    out = bundle("twist", twist).tensor(bundle("halfform").dual())
    return LineBundleData(f"L1[{twist}]", out.degree, out.weight)


def omega1_scalar(twist: Twist) -> float:
    """``omega_1 = omega_K - omega_c / 2`` as a multiple of ``omega``."""
    return bundle("twist", twist).weight - bundle("canonical").weight / 2


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor Gauss-Legendre (in ``u``) times trapezoid (in angle) rule.

    Exact for ``P(u) e^{i q theta}`` with ``deg P <= radial_exactness`` and
    ``|q| <= angular_exactness``.
    """

    u: np.ndarray
    theta: np.ndarray
    weights: np.ndarray
    radial_order: int
    angular_order: int

    @property
    def radial_exactness(self) -> int:
        return 2 * self.radial_order - 1

    @property
    def angular_exactness(self) -> int:
        return self.angular_order - 1

    @property
    def z(self) -> np.ndarray:
        r = np.sqrt(self.u / (1.0 - self.u))
        return r * np.exp(1j * self.theta)

    @property
    def size(self) -> int:
        return self.weights.size

    def integrate(self, values) -> complex | float:
        return np.sum(self.weights * values)


def build_quadrature(model: KahlerModel, radial_order: int, angular_order: int) -> QuadratureGrid:
    if radial_order < 2 or angular_order < 2:
        raise ValueError("quadrature orders must be >= 2")
    x, w = leggauss(radial_order)
    u = 0.5 * (x + 1.0)
    wu = 0.5 * w
    theta = 2 * np.pi * np.arange(angular_order) / angular_order
    wt = np.full(angular_order, 2 * np.pi / angular_order)
    U, TH = np.meshgrid(u, theta, indexing="ij")
    W = np.outer(wu, wt)
    return QuadratureGrid(U.ravel(), TH.ravel(), W.ravel(), radial_order, angular_order)


@dataclass(frozen=True)
class LoopPath:
    """Closed loop sampled at ``s_j = 2 pi j / M``; the endpoint is not repeated.

    ``center`` is set for loops that are star-shaped about it with samples
    equally spaced in angle around it (as produced by ``level_set_loops``).
    """

    samples: np.ndarray
    orientation: int = conventions.LOOP_ORIENTATION
    center: complex | None = None
    level: float | None = None
    tangents: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        z = np.asarray(self.samples, dtype=complex)
        if z.ndim != 1 or z.size < 8:
            raise ValueError("loop needs at least 8 samples")
        if not np.all(np.isfinite(z)):
            raise ValueError("loop leaves the chart")
        object.__setattr__(self, "samples", z)
        object.__setattr__(self, "tangents", spectral_derivative(z))

    @classmethod
    def from_samples(cls, samples, closure_tol: float = 1e-10, **kw) -> "LoopPath":
        """Build from samples that repeat the first point at the end."""
        z = np.asarray(samples, dtype=complex)
        if abs(z[-1] - z[0]) > closure_tol * max(1.0, np.max(np.abs(z))):
            raise ValueError("loop is not closed")
        return cls(z[:-1], **kw)

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def ds(self) -> float:
        return 2 * np.pi / self.n

    def line_integral(self, coeff) -> complex:
        """``\\oint coeff(z) dz`` by the periodic trapezoid rule."""
        return np.sum(coeff * self.tangents) * self.ds

    def reversed(self) -> "LoopPath":
        z = np.roll(self.samples[::-1], 1)
        return LoopPath(z, -self.orientation, self.center, self.level)

    def repeated(self, times: int) -> "LoopPath":
        return LoopPath(np.tile(self.samples, times), self.orientation, None, self.level)


def spectral_derivative(z: np.ndarray) -> np.ndarray:
    """Derivative of periodic samples with respect to ``s in [0, 2 pi)``."""
    n = z.size
    freq = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        freq[n // 2] = 0.0
    return np.fft.ifft(1j * freq * np.fft.fft(z))


def spectral_antiderivative(f: np.ndarray) -> tuple[np.ndarray, complex]:
    """Return ``(F, total)`` with ``F(s) = int_0^s f`` on the sample grid and ``total = int_0^{2pi} f``."""
    n = f.size
    c = np.fft.fft(f) / n
    mean = c[0]
    freq = np.fft.fftfreq(n, d=1.0 / n)
    s = 2 * np.pi * np.arange(n) / n
    g = np.zeros_like(c)
    nz = freq != 0
    if n % 2 == 0:
        nz &= np.abs(freq) != n // 2
    g[nz] = c[nz] / (1j * freq[nz])
    periodic = np.fft.ifft(g * n)
    F = mean * s + periodic - periodic[0]
    return F, 2 * np.pi * mean


def _check_loop(loop: LoopPath, chart_radius: float = 1e6):
    if np.max(np.abs(loop.samples)) > chart_radius:
        raise ValueError("loop leaves the chart")


def action(b: LineBundleData, loop: LoopPath) -> float:
    """Real phase ``a`` with holonomy ``exp(i a)``, not reduced modulo ``2 pi``."""
    _check_loop(loop)
    integral = loop.line_integral(b.connection_form(loop.samples))
    phase = conventions.HOLONOMY_SIGN * integral / 1j
    if abs(phase.imag) > 1e-8 * max(1.0, abs(phase.real)):
        raise ValueError("connection is not unitary along the loop (under-sampled?)")
    return float(phase.real)


def holonomy(b: LineBundleData, loop: LoopPath) -> complex:
    """Parallel transport around ``loop``, a unit complex number."""
    return complex(np.exp(1j * action(b, loop)))


def enclosed_area(model: KahlerModel, loop: LoopPath, nodes: int = 64) -> float:
    """``int omega`` over the region bounded by a star-shaped loop.

    Independent of the connection: a polar Gauss-Legendre rule about
    ``loop.center``.  The sign follows the loop orientation.
    """
    if loop.center is None:
        raise ValueError("enclosed_area needs a star-shaped loop with a center")
    rel = loop.samples - loop.center
    rho = np.abs(rel)
    phi = np.angle(rel)
    dphi = np.imag(loop.tangents / rel)
    x, w = leggauss(nodes)
    r = 0.5 * (x[:, None] + 1) * rho[None, :]
    pts = loop.center + r * np.exp(1j * phi)[None, :]
    radial = np.sum(0.5 * w[:, None] * rho[None, :] * model.liouville_density(pts) * r, axis=0)
    return float(np.sum(radial * dphi) * loop.ds)


def circle_loop(radius: float, n: int = 256, center: complex = 0.0) -> LoopPath:
    s = 2 * np.pi * np.arange(n) / n
    return LoopPath(center + radius * np.exp(1j * s), center=center)


def level_set_loops(model: KahlerModel, f0: Observable, level: float, n_samples: int = 256,
                    box: float = 6.0, grid: int = 401, grad_tol: float = 1e-6) -> list[LoopPath]:
    """Connected components of ``{f0 = level}`` as counterclockwise loops.

    Components are located on a grid and then resampled at equally spaced
    angles about their centroid, each sample solved to ``|f0 - level| < 1e-12``
    by Newton iteration along the ray.  Components that reach the edge of
    the ``[-box, box]^2`` window are rejected rather than stitched across charts.
    """
    from skimage.measure import find_contours

    xs = np.linspace(-box, box, grid)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    vals = f0(X + 1j * Y)
    if not (vals.min() <= level <= vals.max()):
        raise ValueError(f"empty level set for level {level}")
    contours = find_contours(vals, level)
    if not contours:
        raise ValueError(f"level {level} is critical (no regular component found)")
    h = xs[1] - xs[0]
    loops = []
    for c in contours:
        zc = (xs[0] + c[:, 0] * h) + 1j * (xs[0] + c[:, 1] * h)
        if abs(zc[0] - zc[-1]) > 1e-9 * box or np.max(np.abs(zc.real)) >= box - 2 * h \
                or np.max(np.abs(zc.imag)) >= box - 2 * h:
            raise ValueError("level set leaves the chart window")
        if len(zc) < 8:
            raise ValueError(f"level {level} is critical (degenerate component)")
        loops.append(_resample_star(f0, zc[:-1], level, n_samples, grad_tol))
    loops.sort(key=lambda lp: (round(lp.center.real, 6), round(lp.center.imag, 6)))
    return loops


def _resample_star(f0: Observable, zc: np.ndarray, level: float, n: int, grad_tol: float) -> LoopPath:
    # centroid of the polygon, not of the vertices
    x, y = zc.real, zc.imag
    x1, y1 = np.roll(x, -1), np.roll(y, -1)
    cross = x * y1 - x1 * y
    area = 0.5 * np.sum(cross)
    if abs(area) < 1e-14:
        raise ValueError("degenerate level set component")
    center = complex(np.sum((x + x1) * cross) / (6 * area), np.sum((y + y1) * cross) / (6 * area))
    rel = zc - center
    ang = np.angle(rel)
    order = np.argsort(ang)
    ang_s, rho_s = ang[order], np.abs(rel)[order]
    steps = np.diff(np.unwrap(np.angle(rel)))
    if area < 0:
        steps = -steps
    if np.any(steps < -1e-9):
        raise ValueError("level set component is not star-shaped about its centroid")
    phi = 2 * np.pi * np.arange(n) / n
    phi_w = np.angle(np.exp(1j * phi))
    rho = np.interp(phi_w, ang_s, rho_s, period=2 * np.pi)
    return project_level(f0, center, rho, level, grad_tol)


def project_level(f0: Observable, center: complex, rho, level: float,
                  grad_tol: float = 1e-6) -> LoopPath:
    """Solve ``f0(center + rho_j e^{i phi_j}) = level`` along equally spaced rays.

    ``rho`` is the initial guess, one radius per ray.
    """
    rho = np.array(rho, dtype=float)
    n = rho.size
    e = np.exp(2j * np.pi * np.arange(n) / n)
    for _ in range(60):
        jet = f0.jet(center + rho * e, 1)
        drho = 2 * np.real(jet.deriv(1, 0) * e)
        if np.any(np.abs(drho) < grad_tol):
            raise ValueError(f"level {level} is critical (vanishing gradient)")
        step = (jet.value.real - level) / drho
        rho = rho - step
        if np.max(np.abs(step)) < 1e-15 * max(1.0, np.max(rho)):
            break
    if np.any(rho <= 0):
        raise ValueError("level set is not star-shaped about the chosen center")
    z = center + rho * e
    jet = f0.jet(z, 1)
    if np.max(np.abs(jet.value.real - level)) > 1e-10:
        raise ValueError("level set projection did not converge")
    if np.min(2 * np.abs(jet.deriv(1, 0))) < grad_tol:
        raise ValueError(f"level {level} is critical (vanishing gradient)")
    return LoopPath(z, center=center, level=level)
