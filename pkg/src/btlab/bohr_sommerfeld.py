"""Bohr-Sommerfeld conditions for level sets of a real function on CP^1.

For a regular window ``I`` of values of ``f0`` with one family of level
loops ``Gamma_lambda``, the predicted eigenvalues at level ``k`` are the
``lambda in I`` with

    k a(lambda) + a1(lambda) + eps pi + corr(lambda)  in  2 pi Z

where ``a`` and ``a1`` are the holonomy phases of ``L`` and ``L1`` along the
loop, ``eps`` the half-form index and ``corr = -\\oint f1 dt`` accounts for a
subprincipal symbol ``f1`` (``dt`` is flow time of the Hamiltonian field).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from . import conventions
from .fitting import ConvergenceFit, fit_loglog
from .geometry import (KahlerModel, LoopPath, Twist, action, auxiliary_bundle, bundle,
                       enclosed_area, level_set_loops, omega1_scalar, project_level,
                       spectral_derivative)
from .observables import Observable, hamiltonian_field

__all__ = [
    "ActionProfile",
    "BSSet",
    "MatchReport",
    "VariationResidual",
    "action_profile",
    "halfform_index",
    "flow_time_integral",
    "solve_bs",
    "match_spectrum",
    "fit_match",
    "write_match_csv",
    "match_summary",
    "variation_check",
    "geodesic_curvature_integral",
    "geodesic_curvature_crosscheck",
]


def flow_time_integral(f0: Observable, loop: LoopPath, g=None) -> float:
    """``\\oint g dt`` where ``dt = dz / X^z`` is flow time of ``X_{f0}`` along the loop.

    With ``g=None`` this is the signed period.
    """
    z = loop.samples
    X = hamiltonian_field(f0, z)
    if np.min(np.abs(X)) < 1e-12:
        raise ValueError("Hamiltonian field vanishes on the loop")
    vals = loop.tangents / X
    if g is not None:
        vals = vals * (g(z) if callable(g) else g)
    out = np.sum(vals) * loop.ds
    return float(out.real)


def _winding(c: np.ndarray) -> tuple[int, float]:
    ph = np.angle(c)
    steps = np.angle(np.exp(1j * np.diff(np.concatenate([ph, ph[:1]]))))
    return int(round(np.sum(steps) / (2 * np.pi))), float(np.max(np.abs(steps)))


def _fourier_upsample(z: np.ndarray, factor: int) -> np.ndarray:
    n = z.size
    c = np.fft.fft(z)
    m = n * factor
    out = np.zeros(m, dtype=complex)
    h = n // 2
    out[:h] = c[:h]
    out[-(n - h):] = c[h:]
    if n % 2 == 0:
        out[h] = 0.5 * c[h]
        out[-h] = 0.5 * c[h]
    return np.fft.ifft(out) * factor


def halfform_index(model: KahlerModel, loop: LoopPath, frame: Callable | None = None,
                   max_refine: int = 6) -> int:
    """Parity of the winding of ``c(s) = <phi(u^2), gamma'(s)>``.

    ``u`` is the chart half-form frame ``sqrt(dz)`` multiplied by ``frame(z)``
    (any nonvanishing function), so ``c = frame(z)^2 z'(s)``.  Samples are
    refined by Fourier interpolation until successive phase steps are below
    ``pi/4``.
    """
    z = loop.samples
    for _ in range(max_refine + 1):
        dz = spectral_derivative(z)
        c = dz if frame is None else dz * np.asarray(frame(z)) ** 2
        if np.min(np.abs(c)) < 1e-12 * np.max(np.abs(c)):
            raise ValueError("half-form pairing vanishes on the loop")
        w, step = _winding(c)
        if step < np.pi / 4:
            return w % 2
        z = _fourier_upsample(z, 2)
    raise ValueError("winding not resolved after refinement")


@dataclass(frozen=True)
class ActionProfile:
    """Actions along one family of level loops, sampled on ``lambda_grid``.

    ``centers`` and ``radii`` record each sampled loop (radii along equally
    spaced rays from the center), so loops at intermediate values are
    recovered by a few Newton steps.
    """

    lambda_grid: np.ndarray
    a: np.ndarray
    a1: np.ndarray
    eps: int
    f1_correction: np.ndarray
    period: np.ndarray
    twist: Twist
    f0: Observable = field(repr=False)
    f1: Observable | None = field(repr=False)
    centers: np.ndarray = field(repr=False)
    radii: np.ndarray = field(repr=False)
    model: KahlerModel = field(repr=False)

    def loop_at(self, lam: float) -> LoopPath:
        if not (self.lambda_grid[0] <= lam <= self.lambda_grid[-1]):
            raise ValueError(f"{lam} outside the profile window")
        i = int(np.argmin(np.abs(self.lambda_grid - lam)))
        return project_level(self.f0, complex(self.centers[i]), self.radii[i], lam)

    def evaluate(self, lam: float) -> tuple[float, float, float]:
        """``(a, a1, corr)`` at ``lam``."""
        return _loop_actions(self.loop_at(lam), self.twist, self.f0, self.f1)

    def total_phase(self, lam: float, k: int) -> float:
        a, a1, corr = self.evaluate(lam)
        return k * a + a1 + self.eps * np.pi + corr

    def grid_phase(self, k: int) -> np.ndarray:
        return k * self.a + self.a1 + self.eps * np.pi + self.f1_correction

    @property
    def volume(self) -> float:
        """Area swept over the window, ``|a(lam_min) - a(lam_max)|``."""
        return float(abs(self.a[0] - self.a[-1]))


def _loop_actions(loop: LoopPath, twist: Twist, f0: Observable, f1) -> tuple[float, float, float]:
    a = action(bundle("prequantum"), loop)
    a1 = action(auxiliary_bundle(twist), loop)
    corr = 0.0
    if f1 is not None:
        corr = conventions.SUBPRINCIPAL_SIGN * flow_time_integral(f0, loop, f1)
    return a, a1, corr


def action_profile(model: KahlerModel, twist: Twist, f0: Observable, window: tuple[float, float],
                   f1: Observable | None = None, grid_size: int = 33, component: int = 0,
                   n_samples: int = 256) -> ActionProfile:
    """Sample ``a``, ``a1``, ``eps`` and the ``f1`` correction over ``window``.

    ``component`` selects a loop family when level sets are disconnected
    (families are tracked by nearest center).  Raises ``ValueError`` when the
    window contains a critical value.
    """
    lo, hi = window
    if not lo < hi:
        raise ValueError("window must be increasing")
    lams = np.linspace(lo, hi, grid_size)
    a, a1, corr, per, eps, centers, radii = [], [], [], [], [], [], []
    prev = None
    for lam in lams:
        loops = level_set_loops(model, f0, lam, n_samples=n_samples)
        if prev is None:
            if component >= len(loops):
                raise ValueError(f"level {lam} has only {len(loops)} components")
            loop = loops[component]
        else:
            loop = min(loops, key=lambda lp: abs(lp.center - prev))
        prev = loop.center
        x = _loop_actions(loop, twist, f0, f1)
        a.append(x[0])
        a1.append(x[1])
        corr.append(x[2])
        per.append(flow_time_integral(f0, loop))
        eps.append(halfform_index(model, loop))
        centers.append(loop.center)
        radii.append(np.abs(loop.samples - loop.center))
    if len(set(eps)) != 1:
        raise ValueError("half-form index changes across the window")
    a = np.array(a)
    if np.any(np.abs(np.diff(a)) >= np.pi):
        raise ValueError("action jumps by more than pi between grid points; refine the grid")
    return ActionProfile(lams, a, np.array(a1), eps[0], np.array(corr), np.array(per), twist,
                         f0, f1, np.array(centers), np.array(radii), model)


@dataclass(frozen=True)
class BSSet:
    k: int
    points: np.ndarray
    multiplicities: np.ndarray
    window: tuple[float, float]


def solve_bs(profile: ActionProfile, k: int, xtol: float = 1e-13) -> BSSet:
    """All ``lambda`` in the profile window where the total phase lies in ``2 pi Z``."""
    lam = profile.lambda_grid
    ph = profile.grid_phase(k)
    d = np.diff(ph)
    if not (np.all(d > 0) or np.all(d < 0)):
        raise ValueError("total phase is not strictly monotone on the window")
    lo, hi = min(ph[0], ph[-1]), max(ph[0], ph[-1])
    ns = np.arange(int(np.ceil(lo / (2 * np.pi))), int(np.floor(hi / (2 * np.pi))) + 1)
    pts = []
    sgn = 1.0 if d[0] > 0 else -1.0
    for n in ns:
        target = 2 * np.pi * n
        i = int(np.searchsorted(sgn * ph, sgn * target))
        g = lambda x: profile.total_phase(x, k) - target
        # a root on (or within rounding of) a grid node may sit in either neighbour
        for j in (i, i - 1, i + 1):
            j = min(max(j, 1), lam.size - 1)
            l0, l1 = lam[j - 1], lam[j]
            g0, g1 = g(l0), g(l1)
            if g0 * g1 <= 0:
                break
        else:
            raise ValueError("bracket lost while solving the Bohr-Sommerfeld condition")
        if g0 == 0.0:
            pts.append(l0)
        elif g1 == 0.0:
            pts.append(l1)
        else:
            pts.append(brentq(g, l0, l1, xtol=xtol, rtol=4 * np.finfo(float).eps))
    pts = np.unique(np.array(pts))
    return BSSet(k, pts, np.ones(pts.size, dtype=int), (float(lam[0]), float(lam[-1])))


@dataclass(frozen=True)
class MatchReport:
    k: int
    window: tuple[float, float]
    n_true: int
    n_bs: int
    lambda_true: np.ndarray
    lambda_bs: np.ndarray
    deviations: np.ndarray
    max_deviation: float
    margin_ok: bool = True

    @property
    def counts_equal(self) -> bool:
        return self.n_true == self.n_bs


def _safe_window(points: np.ndarray, lo: float, hi: float, bounds: tuple[float, float]):
    # endpoints placed half-way between consecutive BS points
    def snap(x):
        j = int(np.searchsorted(points, x))
        if 0 < j < points.size:
            return 0.5 * (points[j - 1] + points[j])
        if points.size < 2:
            raise ValueError("too few Bohr-Sommerfeld points to place a window")
        gap = points[1] - points[0] if j == 0 else points[-1] - points[-2]
        out = points[0] - 0.5 * gap if j == 0 else points[-1] + 0.5 * gap
        if not bounds[0] <= out <= bounds[1]:
            # drop the extreme point rather than leave the profile range
            out = points[0] + 0.5 * gap if j == 0 else points[-1] - 0.5 * gap
        return out

    return snap(lo), snap(hi)


def match_spectrum(bs: BSSet, eigenvalues, window: tuple[float, float] | None = None,
                   margin: float = 0.5) -> MatchReport:
    """Compare eigenvalues with ``bs.points`` on a window.

    Window ends are moved to midpoints between consecutive BS points;
    ``margin_ok`` records whether they keep distance ``>= margin/k`` from both
    sets.  When the two counts differ the report carries ``max_deviation = inf``.
    """
    ev = np.sort(np.asarray(eigenvalues, dtype=float))
    pts = bs.points
    lo, hi = window if window is not None else bs.window
    lo, hi = _safe_window(pts, max(lo, bs.window[0]), min(hi, bs.window[1]), bs.window)
    gaps = [np.min(np.abs(s - end)) for end in (lo, hi) for s in (pts, ev) if s.size]
    margin_ok = bool(min(gaps, default=np.inf) >= margin / bs.k)
    lt = ev[(ev > lo) & (ev < hi)]
    lb = pts[(pts > lo) & (pts < hi)]
    if lt.size == lb.size:
        dev = lt - lb
        mx = float(np.max(np.abs(dev))) if dev.size else 0.0
    else:
        dev = np.array([])
        mx = np.inf
    return MatchReport(bs.k, (float(lo), float(hi)), int(lt.size), int(lb.size), lt, lb, dev, mx,
                       margin_ok)


def fit_match(reports: Sequence[MatchReport]) -> ConvergenceFit:
    return fit_loglog([r.k for r in reports], [r.max_deviation for r in reports])


def write_match_csv(reports: Sequence[MatchReport], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "j", "lambda_true", "lambda_bs", "deviation"])
        for r in reports:
            for j, (lt, lb) in enumerate(zip(r.lambda_true, r.lambda_bs)):
                w.writerow([r.k, j, f"{lt:.15e}", f"{lb:.15e}", f"{lt - lb:.6e}"])


def match_summary(reports: Sequence[MatchReport], path=None) -> dict:
    out = {
        "per_k": [{"k": r.k, "window": list(r.window), "n_true": r.n_true, "n_bs": r.n_bs,
                   "max_deviation": r.max_deviation, "margin_ok": r.margin_ok} for r in reports],
    }
    if len(reports) >= 2:
        out["fit"] = fit_match(reports).as_dict()
    if path is not None:
        Path(path).write_text(json.dumps(out, indent=2))
    return out


@dataclass(frozen=True)
class VariationResidual:
    area: float
    residual_a: float
    residual_a1: float


def variation_check(profile: ActionProfile, lam: float, lam_prime: float) -> VariationResidual:
    """Compare action differences with ``int_D omega`` and ``int_D omega_1`` on the region between two loops.

    The region integral is an independent polar quadrature of each enclosed area.
    """
    if lam_prime > lam:
        raise ValueError("expected lam_prime <= lam")
    L, Lp = profile.loop_at(lam), profile.loop_at(lam_prime)
    area = enclosed_area(profile.model, Lp) - enclosed_area(profile.model, L)
    a, a1, _ = profile.evaluate(lam)
    ap, a1p, _ = profile.evaluate(lam_prime)
    c = omega1_scalar(profile.twist)
    return VariationResidual(area, abs((ap - a) - area), abs((a1p - a1) - c * area))


def geodesic_curvature_integral(model: KahlerModel, loop: LoopPath) -> float:
    """``\\oint k_g ds`` in the Kahler metric ``2 G |dz|^2``.

    For ``g = e^{2 sigma}|dz|^2`` one has ``k_g ds = kappa_0 ds_0 - d sigma(i T) ds_0``
    with ``kappa_0`` the Euclidean curvature and ``T`` the unit tangent.
    """
    z = loop.samples
    dz = loop.tangents
    d2z = spectral_derivative(dz)
    kappa = np.imag(d2z / dz)
    # sigma = log(2)/2 - log(1 + |z|^2);  d sigma (v) = Re(2 sigma_z v)
    sigma_z = -np.conj(z) / (1 + np.abs(z) ** 2)
    normal_term = -np.real(2 * sigma_z * 1j * dz)
    return float(np.sum(kappa + normal_term) * loop.ds)


def geodesic_curvature_crosscheck(model: KahlerModel, loop: LoopPath, a1: float, eps: int) -> float:
    """Distance mod ``2 pi`` between ``a1 + eps pi`` and ``GEODESIC_CURVATURE_FACTOR * \\oint k_g ds``."""
    kg = geodesic_curvature_integral(model, loop)
    d = a1 + eps * np.pi - conventions.GEODESIC_CURVATURE_FACTOR * kg
    return float(abs(np.angle(np.exp(1j * d))))
