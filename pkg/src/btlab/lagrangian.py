"""Lagrangian quasimodes concentrated on Bohr-Sommerfeld loops.

Along a level loop ``Gamma`` the state restricts to ``t^k (x) g0``: ``t`` is a
flat section of ``L`` and ``g0`` a section of ``L1 (x) delta`` solving the
transport equation of the Hamiltonian flow.  In the chart frames
``e_{L1} (x) sqrt(dz)`` the solution is

    g0 = (X^z)^(-1/2) exp(-int A1 - i int f1 dt),

and the product ``t^k g0`` is a single-valued function on the loop exactly at
the Bohr-Sommerfeld levels.  Its Cauchy coefficients against ``z^(-m-1) dz``
are the monomial coefficients of the quasimode.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import LoopPath, Twist, auxiliary_bundle, bundle, spectral_antiderivative
from .observables import Observable, hamiltonian_field
from .quantum import QuantumSpace
from .toeplitz import Operator

__all__ = [
    "TransportSolution",
    "Quasimode",
    "NormDensityResult",
    "solve_transport",
    "naive_transport",
    "total_monodromy",
    "build_quasimode",
    "residual_check",
    "norm_density_check",
]


@dataclass(frozen=True)
class TransportSolution:
    """``log g0`` on the loop samples in the frame ``e_{L1} (x) sqrt(dz)``.

    ``log_g0`` is continuous along the parameter; ``monodromy`` is
    ``g0(2 pi) / g0(0)`` for the continued solution.
    """

    loop: LoopPath = field(repr=False)
    log_g0: np.ndarray = field(repr=False)
    monodromy: complex
    twist: Twist
    label: str = "transport"

    @property
    def g0(self) -> np.ndarray:
        return np.exp(self.log_g0)


def solve_transport(loop: LoopPath, f0: Observable, twist: Twist,
                    f1: Observable | None = None) -> TransportSolution:
    """Integrate the transport equation of ``X_{f0}`` around ``loop``.

    Raises ``ValueError`` when the Hamiltonian field vanishes on the loop.
    """
    z, dz = loop.samples, loop.tangents
    X = hamiltonian_field(f0, z)
    if np.min(np.abs(X)) < 1e-12:
        raise ValueError("Hamiltonian field vanishes on the loop")
    integrand = -auxiliary_bundle(twist).connection_form(z) * dz
    if f1 is not None:
        integrand = integrand - 1j * f1(z) * dz / X
    F, total = spectral_antiderivative(integrand)
    argX = np.unwrap(np.angle(X))
    turn = argX[-1] - argX[0] + np.angle(X[0] / X[-1])
    winding = int(round(turn / (2 * np.pi)))
    log_g0 = F - 0.5 * (np.log(np.abs(X)) + 1j * argX)
    mono = np.exp(total - 1j * np.pi * winding)
    return TransportSolution(loop, log_g0, complex(mono / abs(mono)), twist)


def naive_transport(solution: TransportSolution) -> TransportSolution:
    """Constant-modulus ``g0`` with phase linear in the parameter and the same monodromy."""
    n = solution.loop.n
    s = 2 * np.pi * np.arange(n) / n
    theta = np.angle(solution.monodromy)
    return TransportSolution(solution.loop, 1j * theta * s / (2 * np.pi), solution.monodromy,
                             solution.twist, "naive")


def _log_flat_section(loop: LoopPath, k: int) -> tuple[np.ndarray, complex]:
    integrand = -k * bundle("prequantum").connection_form(loop.samples) * loop.tangents
    return spectral_antiderivative(integrand)


def total_monodromy(solution: TransportSolution, k: int) -> complex:
    """Monodromy of ``t^k (x) g0``; equals 1 at Bohr-Sommerfeld levels."""
    _, tot = _log_flat_section(solution.loop, k)
    m = np.exp(tot) * solution.monodromy
    return complex(m / abs(m))


@dataclass(frozen=True)
class Quasimode:
    coefficients: np.ndarray
    loop: LoopPath = field(repr=False)
    k: int
    symbol_tag: str
    transport: TransportSolution = field(repr=False)

    @property
    def peak_index(self) -> int:
        return int(np.argmax(np.abs(self.coefficients)))

    def mass_within(self, radius: float) -> float:
        m = np.arange(self.coefficients.size)
        p = np.abs(self.coefficients) ** 2
        return float(np.sum(p[np.abs(m - self.peak_index) <= radius]) / np.sum(p))


def build_quasimode(space: QuantumSpace, solution: TransportSolution, tag: str = "",
                    bs_tol: float = 1e-6, noise: float = 1e-12) -> Quasimode:
    """Unit quasimode in the orthonormal basis of ``space``.

    The monomial Gram matrix is diagonal for this model, so orthonormal
    coordinates are ``sqrt(G_mm) c_m``; everything is assembled in log form.
    A contour coefficient smaller than ``noise`` times the sum of the moduli
    of its terms is cancellation noise and is set to zero: far from the peak
    index that noise is amplified by ``sqrt(G_mm) r^-m`` and would swamp the
    state.
    """
    k = space.k
    mono = total_monodromy(solution, k)
    if abs(mono - 1) > bs_tol:
        raise ValueError(f"level fails the Bohr-Sommerfeld condition (monodromy {mono:.6f})")
    loop = solution.loop
    log_t, _ = _log_flat_section(loop, k)
    log_sigma = log_t + solution.log_g0
    G = space.gram.entries
    off = np.max(np.abs(G - np.diag(np.diag(G)))) / np.max(np.abs(np.diag(G)))
    if off > 1e-10:
        raise ValueError("non-diagonal Gram matrix; quasimode coefficients need the full transform")
    m = np.arange(space.dim)
    z, dz = loop.samples, loop.tangents
    # c_m = (1 / 2 pi i) sum_j sigma_j z_j^(-m-1) z'_j ds
    terms = (log_sigma[:, None] - (m[None, :] + 1) * np.log(z)[:, None]
             + np.log(dz)[:, None] + np.log(loop.ds / (2j * np.pi)))
    log_c = _complex_logsumexp(terms)
    log_abs = _complex_logsumexp(terms.real)
    keep = log_c.real > log_abs.real + np.log(noise)
    if not np.any(keep):
        raise ValueError("all quasimode coefficients are below the cancellation floor")
    log_b = log_c + 0.5 * np.log(np.real(np.diag(G)))
    shift = np.max(log_b.real[keep])
    b = np.where(keep, np.exp(log_b - shift), 0.0)
    b = b / np.linalg.norm(b)
    return Quasimode(b, loop, k, tag or solution.label, solution)


def _complex_logsumexp(terms: np.ndarray) -> np.ndarray:
    """``log sum_j exp(terms[j, m])`` column-wise for complex ``terms``."""
    mx = np.max(terms.real, axis=0)
    s = np.sum(np.exp(terms - mx[None, :]), axis=0)
    with np.errstate(divide="ignore"):
        return mx + np.log(s)


def residual_check(op: Operator, E: float, qm: Quasimode) -> float:
    """``||(A - E) psi|| / ||psi||``."""
    c = qm.coefficients
    return float(np.linalg.norm(op.matrix @ c - E * c) / np.linalg.norm(c))


@dataclass(frozen=True)
class NormDensityResult:
    lhs: float
    rhs: float

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)


def norm_density_check(space: QuantumSpace, qm: Quasimode, xi: Callable) -> NormDensityResult:
    """``int xi |Psi|^2 dmu`` against ``\\oint xi m(g0) / \\oint m(g0)``.

    ``m(g0) = |g0|^2 exp(-psi_1) |gamma'| ds`` pairs the ``L1`` norm with the
    half-form modulus.  ``Psi`` is unit-normalized, so the loop side is
    normalized to total mass one as well.
    """
    q = space.quad
    vals = space.node_values @ qm.coefficients
    lhs = float(q.integrate(xi(q.z) * np.abs(vals) ** 2).real)
    loop, sol = qm.loop, qm.transport
    z = loop.samples
    log_m = 2 * sol.log_g0.real - auxiliary_bundle(sol.twist).metric_log_weight(z) + np.log(np.abs(loop.tangents))
    w = np.exp(log_m - np.max(log_m))
    rhs = float(np.sum(xi(z) * w) / np.sum(w))
    return NormDensityResult(lhs, rhs)
