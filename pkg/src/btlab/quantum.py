"""Holomorphic sections of ``L^k (x) K`` on CP^1, their Gram matrix and an orthonormal frame.

Sections are written as ``z^m`` (``m = 0..N``) in the chart frame, with
``N = k + deg K``.  The pointwise norm of ``z^m`` is
``|z|^m (1 + |z|^2)^(-N/2)``, which in the quadrature variable ``u`` reads
``u^(m/2) (1 - u)^((N - m)/2)``; values are always formed that way so that
nothing overflows for large ``N``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import cholesky, solve_triangular

from .geometry import (KahlerModel, LineBundleData, QuadratureGrid, Twist, bundle,
                       build_quadrature, fubini_study_model, omega1_scalar)

__all__ = [
    "SectionBasis",
    "GramMatrix",
    "OrthonormalMap",
    "QuantumSpace",
    "riemann_roch_dimension",
    "basis",
    "gram",
    "orthonormalize",
    "quantum_space",
    "CONDITION_LIMIT",
]

CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class SectionBasis:
    model: KahlerModel
    k: int
    twist: Twist
    line: LineBundleData

    @property
    def degree(self) -> int:
        return self.line.degree

    @property
    def dim(self) -> int:
        return self.degree + 1

    def log_norm(self, z) -> np.ndarray:
        """``log |z^m|_h`` for every basis element, shape ``z.shape + (dim,)``."""
        z = np.asarray(z, dtype=complex)
        m = np.arange(self.dim)
        with np.errstate(divide="ignore"):
            logr = np.log(np.abs(z))[..., None]
        return m * logr - 0.5 * self.line.weight * np.log1p(np.abs(z) ** 2)[..., None]

    def unitary_values(self, z) -> np.ndarray:
        """``z^m exp(-psi/2)``, i.e. sections expressed in a unitary frame."""
        z = np.asarray(z, dtype=complex)
        phase = np.exp(1j * np.angle(z))[..., None] ** np.arange(self.dim)
        return np.exp(self.log_norm(z)) * phase

    def quadrature_values(self, quad: QuadratureGrid) -> np.ndarray:
        """Unitary-frame values on quadrature nodes, computed from ``(u, theta)``."""
        m = np.arange(self.dim)
        N = self.degree
        u = quad.u[:, None]
        with np.errstate(divide="ignore"):
            logmod = 0.5 * m * np.log(u) + 0.5 * (N - m) * np.log1p(-u)
        return np.exp(logmod + 1j * m * quad.theta[:, None])


def riemann_roch_dimension(model: KahlerModel, k: int, twist: Twist) -> int:
    """``(k / 2 pi) int (omega + omega_1 / k)`` as an exact integer."""
    val = (k * model.total_area + omega1_scalar(twist) * model.total_area) / (2 * np.pi)
    n = int(round(val))
    if abs(val - n) > 1e-9:
        raise ValueError(f"non-integral Riemann-Roch count {val}")
    return n


def basis(model: KahlerModel, k: int, twist: Twist) -> SectionBasis:
    if k < 1:
        raise ValueError("k must be a positive integer")
    line = bundle("prequantum").power(k).tensor(bundle("twist", twist))
    b = SectionBasis(model, k, twist, line)
    if b.dim != riemann_roch_dimension(model, k, twist):
        raise AssertionError("basis size disagrees with Riemann-Roch")
    return b


@dataclass(frozen=True)
class GramMatrix:
    entries: np.ndarray

    @cached_property
    def scaled_condition(self) -> float:
        """Condition number after symmetric diagonal (Jacobi) scaling."""
        d = 1.0 / np.sqrt(np.real(np.diag(self.entries)))
        return float(np.linalg.cond(d[:, None] * self.entries * d[None, :]))


def gram(b: SectionBasis, quad: QuadratureGrid) -> GramMatrix:
    E = b.quadrature_values(quad)
    G = (E.conj().T * quad.weights) @ E
    G = 0.5 * (G + G.conj().T)
    try:
        np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise ValueError("Gram matrix is not positive definite") from exc
    return GramMatrix(G)


@dataclass(frozen=True)
class OrthonormalMap:
    """``transform`` maps orthonormal coordinates to monomial coefficients."""

    transform: np.ndarray
    chol: np.ndarray

    def to_monomial(self, c):
        return self.transform @ c

    def from_monomial(self, b):
        return self.chol.conj().T @ b


def orthonormalize(G: GramMatrix, limit: float = CONDITION_LIMIT) -> OrthonormalMap:
    """Cholesky-based orthonormal frame.

    The guard uses the Jacobi-scaled condition number: the raw monomial Gram
    matrix is diagonal with entries spanning ``~2^N``, which is harmless.
    """
    if G.scaled_condition > limit:
        raise ValueError(f"Gram matrix ill-conditioned (scaled cond {G.scaled_condition:.3e})")
    L = cholesky(G.entries, lower=True)
    T = solve_triangular(L, np.eye(L.shape[0]), lower=True).conj().T
    return OrthonormalMap(T, L)


@dataclass
class QuantumSpace:
    """A quantum space ``H_k`` together with everything needed to assemble operators."""

    basis: SectionBasis
    quad: QuadratureGrid
    gram: GramMatrix
    onb: OrthonormalMap
    extra_degree: int

    @property
    def k(self) -> int:
        return self.basis.k

    @property
    def twist(self) -> Twist:
        return self.basis.twist

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def model(self) -> KahlerModel:
        return self.basis.model

    @cached_property
    def node_values(self) -> np.ndarray:
        """Orthonormal sections on quadrature nodes, shape ``(nodes, dim)``."""
        return self.basis.quadrature_values(self.quad) @ self.onb.transform

    def section_values(self, coeffs, z) -> np.ndarray:
        """Unitary-frame values of the section with orthonormal coordinates ``coeffs``."""
        return self.basis.unitary_values(z) @ (self.onb.transform @ coeffs)


def quantum_space(k: int, twist: Twist, model: KahlerModel | None = None,
                  extra_degree: int = 8) -> QuantumSpace:
    """Build ``H_k`` with a quadrature exact for symbols of degree ``<= extra_degree``.

    Smooth non-polynomial symbols are integrated to spectral accuracy with
    the same grid; raise ``extra_degree`` for sharply varying ones.
    """
    model = model or fubini_study_model()
    b = basis(model, k, twist)
    N = b.degree
    quad = build_quadrature(model, (N + extra_degree) // 2 + 2, N + extra_degree + 1)
    G = gram(b, quad)
    return QuantumSpace(b, quad, G, orthonormalize(G), extra_degree)
