"""Toeplitz operators ``T_k(f) = Pi_k f Pi_k`` and the quantization ``Q(f)``.

Operators are dense matrices in the orthonormal basis of a ``QuantumSpace``.
``Q(f) = T_k(f - Delta f / 2k)`` is the operator whose normalized symbol is
``f`` with no subprincipal part; ``T_k(f)`` itself has normalized symbol
``f + Delta f / 2k``.

The symbolic-calculus checks below return operator-norm defects; order
statements are made by fitting them over a range of ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .fitting import ConvergenceFit, fit_loglog
from .geometry import Twist, omega1_scalar
from .observables import (Observable, compose, constant, holomorphic_laplacian,
                          poisson_bracket)
from .quantum import QuantumSpace, quantum_space

__all__ = [
    "Operator",
    "SymbolSeries",
    "assemble",
    "quantize_gq",
    "quantize",
    "quantize_series",
    "normalized_symbol",
    "spectrum",
    "op_norm",
    "product_defect",
    "commutator_defect",
    "trace_check",
    "TraceReport",
    "functional_calculus_check",
    "FunctionalCalculusReport",
    "HERMITIAN_TOL",
]

Scheme = Literal["toeplitz", "gq"]
HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class Operator:
    matrix: np.ndarray
    k: int
    twist: Twist
    tag: str = ""

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def hermitian_defect(self) -> float:
        A = self.matrix
        return float(np.max(np.abs(A - A.conj().T))) if A.size else 0.0

    def __matmul__(self, other: "Operator") -> "Operator":
        return Operator(self.matrix @ other.matrix, self.k, self.twist, f"{self.tag}*{other.tag}")

    def __sub__(self, other: "Operator") -> "Operator":
        return Operator(self.matrix - other.matrix, self.k, self.twist, f"{self.tag}-{other.tag}")


@dataclass(frozen=True)
class SymbolSeries:
    """Two-term symbol ``f0 + f1 / k``."""

    f0: Observable
    f1: Observable = field(default_factory=lambda: constant(0.0))

    def at(self, k: int) -> Observable:
        return self.f0 + self.f1 * (1.0 / k)


def _node_values(f, space: QuantumSpace) -> np.ndarray:
    z = space.quad.z
    if isinstance(f, Observable):
        if f.degree is not None and f.degree > space.extra_degree:
            raise ValueError(f"symbol degree {f.degree} exceeds quadrature exactness "
                             f"{space.extra_degree}; rebuild the space with a larger extra_degree")
        return f(z)
    return np.asarray(f(z))


def assemble(f, space: QuantumSpace, tag: str | None = None) -> Operator:
    """Matrix of ``T_k(f)`` in the orthonormal basis.

    ``f`` is an ``Observable`` or any vectorized callable of the chart point.
    """
    vals = _node_values(f, space)
    E = space.node_values
    A = (E.conj().T * (space.quad.weights * vals)) @ E
    op = Operator(A, space.k, space.twist, tag or getattr(f, "name", "f"))
    if np.isrealobj(vals) and op.hermitian_defect() > HERMITIAN_TOL * max(1.0, np.max(np.abs(A))):
        raise ValueError("real multiplier gave a non-Hermitian matrix (under-resolved quadrature)")
    if np.isrealobj(vals):
        op = Operator(0.5 * (A + A.conj().T), op.k, op.twist, op.tag)
    return op


def quantize_gq(f: Observable, space: QuantumSpace) -> Operator:
    """``Q(f) = T_k(f - Delta f / 2k)``."""
    h = f - holomorphic_laplacian(f) * (1.0 / (2 * space.k))
    return assemble(h, space, tag=f"Q({f.name})")


def quantize(f: Observable, space: QuantumSpace, scheme: Scheme = "gq") -> Operator:
    if scheme == "gq":
        return quantize_gq(f, space)
    if scheme == "toeplitz":
        return assemble(f, space, tag=f"T({f.name})")
    raise ValueError(f"unknown scheme {scheme!r}")


def normalized_symbol(f: Observable, scheme: Scheme) -> SymbolSeries:
    """Normalized symbol ``(f0, f1)`` of ``quantize(f, scheme)``."""
    if scheme == "gq":
        return SymbolSeries(f)
    if scheme == "toeplitz":
        return SymbolSeries(f, holomorphic_laplacian(f) * 0.5)
    raise ValueError(f"unknown scheme {scheme!r}")


def quantize_series(series: SymbolSeries, space: QuantumSpace) -> Operator:
    """An operator with normalized symbol ``f0 + f1/k + O(1/k^2)``."""
    return quantize_gq(series.at(space.k), space)


def spectrum(op: Operator, check: bool = True) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian operator."""
    A = op.matrix
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if op.hermitian_defect() > HERMITIAN_TOL * scale:
        raise ValueError("spectrum requires a Hermitian operator")
    w, V = np.linalg.eigh(0.5 * (A + A.conj().T))
    if check and A.size:
        res = np.max(np.linalg.norm(A @ V - V * w, axis=0))
        if res > HERMITIAN_TOL * scale:
            raise ValueError(f"eigen-residual {res:.2e} too large")
    return w


def op_norm(A) -> float:
    A = A.matrix if isinstance(A, Operator) else A
    return float(np.linalg.norm(A, 2)) if A.size else 0.0


def product_defect(f: Observable, g: Observable, space: QuantumSpace) -> float:
    """``||T(f) T(g) - T(fg)||``."""
    Tf, Tg, Tfg = assemble(f, space), assemble(g, space), assemble(f * g, space)
    return op_norm(Tf.matrix @ Tg.matrix - Tfg.matrix)


def _pi1_pairing(f: Observable, g: Observable, twist: Twist) -> Observable:
    # <pi_1, df ^ dg> = -<X_f ^ X_g, omega_1> = -c {f, g}  for omega_1 = c omega
    return poisson_bracket(f, g) * (-omega1_scalar(twist))


def commutator_defect(f: Observable, g: Observable, space: QuantumSpace,
                      with_correction: bool = True) -> float:
    """``||i k [Q(f), Q(g)] - T(h)||``.

    Without correction ``h = {f, g}``.  With correction
    ``h = (1 - Delta/2k){f, g} + k^-1 <pi_1, df ^ dg>``.
    """
    k = space.k
    Qf, Qg = quantize_gq(f, space).matrix, quantize_gq(g, space).matrix
    lhs = 1j * k * (Qf @ Qg - Qg @ Qf)
    br = poisson_bracket(f, g)
    if with_correction:
        h = br - holomorphic_laplacian(br) * (1.0 / (2 * k)) + _pi1_pairing(f, g, space.twist) * (1.0 / k)
    else:
        h = br
    return op_norm(lhs - assemble(h, space).matrix)


@dataclass(frozen=True)
class TraceReport:
    ks: tuple
    traces: tuple
    leading: tuple
    subleading: tuple
    residuals: tuple
    fit: ConvergenceFit

    def rows(self):
        return list(zip(self.ks, self.traces, self.leading, self.subleading, self.residuals))


def trace_check(f: Observable, ks: Sequence[int], twist: Twist, scheme: Scheme = "gq",
                extra_degree: int = 8) -> TraceReport:
    """Compare ``Tr`` of the quantization of ``f`` with ``(k/2pi) int f0 (omega + omega_1/k) + (1/2pi) int f1 omega``."""
    sym = normalized_symbol(f, scheme)
    c1 = omega1_scalar(twist)
    tr, lead, sub, res = [], [], [], []
    for k in ks:
        space = quantum_space(k, twist, extra_degree=extra_degree)
        op = quantize(f, space, scheme)
        q = space.quad
        I0 = float(q.integrate(sym.f0(q.z)).real)
        I1 = float(q.integrate(sym.f1(q.z)).real)
        t = float(np.trace(op.matrix).real)
        a = k * I0 / (2 * np.pi)
        b = (c1 * I0 + I1) / (2 * np.pi)
        tr.append(t)
        lead.append(a)
        sub.append(b)
        res.append(abs(t - a - b))
    return TraceReport(tuple(ks), tuple(tr), tuple(lead), tuple(sub), tuple(res), fit_loglog(ks, res))


def _as_derivatives(g) -> list[Callable]:
    if isinstance(g, Polynomial):
        return [g.deriv(n) for n in range(6)]
    derivs = list(g)
    if len(derivs) < 4:
        raise ValueError("supply g, g', g'', g''' (or a Polynomial)")
    return derivs


@dataclass(frozen=True)
class FunctionalCalculusReport:
    ks: tuple
    defects: tuple
    fit: ConvergenceFit
    with_correction: bool


def functional_calculus_check(g, f: Observable, ks: Sequence[int], twist: Twist,
                              scheme: Scheme = "gq", with_correction: bool = True,
                              extra_degree: int = 12) -> FunctionalCalculusReport:
    """``||g(A) - Q(g(f0) + k^-1 g'(f0) f1)||`` for ``A = quantize(f, scheme)``.

    ``g`` is a ``Polynomial`` or a sequence ``(g, g', g'', g''')`` of vectorized
    callables.  ``g(A)`` is formed through the eigendecomposition of ``A``.
    """
    derivs = _as_derivatives(g)
    sym = normalized_symbol(f, scheme)
    g_f0 = compose(derivs, sym.f0, "g(f0)")
    dg_f0 = compose(derivs[1:], sym.f0, "g'(f0)")
    defects = []
    for k in ks:
        space = quantum_space(k, twist, extra_degree=extra_degree)
        A = quantize(f, space, scheme).matrix
        w, V = np.linalg.eigh(A)
        gA = (V * derivs[0](w)) @ V.conj().T
        target = SymbolSeries(g_f0, dg_f0 * sym.f1 if with_correction else constant(0.0))
        defects.append(op_norm(gA - quantize_series(target, space).matrix))
    return FunctionalCalculusReport(tuple(ks), tuple(defects), fit_loglog(ks, defects), with_correction)
