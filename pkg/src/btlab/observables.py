"""Smooth functions on the chart with exact low-order derivatives.

Observables are evaluated as truncated Taylor jets in ``(dz, dzbar)`` so the
holomorphic Laplacian and Poisson brackets of built-in functions are exact
to rounding, which the exact-spectrum checks rely on.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from . import conventions

__all__ = [
    "Jet",
    "Observable",
    "x1",
    "x2",
    "x3",
    "constant",
    "from_callable",
    "holomorphic_laplacian",
    "poisson_bracket",
    "hamiltonian_field",
    "compose",
]


class Jet:
    """Truncated Taylor expansion ``sum c[a, b] dz^a dzbar^b`` with ``a + b <= order``.

    ``coef`` has shape ``(order + 1, order + 1) + point_shape``; entries with
    ``a + b > order`` are kept at zero.
    """

    __slots__ = ("coef", "order")

    def __init__(self, coef: np.ndarray, order: int):
        self.coef = coef
        self.order = order

    @classmethod
    def constant(cls, value, order: int, shape=None) -> "Jet":
        value = np.asarray(value, dtype=complex)
        if shape is not None:
            value = np.broadcast_to(value, shape)
        coef = np.zeros((order + 1, order + 1) + value.shape, dtype=complex)
        coef[0, 0] = value
        return cls(coef, order)

    @classmethod
    def variable(cls, z0: np.ndarray, order: int, conjugate: bool = False) -> "Jet":
        z0 = np.asarray(z0, dtype=complex)
        coef = np.zeros((order + 1, order + 1) + z0.shape, dtype=complex)
        coef[0, 0] = np.conj(z0) if conjugate else z0
        if order >= 1:
            if conjugate:
                coef[0, 1] = 1.0
            else:
                coef[1, 0] = 1.0
        return cls(coef, order)

    @property
    def value(self) -> np.ndarray:
        return self.coef[0, 0]

    def deriv(self, a: int, b: int) -> np.ndarray:
        """``d^a/dz^a d^b/dzbar^b`` at the base point."""
        if a + b > self.order:
            raise ValueError(f"jet of order {self.order} has no derivative ({a}, {b})")
        return self.coef[a, b] * _fact(a) * _fact(b)

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return _const_like(self, other)

    def truncate(self, order: int) -> "Jet":
        if order >= self.order:
            return self
        coef = self.coef[: order + 1, : order + 1].copy()
        _zero_above(coef, order)
        return Jet(coef, order)

    def __add__(self, other):
        other = self._coerce(other)
        p = min(self.order, other.order)
        a, b = self.truncate(p), other.truncate(p)
        return Jet(a.coef + b.coef, p)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coef, self.order)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet) and np.ndim(other) == 0:
            return Jet(self.coef * other, self.order)
        other = self._coerce(other)
        p = min(self.order, other.order)
        out = np.zeros((p + 1, p + 1) + np.broadcast_shapes(self.coef.shape[2:], other.coef.shape[2:]), dtype=complex)
        for a1 in range(p + 1):
            for b1 in range(p + 1 - a1):
                c1 = self.coef[a1, b1]
                for a2 in range(p + 1 - a1 - b1):
                    for b2 in range(p + 1 - a1 - b1 - a2):
                        out[a1 + a2, b1 + b2] += c1 * other.coef[a2, b2]
        return Jet(out, p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet) and np.ndim(other) == 0:
            return Jet(self.coef / other, self.order)
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.reciprocal() ** (-n)
        out = Jet.constant(1.0, self.order, self.coef.shape[2:])
        for _ in range(n):
            out = out * self
        return out

    def series(self, taylor: Sequence[np.ndarray]) -> "Jet":
        """Compose with a scalar function given its derivatives at the base value."""
        u = Jet(self.coef.copy(), self.order)
        u.coef[0, 0] = 0.0
        out = Jet.constant(0.0, self.order, self.coef.shape[2:])
        out.coef[0, 0] = taylor[0]
        power = Jet.constant(1.0, self.order, self.coef.shape[2:])
        for n in range(1, self.order + 1):
            power = power * u
            out = out + power * (taylor[n] / _fact(n))
        return out

    def reciprocal(self) -> "Jet":
        a0 = self.coef[0, 0]
        taylor = [(-1) ** n * _fact(n) / a0 ** (n + 1) for n in range(self.order + 1)]
        return self.series(taylor)

    def log(self) -> "Jet":
        a0 = self.coef[0, 0]
        taylor = [np.log(a0)] + [(-1) ** (n + 1) * _fact(n - 1) / a0**n for n in range(1, self.order + 1)]
        return self.series(taylor)

    def conj(self) -> "Jet":
        """Jet of the complex conjugate function (swaps dz and dzbar)."""
        return Jet(np.conj(np.swapaxes(self.coef, 0, 1)), self.order)

    def d_z(self) -> "Jet":
        p = self.order - 1
        if p < 0:
            raise ValueError("cannot differentiate an order-0 jet")
        coef = np.zeros((p + 1, p + 1) + self.coef.shape[2:], dtype=complex)
        for a in range(p + 1):
            for b in range(p + 1 - a):
                coef[a, b] = (a + 1) * self.coef[a + 1, b]
        return Jet(coef, p)

    def d_zbar(self) -> "Jet":
        p = self.order - 1
        if p < 0:
            raise ValueError("cannot differentiate an order-0 jet")
        coef = np.zeros((p + 1, p + 1) + self.coef.shape[2:], dtype=complex)
        for a in range(p + 1):
            for b in range(p + 1 - a):
                coef[a, b] = (b + 1) * self.coef[a, b + 1]
        return Jet(coef, p)


def _fact(n: int) -> float:
    return float(np.prod(np.arange(1, n + 1))) if n > 1 else 1.0


def _zero_above(coef: np.ndarray, order: int) -> None:
    for a in range(coef.shape[0]):
        for b in range(coef.shape[1]):
            if a + b > order:
                coef[a, b] = 0.0


def _const_like(jet: Jet, value) -> Jet:
    value = np.asarray(value, dtype=complex)
    coef = np.zeros(jet.coef.shape[:2] + np.broadcast_shapes(jet.coef.shape[2:], value.shape), dtype=complex)
    coef[0, 0] = value
    return Jet(coef, jet.order)


def _chart_coordinates(z: np.ndarray, order: int):
    zj = Jet.variable(z, order)
    zbj = Jet.variable(z, order, conjugate=True)
    inv = (zj * zbj + 1.0).reciprocal()
    return zj, zbj, inv


def inverse_metric_jet(z: np.ndarray, order: int) -> Jet:
    """``(1 + |z|^2)^2``, the inverse of the form density."""
    zj, zbj, _ = _chart_coordinates(z, order)
    return (zj * zbj + 1.0) ** 2


class Observable:
    """A function on the chart, evaluated through Taylor jets.

    Parameters
    ----------
    jet : callable ``(z, order) -> Jet``
    name : str
        Used in reports and tags.
    degree : int or None
        Polynomial degree in the ambient coordinates ``x1, x2, x3`` when known;
        quadrature exactness checks use it.
    real : bool
        Whether the function is real-valued.
    """

    def __init__(self, jet: Callable[[np.ndarray, int], Jet], name: str = "f",
                 degree: int | None = None, real: bool = True):
        self._jet = jet
        self.name = name
        self.degree = degree
        self.real = real

    def jet(self, z, order: int = 2) -> Jet:
        return self._jet(np.asarray(z, dtype=complex), order)

    def __call__(self, z):
        v = self.jet(z, 0).value
        return v.real if self.real else v

    def __repr__(self):
        return f"Observable({self.name})"

    # arithmetic -------------------------------------------------------
    def _binary(self, other, op, sym):
        if isinstance(other, Observable):
            deg = None if self.degree is None or other.degree is None else (
                self.degree + other.degree if sym == "*" else max(self.degree, other.degree))
            return Observable(lambda z, p: op(self.jet(z, p), other.jet(z, p)),
                              f"({self.name}{sym}{other.name})", deg, self.real and other.real)
        c = other
        real = self.real and np.isrealobj(c)
        return Observable(lambda z, p: op(self.jet(z, p), c), f"({self.name}{sym}{c!r})",
                          self.degree, real)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b, "+")

    def __radd__(self, other):
        return self + other

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b, "-")

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Observable(lambda z, p: -self.jet(z, p), f"-{self.name}", self.degree, self.real)

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b, "*")

    def __rmul__(self, other):
        return self * other

    def __truediv__(self, c):
        if isinstance(c, Observable):
            raise TypeError("division by an observable is not supported")
        return self * (1.0 / c)

    def __pow__(self, n: int):
        out = constant(1.0)
        for _ in range(n):
            out = out * self
        out.name = f"{self.name}^{n}"
        return out


def constant(c: float) -> Observable:
    def jet(z, p):
        return Jet.constant(np.broadcast_to(np.asarray(c, dtype=complex), np.shape(z)).copy(), p)

    return Observable(jet, repr(c), 0, np.isrealobj(c))


def _x3_jet(z, p):
    _, _, inv = _chart_coordinates(z, p)
    return inv * 2.0 - 1.0


def _w_jet(z, p):
    zj, _, inv = _chart_coordinates(z, p)
    return zj * inv * 2.0


def _x1_jet(z, p):
    w = _w_jet(z, p)
    return (w + w.conj()) * 0.5


def _x2_jet(z, p):
    w = _w_jet(z, p)
    return (w - w.conj()) * (-0.5j)


x1 = Observable(_x1_jet, "x1", 1)
x2 = Observable(_x2_jet, "x2", 1)
x3 = Observable(_x3_jet, "x3", 1)


def from_callable(fn: Callable, name: str = "f", real: bool = True) -> Observable:
    """Wrap a plain ``fn(z)``; only order-0 jets are available."""

    def jet(z, p):
        if p > 0:
            raise ValueError(f"observable {name} has no derivative information")
        return Jet.constant(np.asarray(fn(z), dtype=complex), 0)

    return Observable(jet, name, None, real)


def holomorphic_laplacian(f: Observable) -> Observable:
    """``Delta f = (1 + |z|^2)^2 d^2 f / dz dzbar``."""

    def jet(z, p):
        fj = f.jet(z, p + 2)
        return inverse_metric_jet(z, p) * fj.d_z().d_zbar().truncate(p)

    deg = f.degree
    return Observable(jet, f"Lap({f.name})", deg, f.real)


def poisson_bracket(f: Observable, g: Observable) -> Observable:
    """``{f, g} = X_f g`` with ``i_{X_f} omega = -df`` (times ``POISSON_SIGN``)."""
    sign = conventions.POISSON_SIGN * conventions.HAMILTONIAN_SIGN

    def jet(z, p):
        fj, gj = f.jet(z, p + 1), g.jet(z, p + 1)
        core = fj.d_zbar() * gj.d_z() - fj.d_z() * gj.d_zbar()
        return inverse_metric_jet(z, p) * core.truncate(p) * (1j * sign)

    deg = None if f.degree is None or g.degree is None else f.degree + g.degree
    return Observable(jet, f"{{{f.name},{g.name}}}", deg, f.real and g.real)


def hamiltonian_field(f: Observable, z) -> np.ndarray:
    """Chart component ``X^z`` of the Hamiltonian vector field of ``f``."""
    z = np.asarray(z, dtype=complex)
    fj = f.jet(z, 1)
    return conventions.HAMILTONIAN_SIGN * 1j * (1.0 + np.abs(z) ** 2) ** 2 * fj.deriv(0, 1)


def compose(g, f: Observable, name: str | None = None) -> Observable:
    """``g o f`` for a scalar ``g``.

    ``g`` is a ``numpy.polynomial.Polynomial`` or a sequence of callables
    ``(g, g', g'', ...)``; derivatives beyond those supplied are unavailable.
    """
    if isinstance(g, Polynomial):
        derivs = [g.deriv(n) for n in range(8)]
        deg = None if f.degree is None else f.degree * g.degree()
    else:
        derivs = list(g)
        deg = None

    def jet(z, p):
        if p + 1 > len(derivs):
            raise ValueError("not enough derivatives supplied for composition")
        fj = f.jet(z, p)
        v = fj.value.real if f.real else fj.value
        return fj.series([np.asarray(d(v), dtype=complex) for d in derivs[: p + 1]])

    return Observable(jet, name or f"g({f.name})", deg, f.real)
