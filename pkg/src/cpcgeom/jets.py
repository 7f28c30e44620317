"""Order-2 forward differentiation.

A :class:`Jet` carries a value together with its gradient and Hessian with
respect to n parameters.  Arithmetic is truncated second-order Taylor
arithmetic, so any chart written with the elementary functions below
(``sqrt, sin, cos, tan, sinh, cosh, exp, log`` and the usual operators) gets
first and second derivatives exact to rounding.

Hessians stay bit-symmetric by construction: every update is a sum of terms
that are individually symmetric, evaluated in the same order for (i, j) and
(j, i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


class Jet:
    __slots__ = ("v", "g", "h")
    __array_ufunc__ = None  # make numpy scalars defer to the reflected operators

    def __init__(self, v: float, g: np.ndarray, h: np.ndarray):
        self.v = float(v)
        self.g = g
        self.h = h

    @classmethod
    def variable(cls, value: float, index: int, n: int) -> "Jet":
        g = np.zeros(n)
        g[index] = 1.0
        return cls(value, g, np.zeros((n, n)))

    @classmethod
    def constant(cls, value: float, n: int) -> "Jet":
        return cls(value, np.zeros(n), np.zeros((n, n)))

    def _chain(self, f0: float, f1: float, f2: float) -> "Jet":
        g = self.g
        return Jet(f0, f1 * g, f1 * self.h + f2 * np.outer(g, g))

    def __neg__(self):
        return Jet(-self.v, -self.g, -self.h)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.v + other.v, self.g + other.g, self.h + other.h)
        return Jet(self.v + float(other), self.g, self.h)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Jet):
            return Jet(self.v - other.v, self.g - other.g, self.h - other.h)
        return Jet(self.v - float(other), self.g, self.h)

    def __rsub__(self, other):
        return Jet(float(other) - self.v, -self.g, -self.h)

    def __mul__(self, other):
        if isinstance(other, Jet):
            a, b = self, other
            cross = np.outer(a.g, b.g)
            return Jet(
                a.v * b.v,
                a.v * b.g + b.v * a.g,
                a.v * b.h + b.v * a.h + (cross + cross.T),
            )
        k = float(other)
        return Jet(self.v * k, k * self.g, k * self.h)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        x = self.v
        if x == 0.0:
            raise ZeroDivisionError("jet reciprocal of zero")
        return self._chain(1.0 / x, -1.0 / x**2, 2.0 / x**3)

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / float(other))

    def __rtruediv__(self, other):
        return float(other) * self.reciprocal()

    def __pow__(self, p):
        if isinstance(p, Jet):
            return exp(p * log(self))
        p = float(p)
        if p == 0.0:
            return Jet.constant(1.0, self.g.size)
        if p == 1.0:
            return self
        if p == 2.0:
            return self * self
        x = self.v
        return self._chain(x**p, p * x ** (p - 1), p * (p - 1) * x ** (p - 2))

    def __repr__(self):
        return f"Jet({self.v!r}, g={self.g!r})"


def _unary(name: str, f0, f1, f2, npf):
    def fn(x):
        if isinstance(x, Jet):
            v = x.v
            return x._chain(f0(v), f1(v), f2(v))
        return npf(x)

    fn.__name__ = name
    return fn


sqrt = _unary(
    "sqrt",
    math.sqrt,
    lambda v: 0.5 / math.sqrt(v),
    lambda v: -0.25 / (v * math.sqrt(v)),
    np.sqrt,
)
sin = _unary("sin", math.sin, math.cos, lambda v: -math.sin(v), np.sin)
cos = _unary("cos", math.cos, lambda v: -math.sin(v), lambda v: -math.cos(v), np.cos)
tan = _unary(
    "tan",
    math.tan,
    lambda v: 1.0 / math.cos(v) ** 2,
    lambda v: 2.0 * math.tan(v) / math.cos(v) ** 2,
    np.tan,
)
sinh = _unary("sinh", math.sinh, math.cosh, math.sinh, np.sinh)
cosh = _unary("cosh", math.cosh, math.sinh, math.cosh, np.cosh)
exp = _unary("exp", math.exp, math.exp, math.exp, np.exp)
log = _unary("log", math.log, lambda v: 1.0 / v, lambda v: -1.0 / v**2, np.log)


@dataclass(frozen=True)
class Jet2:
    """Value and first/second parameter derivatives of a map R^n -> E^{n+2}.

    ``d1[i]`` is dF/du_i and ``d2[i, j]`` is d2F/du_i du_j.
    """

    value: np.ndarray
    d1: np.ndarray
    d2: np.ndarray

    @property
    def n(self) -> int:
        return self.d1.shape[0]


def jet2_from_function(func: Callable[[Sequence], Sequence], u) -> Jet2:
    """Evaluate ``func`` on jet variables seeded at ``u``."""
    u = np.asarray(u, dtype=float)
    n = u.size
    args = [Jet.variable(u[i], i, n) for i in range(n)]
    out = func(args)
    m = len(out)
    value = np.empty(m)
    d1 = np.zeros((n, m))
    d2 = np.zeros((n, n, m))
    for a, comp in enumerate(out):
        if isinstance(comp, Jet):
            value[a] = comp.v
            d1[:, a] = comp.g
            d2[:, :, a] = comp.h
        else:
            value[a] = float(comp)
    return Jet2(value, d1, d2)


# 4th-order central stencils
_D1_OFFSETS = (-2, -1, 1, 2)
_D1_WEIGHTS = (1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0)
_D2_OFFSETS = (-2, -1, 0, 1, 2)
_D2_WEIGHTS = (-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0)


def central_gradient(f: Callable[[np.ndarray], np.ndarray], u, h: float = 1e-3) -> np.ndarray:
    """4th-order central differences of an array-valued ``f`` along each axis.

    Returns an array with a leading axis of length n (one slice per parameter).
    """
    u = np.asarray(u, dtype=float)
    out = []
    for i in range(u.size):
        acc = None
        for off, w in zip(_D1_OFFSETS, _D1_WEIGHTS):
            du = np.zeros_like(u)
            du[i] = off * h
            term = w * np.asarray(f(u + du), dtype=float)
            acc = term if acc is None else acc + term
        out.append(acc / h)
    return np.stack(out)


def fd_jet2(point: Callable[[np.ndarray], np.ndarray], u, h: float = 1e-3) -> Jet2:
    """Jet2 of a pointwise map from 4th-order central finite differences.

    Used for maps (such as parallel hypersurfaces) whose construction already
    consumes the second jet of another chart.
    """
    u = np.asarray(u, dtype=float)
    n = u.size
    cache: dict[tuple[int, ...], np.ndarray] = {}

    def at(offsets: tuple[int, ...]) -> np.ndarray:
        if offsets not in cache:
            cache[offsets] = np.asarray(point(u + h * np.asarray(offsets, dtype=float)), dtype=float)
        return cache[offsets]

    def shift(i: int, a: int, j: int | None = None, b: int = 0) -> tuple[int, ...]:
        off = [0] * n
        off[i] += a
        if j is not None:
            off[j] += b
        return tuple(off)

    value = at(tuple([0] * n))
    m = value.size
    d1 = np.zeros((n, m))
    d2 = np.zeros((n, n, m))
    for i in range(n):
        d1[i] = sum(w * at(shift(i, a)) for a, w in zip(_D1_OFFSETS, _D1_WEIGHTS)) / h
        d2[i, i] = sum(w * at(shift(i, a)) for a, w in zip(_D2_OFFSETS, _D2_WEIGHTS)) / h**2
        for j in range(i + 1, n):
            acc = np.zeros(m)
            for a, wa in zip(_D1_OFFSETS, _D1_WEIGHTS):
                for b, wb in zip(_D1_OFFSETS, _D1_WEIGHTS):
                    acc += wa * wb * at(shift(i, a, j, b))
            d2[i, j] = acc / h**2
            d2[j, i] = d2[i, j]
    return Jet2(value, d1, d2)
