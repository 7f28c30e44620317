"""Flat ambient space E^{n+2}, the model spaces Q^n_c and the product exponential map.

Points of Q^n_c x R are stored as (n+2)-vectors.  The first n+1 slots hold the
Q^n_c factor (``c*x1^2 + x2^2 + ... + x_{n+1}^2 = c``) and the last slot is the
height, so the vertical unit field is the constant vector e_{n+2}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConstraintError, PreconditionError, UsageError

EPS_MODEL = 1e-9


def check_c(c: int) -> int:
    if c not in (1, -1):
        raise UsageError(f"model constant must be +1 or -1, got {c!r}")
    return int(c)


def metric_diag(dim: int, c: int) -> np.ndarray:
    """Diagonal of the flat metric ``c dx1^2 + dx2^2 + ... + dx_dim^2``."""
    d = np.ones(dim)
    d[0] = check_c(c)
    return d


def inner(u, v, c: int) -> float:
    """Flat inner product with the first coordinate weighted by ``c``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1:
        raise UsageError(f"dimension mismatch: {u.shape} vs {v.shape}")
    check_c(c)
    # products commute exactly in IEEE arithmetic, so this is bit-symmetric
    return float(c * (u[0] * v[0]) + np.sum(u[1:] * v[1:]))


def cs_kernels(s: float, c: int) -> tuple[float, float]:
    """Return ``(C_c(s), S_c(s))``: (cos, sin) for c=1 and (cosh, sinh) for c=-1."""
    if check_c(c) == 1:
        return math.cos(s), math.sin(s)
    return math.cosh(s), math.sinh(s)


def model_residual(x, c: int) -> float:
    """``c*x1^2 + x2^2 + ... + x_{n+1}^2 - c`` for a full (n+2)-vector ``x``."""
    x = np.asarray(x, dtype=float)
    return float(c * x[0] ** 2 + np.sum(x[1:-1] ** 2) - c)


def model_scale(x) -> float:
    """Magnitude against which :func:`model_residual` should be judged."""
    x = np.asarray(x, dtype=float)
    return max(1.0, float(np.sum(x[:-1] ** 2)))


@dataclass(frozen=True)
class ProductPoint:
    """A point of Q^n_c x R; ``coords[-1]`` is the height."""

    coords: np.ndarray
    c: int
    eps: float = EPS_MODEL

    def __post_init__(self):
        coords = np.array(self.coords, dtype=float)
        object.__setattr__(self, "coords", coords)
        check_c(self.c)
        if coords.ndim != 1 or coords.size < 4:
            raise UsageError("a product point needs n+2 >= 4 coordinates")
        res = model_residual(coords, self.c)
        if abs(res) > self.eps * model_scale(coords):
            raise ConstraintError(f"point off the model space (residual {res:.3e})")
        if self.c == -1 and coords[0] <= 0:
            raise ConstraintError("hyperbolic points need x1 > 0")

    @classmethod
    def from_parts(cls, q, t: float, c: int) -> "ProductPoint":
        return cls(np.append(np.asarray(q, dtype=float), float(t)), c)

    @property
    def n(self) -> int:
        return self.coords.size - 2

    @property
    def q(self) -> np.ndarray:
        return self.coords[:-1]

    @property
    def t(self) -> float:
        return float(self.coords[-1])


def exp_map(p: ProductPoint, v, t: float, tol: float = 1e-9) -> ProductPoint:
    """Geodesic of Q^n_c x R from ``p`` with initial velocity ``v``, evaluated at ``t``.

    ``v`` is an (n+2)-vector whose first n+1 slots must be tangent to Q^n_c at
    ``p`` (orthogonal to the position vector) and whose last slot is the
    vertical speed.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != p.coords.shape:
        raise UsageError(f"dimension mismatch: {v.shape} vs {p.coords.shape}")
    c = p.c
    x = p.q
    v1 = v[:-1]
    v2 = float(v[-1])
    dot = c * x[0] * v1[0] + float(np.sum(x[1:] * v1[1:]))
    if abs(dot) > tol * max(1.0, float(np.linalg.norm(v1))):
        raise PreconditionError(f"velocity is not tangent to the model (<v1,x> = {dot:.3e})")
    n1sq = c * v1[0] ** 2 + float(np.sum(v1[1:] ** 2))
    height = p.t + t * v2
    if n1sq <= 0.0:
        return ProductPoint.from_parts(x, height, c)
    speed = math.sqrt(n1sq)
    cc, ss = cs_kernels(speed * t, c)
    q = cc * x + ss * (v1 / speed)
    return ProductPoint.from_parts(q, height, c)
