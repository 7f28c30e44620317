"""Parametrized hypersurfaces of Q^n_c x R."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import jets
from .ambient import check_c
from .errors import BoundaryError, DomainError, UsageError


@dataclass(frozen=True, eq=False)
class Chart:
    """A local parametrization ``u -> f(u)`` of a hypersurface, u in a box.

    ``func`` receives a sequence of n scalar carriers (floats or
    :class:`~cpcgeom.jets.Jet`) and returns the n+2 ambient coordinates, the
    last one being the height.  It must only use the elementary functions of
    :mod:`cpcgeom.jets` so that jets flow through it.

    When ``fd_step`` is set the chart is only evaluated pointwise and its jets
    come from finite differences with that step.

    ``normal_reference`` optionally fixes the orientation of the unit normal:
    the normal is chosen to have a positive inner product with the reference
    at the base point.
    """

    func: Callable[[Sequence], Sequence]
    n: int
    c: int
    domain: tuple[tuple[float, float], ...]
    base_point: tuple[float, ...]
    name: str = "chart"
    normal_reference: Callable[[np.ndarray], np.ndarray] | None = None
    fd_step: float | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        check_c(self.c)
        if self.n < 2:
            raise UsageError("hypersurfaces need n >= 2")
        dom = tuple((float(a), float(b)) for a, b in self.domain)
        if len(dom) != self.n or any(a >= b for a, b in dom):
            raise UsageError(f"domain must be n={self.n} increasing intervals, got {self.domain}")
        object.__setattr__(self, "domain", dom)
        base = tuple(float(x) for x in self.base_point)
        object.__setattr__(self, "base_point", base)
        if not self.contains(base):
            raise UsageError(f"base point {base} outside the domain of {self.name}")

    def contains(self, u, margin: float = 0.0) -> bool:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.n,):
            return False
        return all(a + margin <= x <= b - margin for x, (a, b) in zip(u, self.domain))

    def _check(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.n,):
            raise UsageError(f"{self.name}: expected {self.n} parameters, got shape {u.shape}")
        if not self.contains(u):
            raise DomainError(f"{self.name}: parameter {tuple(map(float, u))} outside domain {self.domain}")
        return u

    def point(self, u) -> np.ndarray:
        u = self._check(u)
        return np.array([float(x) for x in self.func(list(u))])

    def jet2(self, u) -> jets.Jet2:
        u = self._check(u)
        if self.fd_step is None:
            return jets.jet2_from_function(self.func, u)
        h = self.fd_step
        if not self.contains(u, margin=2 * h):
            raise BoundaryError(f"{self.name}: difference stencil at {tuple(map(float, u))} leaves the domain")
        return jets.fd_jet2(self.point, u, h)

    def reparametrize(self, matrix, offset, domain, base_point=None, name: str | None = None) -> "Chart":
        """Compose with the affine map ``u -> matrix @ u + offset``."""
        M = np.asarray(matrix, dtype=float)
        b = np.asarray(offset, dtype=float)
        if M.shape != (self.n, self.n) or b.shape != (self.n,):
            raise UsageError("affine reparametrization must be n x n plus an n-vector")
        inner_func = self.func

        def func(u):
            w = [sum((M[i, j] * u[j] for j in range(self.n)), float(b[i])) for i in range(self.n)]
            return inner_func(w)

        if base_point is None:
            base_point = np.linalg.solve(M, np.asarray(self.base_point) - b)
        return Chart(
            func,
            self.n,
            self.c,
            tuple(domain),
            tuple(base_point),
            name=name or f"{self.name}∘affine",
            normal_reference=None,
            fd_step=self.fd_step,
        )


def evaluate_jet2(chart: Chart, u) -> jets.Jet2:
    """Order-2 jet of ``chart`` at ``u`` (domain-checked)."""
    return chart.jet2(u)
