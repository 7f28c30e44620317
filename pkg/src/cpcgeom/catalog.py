"""Constructed hypersurfaces with known invariants.

Every constructor returns a :class:`CatalogEntry`: a chart plus the
invariants the classification predicts.  Curvature values that follow from
the classification are stored exactly; other nonzero values are ``None``
("numeric") and only their constancy and multiplicity are checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import jets
from .chart import Chart
from .errors import ParameterError, UsageError
from .profile import ProfileFunction, affine_profile, cubic_profile

NU_ZERO = "zero"
NU_UNIT = "unit"
NU_CONSTANT = "constant"
NU_VARYING = "varying"


@dataclass(frozen=True)
class CatalogEntry:
    """A named hypersurface with its expected invariants.

    ``curvatures`` pairs each expected eigenvalue cluster (value or ``None``
    for numeric) with its multiplicity.  Exact values are compared up to a
    global sign when ``sign_free`` is set, since the orientation of the
    normal is a convention.
    """

    name: str
    chart: Chart
    c: int
    n: int
    g: int | None
    curvatures: tuple[tuple[float | None, int], ...] | None
    nu_behavior: str
    t_principal: bool | None
    sign_free: bool = True
    grid_counts: tuple[int, ...] = ()
    margin: float = 0.05
    notes: str = ""
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.curvatures is not None and sum(m for _, m in self.curvatures) != self.n:
            raise UsageError(f"{self.name}: multiplicities must sum to n={self.n}")

    @property
    def multiplicities(self) -> tuple[int, ...] | None:
        if self.curvatures is None:
            return None
        return tuple(sorted((m for _, m in self.curvatures), reverse=True))

    def grid(self, counts=None) -> np.ndarray:
        counts = counts or self.grid_counts or (3,) * self.n
        axes = [np.linspace(a + self.margin, b - self.margin, k) for (a, b), k in zip(self.chart.domain, counts)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


def _box(n: int, half: float) -> tuple[tuple[float, float], ...]:
    return tuple((-half, half) for _ in range(n))


def _check_cn(c: int, n: int):
    if c not in (1, -1):
        raise ParameterError(f"c must be +1 or -1, got {c}")
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")


def _sq(v) -> object:
    return sum((x * x for x in v), 0.0)


def _model_graph(v, c: int):
    """Point of Q^m_c as a graph over its last m coordinates."""
    return [jets.sqrt(1.0 - c * _sq(v)), *v]


def _unit_sphere(v):
    return [jets.sqrt(1.0 - _sq(v)), *v]


def _hyperboloid(v, rho: float = 1.0):
    """Upper sheet of -x0^2 + |v|^2 = -rho^2."""
    return [jets.sqrt(rho * rho + _sq(v)), *v]


def _kernels(s, c: int):
    if c == 1:
        return jets.cos(s), jets.sin(s)
    return jets.cosh(s), jets.sinh(s)


def slice_entry(c: int, n: int, t0: float = 0.0) -> CatalogEntry:
    """Q^n_c x {t0}."""
    _check_cn(c, n)

    def func(u):
        return [*_model_graph(u, c), float(t0)]

    chart = Chart(func, n, c, _box(n, 0.4), (0.0,) * n, name=f"slice(c={c},n={n})")
    return CatalogEntry(
        chart.name, chart, c, n, 1, ((0.0, n),), NU_UNIT, None, grid_counts=(3,) * n, notes="totally geodesic"
    )


# bases of cylinders: maps v in R^{n-1} to a point of Q^n_c (n+1 coordinates)


def _base_geodesic_sphere(c: int, n: int, r: float):
    if c == 1 and not 0 < r < math.pi / 2:
        raise ParameterError("geodesic sphere radius must lie in (0, pi/2)")
    if r <= 0:
        raise ParameterError("radius must be positive")
    C, S = (math.cos(r), math.sin(r)) if c == 1 else (math.cosh(r), math.sinh(r))

    def base(v):
        w = _unit_sphere(v)
        return [C, *[S * x for x in w]]

    return base


def _base_horosphere(c: int, n: int):
    if c != -1:
        raise ParameterError("horospheres exist only in hyperbolic space")

    def base(v):
        q = 0.5 * _sq(v)
        return [1.0 + q, *v, q]

    return base


def _base_equidistant(c: int, n: int, d: float):
    if c != -1:
        raise ParameterError("equidistant hypersurfaces are taken in hyperbolic space")
    ch, sh = math.cosh(d), math.sinh(d)

    def base(v):
        y = _hyperboloid(v)
        return [ch * x for x in y] + [sh]

    return base


def _base_totally_geodesic(c: int, n: int):
    def base(v):
        return [*_model_graph(v, c), 0.0]

    return base


_CYLINDER_BASES = ("sphere", "horosphere", "equidistant", "totally_geodesic")


def cylinder(c: int, n: int, base: str = "sphere", radius: float = math.pi / 4, distance: float = 0.5) -> CatalogEntry:
    """M^{n-1} x R for an umbilical hypersurface M^{n-1} of Q^n_c."""
    _check_cn(c, n)
    if base == "sphere":
        fb = _base_geodesic_sphere(c, n, radius)
        curv = ((None, n - 1), (0.0, 1))
        tag = f"r={radius:g}"
    elif base == "horosphere":
        fb = _base_horosphere(c, n)
        curv = ((1.0, n - 1), (0.0, 1))
        tag = ""
    elif base == "equidistant":
        fb = _base_equidistant(c, n, distance)
        curv = ((None, n - 1), (0.0, 1))
        tag = f"d={distance:g}"
    elif base == "totally_geodesic":
        fb = _base_totally_geodesic(c, n)
        curv = ((0.0, n),)
        tag = ""
    else:
        raise ParameterError(f"unknown cylinder base {base!r}; choose from {_CYLINDER_BASES}")

    def func(u):
        return [*fb(u[:-1]), u[-1]]

    label = f"cylinder_{base}(c={c},n={n}{',' + tag if tag else ''})"
    chart = Chart(func, n, c, _box(n, 0.4), (0.0,) * n, name=label)
    g = len(curv)
    return CatalogEntry(label, chart, c, n, g, curv, NU_ZERO, True, grid_counts=(3,) * n)


def clifford_product(p: int, q: int, r: float, s: float) -> CatalogEntry:
    """S^p(r) x S^q(s) x R inside S^{p+q+1} x R, r^2 + s^2 = 1."""
    if p < 1 or q < 1:
        raise ParameterError("factor dimensions must be >= 1")
    if not (0 < r < 1 and 0 < s < 1) or abs(r * r + s * s - 1) > 1e-12:
        raise ParameterError("radii must satisfy r^2 + s^2 = 1 with r, s in (0, 1)")
    n = p + q + 1

    def func(u):
        a = _unit_sphere(u[:p])
        b = _unit_sphere(u[p : p + q])
        return [*[r * x for x in a], *[s * x for x in b], u[-1]]

    label = f"clifford(p={p},q={q},r={r:g},s={s:g})"
    chart = Chart(func, n, 1, _box(n, 0.4), (0.0,) * n, name=label)
    curv = ((None, p), (None, q), (0.0, 1))
    return CatalogEntry(label, chart, 1, n, 3, curv, NU_ZERO, True, grid_counts=(3,) * n)


def hyperbolic_product(k: int, n: int, r: float = 1.0) -> CatalogEntry:
    """S^k(r) x H^{n-k-1}(rho) x R inside H^n x R with rho^2 = 1 + r^2.

    The sphere factor occupies x_2..x_{k+2}; the hyperbolic factor uses x_1
    and x_{k+3}..x_{n+1}.
    """
    if not 1 <= k <= n - 2:
        raise ParameterError(f"need 1 <= k <= n-2, got k={k}, n={n}")
    if r <= 0:
        raise ParameterError("sphere radius must be positive")
    m = n - k - 1
    rho = math.sqrt(1 + r * r)

    def func(u):
        a = _unit_sphere(u[:k])
        h = _hyperboloid(u[k : k + m], rho)
        return [h[0], *[r * x for x in a], *h[1:], u[-1]]

    label = f"hyperbolic_product(k={k},n={n},r={r:g})"
    chart = Chart(func, n, -1, _box(n, 0.4), (0.0,) * n, name=label)
    curv = ((None, k), (None, m), (0.0, 1))
    return CatalogEntry(
        label, chart, -1, n, 3, curv, NU_ZERO, True, grid_counts=(3,) * n, extra={"r": r, "rho": rho}
    )


def horosphere_family(v, s):
    """Parallel family of horospheres h_s(v) = e^s x(v) - sinh(s) w in H^n.

    x(v) = (1 + |v|^2/2) e_1 + v + (|v|^2/2) e_{n+1} lies on <x, w> = -1 with
    w = e_1 + e_{n+1} lightlike; x - w is its unit normal.
    """
    q = 0.5 * _sq(v)
    es = jets.exp(s)
    sh = jets.sinh(s)
    x = [1.0 + q, *v, q]
    w_first, w_last = 1.0, 1.0
    out = [es * xi for xi in x]
    out[0] = out[0] - sh * w_first
    out[-1] = out[-1] - sh * w_last
    return out


def rotational_chart(profile: ProfileFunction, n: int, v_half: float = 0.4, name: str | None = None) -> Chart:
    """h_s(v) + a(s) d/dt over the horosphere family, u = (v_1..v_{n-1}, s)."""
    if n < 2:
        raise ParameterError("n must be >= 2")
    lo, hi = profile.domain
    mid = 0.5 * (lo + hi)
    half = min(0.5, 0.5 * (hi - lo) * 0.9)
    s_dom = (mid - half, mid + half)

    def func(u):
        return [*horosphere_family(u[:-1], u[-1]), profile(u[-1])]

    domain = (*_box(n - 1, v_half), s_dom)
    return Chart(func, n, -1, domain, (0.0,) * (n - 1) + (mid,), name=name or f"rotational[{profile.kind}](n={n})")


def rotational_horosphere(B: float, n: int) -> CatalogEntry:
    if not B > 0:
        raise ParameterError(f"B must be positive, got {B}")
    if n < 2:
        raise ParameterError("n must be >= 2")
    k = B / math.sqrt(1 + B * B)
    chart = rotational_chart(affine_profile(B), n, name=f"rotational_horosphere(B={B:g},n={n})")
    return CatalogEntry(
        chart.name,
        chart,
        -1,
        n,
        2,
        ((k, n - 1), (0.0, 1)),
        NU_CONSTANT,
        True,
        grid_counts=(3,) * n,
        extra={"B": B, "tnorm": k, "nu": 1 / math.sqrt(1 + B * B)},
    )


def rotational_cubic(n: int = 2, k: float = 0.2) -> CatalogEntry:
    """Rotational chart with profile s + k s^3: T principal, nu not constant."""
    chart = rotational_chart(cubic_profile(k), n, name=f"rotational_cubic(k={k:g},n={n})")
    return CatalogEntry(chart.name, chart, -1, n, None, None, NU_VARYING, True, grid_counts=(3,) * n)


def generic_graphs() -> list[Chart]:
    """Non-special hypersurfaces: graphs of assorted height functions."""

    def make(c, n, height, name):
        def func(u):
            return [*_model_graph(u[:n], c), height(u)]

        return Chart(func, n, c, _box(n, 0.4), (0.0,) * n, name=name)

    return [
        make(1, 2, lambda u: 0.3 * u[0] * u[0] + jets.sin(u[1]) * u[0] + 0.2 * u[1], "graph_a(c=1,n=2)"),
        make(-1, 3, lambda u: jets.exp(0.5 * u[0]) * u[1] + 0.4 * u[2] * u[2] - 0.1 * u[0], "graph_b(c=-1,n=3)"),
        make(1, 3, lambda u: jets.cosh(u[0] + 0.3 * u[2]) + 0.5 * u[1] * u[2] + 0.25 * u[1], "graph_c(c=1,n=3)"),
    ]


def sheared_chart(chart: Chart, shear: float = 0.25) -> Chart:
    """The same hypersurface in coordinates u = M w, M unit lower triangular.

    Product charts have coordinate-aligned eigenspaces; shearing mixes them
    so that frames built in a Cholesky-orthonormal basis genuinely vary.  (An
    upper triangular M would be absorbed by the Cholesky factor.)
    """
    n = chart.n
    M = np.eye(n) + shear * np.tril(np.ones((n, n)), -1)
    center = np.asarray(chart.base_point)
    half = min(0.5 * (b - a) for a, b in chart.domain) / (1 + shear * (n - 1)) * 0.95
    # keep M w + offset inside the original box for |w_i| <= half
    domain = tuple((-half, half) for _ in range(n))
    return chart.reparametrize(M, center, domain, base_point=np.zeros(n), name=f"{chart.name}~sheared")


def default_catalog() -> list[CatalogEntry]:
    """The entries exercised by the acceptance suite."""
    entries = [
        slice_entry(1, 2),
        slice_entry(-1, 3),
        cylinder(1, 3, "sphere", radius=math.pi / 4),
        cylinder(1, 2, "sphere", radius=0.6),
        cylinder(-1, 3, "horosphere"),
        cylinder(-1, 2, "horosphere"),
        cylinder(-1, 2, "equidistant", distance=0.5),
        cylinder(-1, 2, "sphere", radius=0.8),
        cylinder(-1, 3, "totally_geodesic"),
        cylinder(1, 3, "totally_geodesic"),
        clifford_product(1, 1, 1 / math.sqrt(2), 1 / math.sqrt(2)),
        clifford_product(2, 1, 0.8, 0.6),
        hyperbolic_product(1, 4, 1.0),
    ]
    for B in (0.5, 1.0, 2.0):
        for n in (2, 4, 5):
            entries.append(rotational_horosphere(B, n))
    return entries


_BUILDERS: dict[str, Callable[..., CatalogEntry]] = {
    "slice": slice_entry,
    "cylinder": cylinder,
    "clifford_product": clifford_product,
    "hyperbolic_product": hyperbolic_product,
    "rotational_horosphere": rotational_horosphere,
    "rotational_cubic": rotational_cubic,
}


def by_name(name: str) -> CatalogEntry:
    """Look up an entry of :func:`default_catalog` (or the cubic chart) by name."""
    for entry in default_catalog() + [rotational_cubic()]:
        if entry.name == name:
            return entry
    raise UsageError(f"unknown catalog entry {name!r}")


def build(kind: str, **params) -> CatalogEntry:
    """Construct an entry from a builder name and keyword parameters."""
    try:
        fn = _BUILDERS[kind]
    except KeyError:
        raise UsageError(f"unknown builder {kind!r}; choose from {sorted(_BUILDERS)}") from None
    try:
        return fn(**params)
    except TypeError as exc:
        raise UsageError(f"bad parameters for {kind}: {exc}") from None
