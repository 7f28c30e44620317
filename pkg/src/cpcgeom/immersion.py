"""First and second fundamental data of a hypersurface f: M^n -> Q^n_c x R.

Everything is expressed in chart coordinates.  Vectors tangent to M are
n-tuples of coordinate components; ambient vectors are (n+2)-arrays in
E^{n+2}.  The vertical field d/dt is e_{n+2} and splits as
``d/dt = df(T) + nu * eta``.

Derivatives of derived fields (A, T, nu, eta, Christoffel symbols) along M
are taken with 4th-order central differences of step ``h``; the fields
themselves come from exact second jets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .ambient import EPS_MODEL, metric_diag, model_residual, model_scale
from .chart import Chart
from .errors import (
    BoundaryError,
    ConstraintError,
    InapplicableError,
    RegularityError,
)
from .jets import Jet2, central_gradient

EPS_STRUCT = 1e-9
EPS_T = 1e-8
MAX_CONDITION = 1e8
FD_STEP = 1e-3


@dataclass(frozen=True, eq=False)
class ShapeData:
    """Induced metric, normals, shape operator and the pair (T, nu) at a point.

    ``A`` holds mixed components (``A[:, k]`` is A applied to d/du_k) and is
    G-self-adjoint; ``h`` is the second fundamental form ``G @ A``.
    """

    u: np.ndarray
    c: int
    point: np.ndarray
    d1: np.ndarray
    G: np.ndarray
    eta: np.ndarray
    xi: np.ndarray
    h: np.ndarray
    A: np.ndarray
    T: np.ndarray
    nu: float
    Tnorm: float
    christoffel: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.G.shape[0]

    @property
    def heights(self) -> np.ndarray:
        """``<df(d/du_i), d/dt>``, i.e. the covector of T."""
        return self.d1[:, -1]

    def ambient(self, X) -> np.ndarray:
        """df(X) for a coordinate vector X."""
        return np.asarray(X, dtype=float) @ self.d1

    def g(self, X, Y) -> float:
        return float(np.asarray(X) @ self.G @ np.asarray(Y))

    def invariant_residuals(self) -> dict[str, float]:
        J = metric_diag(self.point.size, self.c)
        normal_dots = self.d1 @ (J * self.eta)
        return {
            "unit_relation": abs(self.nu**2 + self.Tnorm**2 - 1.0),
            "eta_unit": abs(float(self.eta @ (J * self.eta)) - 1.0),
            "eta_xi": abs(float(self.eta @ (J * self.xi))),
            "eta_tangent": float(np.max(np.abs(normal_dots))),
            "self_adjoint": float(np.max(np.abs(self.h - self.h.T))),
        }


def _cross(rows: np.ndarray) -> np.ndarray:
    """Generalized cross product: Euclidean-orthogonal to the m-1 rows in R^m."""
    m = rows.shape[1]
    out = np.empty(m)
    for a in range(m):
        minor = np.delete(rows, a, axis=1)
        out[a] = (-1) ** a * np.linalg.det(minor)
    return out


def _raw_normal(jet: Jet2, c: int) -> np.ndarray:
    J = metric_diag(jet.value.size, c)
    xi = jet.value.copy()
    xi[-1] = 0.0
    rows = np.vstack([jet.d1 * J, xi * J])
    return _cross(rows)


def _orientation(chart: Chart) -> float:
    key = "orientation"
    if key in chart._cache:
        return chart._cache[key]
    u0 = np.asarray(chart.base_point)
    jet = chart.jet2(u0)
    w = _raw_normal(jet, chart.c)
    if chart.normal_reference is not None:
        J = metric_diag(w.size, chart.c)
        s = 1.0 if float(w @ (J * chart.normal_reference(u0))) >= 0 else -1.0
    else:
        scale = float(np.max(np.abs(w)))
        if abs(w[-1]) > 1e-12 * scale:
            s = 1.0 if w[-1] > 0 else -1.0
        else:
            lead = next(x for x in w if abs(x) > 1e-12 * scale)
            s = 1.0 if lead > 0 else -1.0
    chart._cache[key] = s
    return s


def shape_data(chart: Chart, u, flip: bool = False) -> ShapeData:
    """Compute :class:`ShapeData` of ``chart`` at ``u``.

    The normal is oriented so that nu >= 0 at the chart's base point (ties at
    nu = 0 broken by making the first nonzero component of eta positive), or
    by ``chart.normal_reference`` when present.  ``flip`` reverses it.
    """
    u = np.asarray(u, dtype=float)
    c = chart.c
    jet = chart.jet2(u)
    x = jet.value
    res = model_residual(x, c)
    if abs(res) > EPS_MODEL * model_scale(x):
        raise ConstraintError(f"{chart.name}: point off the model space (residual {res:.3e})")
    if c == -1 and x[0] <= 0:
        raise ConstraintError(f"{chart.name}: point on the wrong hyperboloid sheet")
    J = metric_diag(x.size, c)
    F1 = jet.d1
    G = F1 @ (J[:, None] * F1.T)
    G = 0.5 * (G + G.T)
    evals = np.linalg.eigvalsh(G)
    if evals[0] <= 0 or evals[-1] / evals[0] > MAX_CONDITION:
        raise RegularityError(f"{chart.name}: degenerate induced metric at {tuple(map(float, u))}")
    xi = x.copy()
    xi[-1] = 0.0
    w = _raw_normal(jet, c)
    wsq = float(w @ (J * w))
    if wsq <= 0:
        raise RegularityError(f"{chart.name}: normal is not spacelike at {tuple(map(float, u))}")
    sign = _orientation(chart) * (-1.0 if flip else 1.0)
    eta = w * (sign / math.sqrt(wsq))
    # second fundamental form <F_ij, eta> and first-kind Christoffel <F_ij, F_m>
    h = jet.d2 @ (J * eta)
    A = np.linalg.solve(G, h)
    b = F1[:, -1]
    T = np.linalg.solve(G, b)
    nu = float(eta[-1])
    Tnorm = math.sqrt(max(float(b @ T), 0.0))
    gamma1 = np.einsum("ija,ma->mij", jet.d2 * J, F1)
    christoffel = np.linalg.solve(G, gamma1.reshape(chart.n, -1)).reshape(gamma1.shape)
    return ShapeData(
        u=u,
        c=c,
        point=x,
        d1=F1,
        G=G,
        eta=eta,
        xi=xi,
        h=h,
        A=A,
        T=T,
        nu=nu,
        Tnorm=Tnorm,
        christoffel=christoffel,
    )


def principal_frame(sd: ShapeData) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (decreasing) and G-orthonormal eigenvectors (columns) of A."""
    L = np.linalg.cholesky(sd.G)
    Linv = np.linalg.inv(L)
    S = Linv @ sd.h @ Linv.T
    S = 0.5 * (S + S.T)
    lam, Y = np.linalg.eigh(S)
    order = np.argsort(-lam, kind="stable")
    return lam[order], Linv.T @ Y[:, order]


def principal_curvatures(sd: ShapeData) -> np.ndarray:
    return principal_frame(sd)[0]


def t_principal_angle(sd: ShapeData, tol: float = 1e-6) -> float:
    """Angle between T and the eigenspace of A that best contains it.

    Eigenvalues closer than ``tol`` are treated as one eigenspace.
    """
    if sd.Tnorm <= EPS_T:
        raise InapplicableError("T vanishes")
    lam, X = principal_frame(sd)
    coeffs = X.T @ sd.G @ sd.T
    best = 0.0
    i = 0
    while i < lam.size:
        j = i + 1
        while j < lam.size and abs(lam[j - 1] - lam[j]) <= tol:
            j += 1
        best = max(best, float(np.sum(coeffs[i:j] ** 2)))
        i = j
    ratio = min(1.0, math.sqrt(best) / sd.Tnorm)
    return math.acos(ratio) if ratio < 1.0 else 0.0


@dataclass
class ResidualReport:
    """Named residuals, each the max-abs value over the probed directions."""

    residuals: dict[str, float] = field(default_factory=dict)

    def __getitem__(self, key: str) -> float:
        return self.residuals[key]

    def max(self) -> float:
        return max(self.residuals.values(), default=0.0)

    def flagged(self, tol: float) -> list[str]:
        return sorted(k for k, v in self.residuals.items() if not v <= tol)

    def merge(self, other: "ResidualReport") -> "ResidualReport":
        merged = dict(self.residuals)
        for k, v in other.residuals.items():
            merged[k] = max(merged.get(k, 0.0), v)
        return ResidualReport(merged)


def _gnorm(G: np.ndarray, X: np.ndarray) -> float:
    return math.sqrt(max(float(X @ G @ X), 0.0))


def _orthonormal_complement(G: np.ndarray, T: np.ndarray) -> np.ndarray:
    """G-orthonormal basis (columns) of the G-orthogonal complement of T."""
    n = G.shape[0]
    L = np.linalg.cholesky(G)
    t = L.T @ T
    if np.linalg.norm(t) <= EPS_T:
        basis = np.eye(n)
    else:
        t = t / np.linalg.norm(t)
        P = np.eye(n) - np.outer(t, t)
        U, s, _ = np.linalg.svd(P)
        basis = U[:, : n - 1]
    return np.linalg.solve(L.T, basis)


def inclusion_weingarten_check(chart: Chart, u, xi_sign: float = 1.0) -> ResidualReport:
    """Residuals of A_xi(T) = -nu^2 T and A_xi(X) = -X for X orthogonal to T.

    A_xi is the Weingarten operator of f seen in E^{n+2} with respect to the
    model normal xi; it is computed from the second jet, independently of the
    identities being checked.
    """
    sd = shape_data(chart, u)
    jet = chart.jet2(u)
    J = metric_diag(sd.point.size, sd.c)
    xi = xi_sign * sd.xi
    A_xi = np.linalg.solve(sd.G, jet.d2 @ (J * xi))
    rT = A_xi @ sd.T + sd.nu**2 * sd.T
    out = {"A_xi_T": _gnorm(sd.G, rT)}
    perp = _orthonormal_complement(sd.G, sd.T)
    out["A_xi_perp"] = max(_gnorm(sd.G, A_xi @ perp[:, k] + perp[:, k]) for k in range(perp.shape[1]))
    return ResidualReport(out)


class _Neighborhood:
    """Shape data at a point and at the stencil points along each axis."""

    def __init__(self, chart: Chart, u, h: float):
        self.chart = chart
        self.u = np.asarray(u, dtype=float)
        self.h = h
        if not chart.contains(self.u, margin=2 * h):
            raise BoundaryError(f"{chart.name}: stencil of step {h} at {tuple(map(float, self.u))} leaves the domain")
        self._cache: dict[tuple, ShapeData] = {}
        self.center = self.at(self.u)

    def at(self, v) -> ShapeData:
        key = tuple(np.asarray(v).tolist())
        if key not in self._cache:
            self._cache[key] = shape_data(self.chart, v)
        return self._cache[key]

    def grad(self, getter) -> np.ndarray:
        """d/du_k of ``getter(shape_data)`` for every k (leading axis k)."""
        return central_gradient(lambda v: getter(self.at(v)), self.u, self.h)


def _default_probes(n: int) -> np.ndarray:
    return np.eye(n)


def structure_residuals(chart: Chart, u, probe_directions=None, h: float = FD_STEP) -> ResidualReport:
    """Residuals of the structure equations of f at ``u``.

    Checked identities (X, Y, Z range over the probe directions):

    - ``nabla_T``:   nabla_X T = nu A X
    - ``d_nu``:      X(nu) = -<AX, T>
    - ``gauss``:     R(X,Y)Z = (AX^AY)Z + c((X^Y)Z - <Y,T>(X^T)Z + <X,T>(Y^T)Z)
    - ``codazzi``:   (nabla_X A)Y - (nabla_Y A)X = c nu (X^Y)T
    - ``xi_ambient``: D_X xi = df(X) - <X,T> d/dt
    - ``xi_perp``:   normal part of D_X xi = -nu <X,T> eta
    - ``eta_perp``:  normal part of D_X eta = c nu <X,T> xi
    """
    nb = _Neighborhood(chart, u, h)
    sd = nb.center
    n, c = sd.n, sd.c
    P = _default_probes(n) if probe_directions is None else np.atleast_2d(np.asarray(probe_directions, float))
    J = metric_diag(sd.point.size, c)
    G, A, T, Gam, nu = sd.G, sd.A, sd.T, sd.christoffel, sd.nu

    dT = nb.grad(lambda s: s.T)  # [k, l]
    dnu = nb.grad(lambda s: np.array([s.nu]))[:, 0]
    dA = nb.grad(lambda s: s.A)  # [k, l, m]
    dGam = nb.grad(lambda s: s.christoffel)  # [k, l, i, j]
    deta = nb.grad(lambda s: s.eta)  # [k, a]
    dxi = sd.d1.copy()
    dxi[:, -1] = 0.0

    # covariant derivatives in coordinates
    nablaT = dT + np.einsum("lkm,m->kl", Gam, T)  # [k, l] = (nabla_k T)^l
    nablaA = dA + np.einsum("lkm,mj->klj", Gam, A) - np.einsum("lm,mkj->klj", A, Gam)
    # R(d_i, d_j) d_k = R[l, k, i, j] d_l
    R = (
        np.einsum("iljk->lkij", dGam)
        - np.einsum("jlik->lkij", dGam)
        + np.einsum("lim,mjk->lkij", Gam, Gam)
        - np.einsum("ljm,mik->lkij", Gam, Gam)
    )

    def wedge(X, Y, Z):
        return (Y @ G @ Z) * X - (X @ G @ Z) * Y

    res = dict.fromkeys(
        ["nabla_T", "d_nu", "gauss", "codazzi", "xi_ambient", "xi_perp", "eta_perp"], 0.0
    )
    Tcov = G @ T
    for X in P:
        AX = A @ X
        res["nabla_T"] = max(res["nabla_T"], _gnorm(G, X @ nablaT - nu * AX))
        res["d_nu"] = max(res["d_nu"], abs(float(X @ dnu) + float(AX @ G @ T)))
        xt = float(X @ Tcov)
        dxi_X = X @ dxi
        expect = sd.ambient(X) - xt * np.eye(sd.point.size)[-1]
        res["xi_ambient"] = max(res["xi_ambient"], float(np.max(np.abs(dxi_X - expect))))
        res["xi_perp"] = max(res["xi_perp"], abs(float(dxi_X @ (J * sd.eta)) + nu * xt))
        deta_X = X @ deta
        coef = float(deta_X @ (J * sd.xi)) / c
        res["eta_perp"] = max(res["eta_perp"], abs(coef - c * nu * xt))
        for Y in P:
            AY = A @ Y
            lhs = np.einsum("klj,k,j->l", nablaA, X, Y) - np.einsum("klj,k,j->l", nablaA, Y, X)
            res["codazzi"] = max(res["codazzi"], _gnorm(G, lhs - c * nu * wedge(X, Y, T)))
            for Z in P:
                RXYZ = np.einsum("lkij,i,j,k->l", R, X, Y, Z)
                rhs = wedge(AX, AY, Z) + c * (
                    wedge(X, Y, Z) - float(Y @ Tcov) * wedge(X, T, Z) + xt * wedge(Y, T, Z)
                )
                res["gauss"] = max(res["gauss"], _gnorm(G, RXYZ - rhs))
    return ResidualReport(res)


def adapted_frame(sd: ShapeData, tol: float = 1e-6) -> tuple[np.ndarray, np.ndarray]:
    """Principal frame with the last vector equal to T/|T|.

    Returns ``(curvatures, X)`` where the columns of X are G-orthonormal
    principal directions, ``X[:, -1] = T/|T|`` and ``curvatures[-1]`` is the
    curvature of T.  Requires T principal (see :func:`t_principal_angle`).
    """
    angle = t_principal_angle(sd, tol)
    if angle > 1e-6:
        raise InapplicableError(f"T is not a principal direction (angle {angle:.2e} rad)")
    lam, X = principal_frame(sd)
    tn = sd.T / sd.Tnorm
    coeffs = X.T @ sd.G @ tn
    # eigenspace (cluster) that carries T
    groups, i = [], 0
    while i < lam.size:
        j = i + 1
        while j < lam.size and abs(lam[j - 1] - lam[j]) <= tol:
            j += 1
        groups.append((i, j))
        i = j
    gi, gj = max(groups, key=lambda g: float(np.sum(coeffs[g[0]:g[1]] ** 2)))
    lam_T = float(tn @ sd.h @ tn)
    others, others_lam = [], []
    for a, b in groups:
        block = X[:, a:b]
        if (a, b) == (gi, gj):
            if b - a > 1:
                # complement of T inside its eigenspace
                proj = block - np.outer(tn, tn @ sd.G @ block)
                U, s, _ = np.linalg.svd(np.linalg.cholesky(sd.G).T @ proj)
                comp = np.linalg.solve(np.linalg.cholesky(sd.G).T, U[:, : b - a - 1])
                others.append(comp)
                others_lam.extend([lam[a]] * (b - a - 1))
        else:
            others.append(block)
            others_lam.extend(lam[a:b])
    X_out = np.column_stack(others + [tn[:, None]])
    return np.append(np.asarray(others_lam, float), lam_T), X_out


def t_direction_residuals(chart: Chart, u, h: float = FD_STEP) -> ResidualReport:
    """Residuals of the identities that hold when T is principal.

    With a principal frame X_1..X_n, X_n = T/|T|, lambda_i the curvatures and
    eta_Q = eta - nu d/dt:

    - ``Tnorm``:  X_i(|T|) = 0 (i < n), X_n(|T|) = nu lambda_n
    - ``nu``:     X_i(nu) = 0 (i < n), X_n(nu) = -lambda_n |T|
    - ``height``: X_i(pi_2 f) = 0 (i < n), X_n(pi_2 f) = |T|
    - ``eta_Q``:  D_{X_i} eta_Q = -lambda_i df(X_i) + c nu <X_i,T> xi - X_i(nu) d/dt
    """
    sd0 = shape_data(chart, u)
    if sd0.Tnorm <= EPS_T:
        raise InapplicableError(f"{chart.name}: T vanishes at {tuple(map(float, np.asarray(u)))}")
    lam, X = adapted_frame(sd0)
    nb = _Neighborhood(chart, u, h)
    sd = nb.center
    n, c = sd.n, sd.c
    dTn = nb.grad(lambda s: np.array([s.Tnorm]))[:, 0]
    dnu = nb.grad(lambda s: np.array([s.nu]))[:, 0]
    deta = nb.grad(lambda s: s.eta)
    e = np.zeros(sd.point.size)
    e[-1] = 1.0
    deta_Q = deta - np.outer(dnu, e)
    dheight = sd.heights
    out = dict.fromkeys(["Tnorm", "nu", "height", "eta_Q"], 0.0)
    Tcov = sd.G @ sd.T
    for i in range(n):
        Xi = X[:, i]
        last = i == n - 1
        out["Tnorm"] = max(out["Tnorm"], abs(float(Xi @ dTn) - (sd.nu * lam[i] if last else 0.0)))
        Xnu = float(Xi @ dnu)
        out["nu"] = max(out["nu"], abs(Xnu - (-lam[i] * sd.Tnorm if last else 0.0)))
        out["height"] = max(out["height"], abs(float(Xi @ dheight) - (sd.Tnorm if last else 0.0)))
        lhs = Xi @ deta_Q
        rhs = -lam[i] * sd.ambient(Xi) + c * sd.nu * float(Xi @ Tcov) * sd.xi - Xnu * e
        out["eta_Q"] = max(out["eta_Q"], float(np.max(np.abs(lhs - rhs))))
    return ResidualReport(out)


def sample_grid(chart: Chart, counts, margin: float = 0.0) -> np.ndarray:
    """Tensor grid over the chart domain (shrunk by ``margin``), C order."""
    counts = [counts] * chart.n if np.isscalar(counts) else list(counts)
    axes = [np.linspace(a + margin, b - margin, int(k)) for (a, b), k in zip(chart.domain, counts)]
    return np.array(list(itertools.product(*axes)))
