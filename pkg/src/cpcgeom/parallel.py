"""Parallel hypersurfaces and transport of principal curvatures.

For a hypersurface whose field T is a principal direction, the parallel
hypersurface at signed distance t is

    f_t = C(|T| t) xi + S(|T| t)/|T| * eta_Q + (pi_2 f + t nu) d/dt

with eta_Q = eta - nu d/dt, and (C, S) = (cos, sin) or (cosh, sinh).  Its
principal curvatures are obtained in closed form from those of f:
:func:`transport_curvature` for the directions orthogonal to T and
:func:`transport_curvature_T` for T itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ambient import cs_kernels, metric_diag
from .chart import Chart
from .errors import FocalPointError, InapplicableError, UsageError
from .immersion import EPS_T, adapted_frame, principal_curvatures, shape_data

EPS_REG = 1e-6
MAX_ORDER = 30


def _sinc_term(tnorm: float, t: float, c: int) -> float:
    """S(|T| t)/|T|, continuous at |T| = 0."""
    if tnorm == 0.0:
        return t
    return cs_kernels(tnorm * t, c)[1] / tnorm


def _parallel_parts(chart: Chart, u, t: float):
    sd = shape_data(chart, u)
    e = np.zeros(sd.point.size)
    e[-1] = 1.0
    eta_Q = sd.eta - sd.nu * e
    C, S = cs_kernels(sd.Tnorm * t, sd.c)
    return sd, e, eta_Q, C, S


def parallel_point(chart: Chart, u, t: float) -> np.ndarray:
    sd, e, eta_Q, C, _ = _parallel_parts(chart, u, t)
    return C * sd.xi + _sinc_term(sd.Tnorm, t, sd.c) * eta_Q + (sd.point[-1] + t * sd.nu) * e


def parallel_normal(chart: Chart, t: float, u) -> np.ndarray:
    """Unit normal eta_t of f_t at ``u``."""
    sd, e, eta_Q, C, S = _parallel_parts(chart, u, t)
    return -sd.c * sd.Tnorm * S * sd.xi + C * eta_Q + sd.nu * e


def regularity_margins(lams, lam_T: float, tnorm: float, c: int, t: float) -> tuple[np.ndarray, float]:
    """``C - lambda_i S/|T|`` for each lambda_i, and ``1 - t lambda_n``."""
    C, _ = cs_kernels(tnorm * t, c)
    sinc = _sinc_term(tnorm, t, c)
    return np.array([C - lam * sinc for lam in lams]), 1.0 - t * lam_T


@dataclass(frozen=True)
class PointCurvatures:
    """Curvatures at one point split into the T-orthogonal ones and lambda_n."""

    u: tuple[float, ...]
    tnorm: float
    nu: float
    lams: tuple[float, ...]
    lam_T: float


def point_curvatures(chart: Chart, u) -> PointCurvatures:
    sd = shape_data(chart, u)
    if sd.Tnorm <= EPS_T:
        raise InapplicableError(f"{chart.name}: T vanishes at {tuple(map(float, np.asarray(u)))}")
    lam, _ = adapted_frame(sd)
    return PointCurvatures(tuple(map(float, np.asarray(u))), sd.Tnorm, sd.nu, tuple(map(float, lam[:-1])), float(lam[-1]))


def _check_margins(pc: PointCurvatures, c: int, t: float, eps: float = EPS_REG) -> float:
    m, mT = regularity_margins(pc.lams, pc.lam_T, pc.tnorm, c, t)
    for lam, val in zip(pc.lams, m):
        if val <= eps:
            raise FocalPointError(
                f"focal value: curvature {lam:.6g} at t={t:g} (margin {val:.2e}) at u={pc.u}", curvature=lam, t=t
            )
    if mT <= eps:
        raise FocalPointError(
            f"focal value: curvature {pc.lam_T:.6g} of T at t={t:g} (margin {mT:.2e}) at u={pc.u}",
            curvature=pc.lam_T,
            t=t,
        )
    return float(min(np.min(np.abs(m), initial=math.inf), abs(mT)))


def _probe_points(chart: Chart, grid) -> np.ndarray:
    if grid is None:
        return np.atleast_2d(np.asarray(chart.base_point, dtype=float))
    return np.atleast_2d(np.asarray(grid, dtype=float))


def parallel_immersion(chart: Chart, t: float, grid=None, fd_step: float = 1e-3) -> Chart:
    """Chart of the parallel hypersurface f_t.

    Regularity is checked on ``grid`` (default: the chart's base point); the
    returned chart is evaluated pointwise and its jets come from finite
    differences.  Its normal is oriented along eta_t.
    """
    t = float(t)
    for u in _probe_points(chart, grid):
        _check_margins(point_curvatures(chart, u), chart.c, t)

    if t == 0.0:
        func = chart.func
    else:

        def func(u):
            return list(parallel_point(chart, np.array([float(x) for x in u]), t))

    return Chart(
        func,
        chart.n,
        chart.c,
        chart.domain,
        chart.base_point,
        name=f"{chart.name}[t={t:g}]",
        normal_reference=lambda u: parallel_normal(chart, t, u),
        fd_step=chart.fd_step if t == 0.0 else fd_step,
    )


def transport_curvature(lam: float, tnorm: float, c: int, t: float) -> float:
    """Curvature at distance t of a principal direction orthogonal to T."""
    C, S = cs_kernels(tnorm * t, c)
    sinc = _sinc_term(tnorm, t, c)
    den = C - lam * sinc
    if abs(den) <= EPS_REG:
        raise FocalPointError(f"focal value: curvature {lam:.6g} at t={t:g}", curvature=lam, t=t)
    return (c * tnorm * S + lam * C) / den


def transport_curvature_T(lam_n: float, t: float) -> float:
    """Curvature at distance t of the principal direction T."""
    den = 1.0 - t * lam_n
    if abs(den) <= EPS_REG:
        raise FocalPointError(f"focal value: curvature {lam_n:.6g} of T at t={t:g}", curvature=lam_n, t=t)
    return lam_n / den


def model_parallel_curvature(lam: float, c: int, s: float) -> float:
    """Curvature of the parallel hypersurface at distance s inside Q^n_c."""
    C, S = cs_kernels(s, c)
    den = C - S * lam
    if abs(den) <= EPS_REG:
        raise FocalPointError(f"focal value: curvature {lam:.6g} at s={s:g}", curvature=lam, t=s)
    return (c * S + C * lam) / den


@dataclass(frozen=True)
class CoefficientTable:
    """Integer coefficients u_{k,j} of the k-th t-derivative of lambda^t.

    d^k lambda^t / dt^k = sum_j u_{k,j} c^{(k+1-j)/2} |T|^{k+1-j} (lambda^t)^j
    """

    k: int
    coeffs: dict[int, int]

    def __getitem__(self, j: int) -> int:
        return self.coeffs.get(j, 0)

    def parity_ok(self) -> bool:
        return all((j + self.k) % 2 == 1 for j in self.coeffs)


def _coefficients_upto(k: int) -> list[dict[int, int]]:
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool) or k < 1:
        raise UsageError(f"derivative order must be an integer >= 1, got {k!r}")
    if k > MAX_ORDER:
        raise UsageError(f"derivative order capped at {MAX_ORDER}, got {k}")
    rows = [{1: 1}]
    for _ in range(k):
        prev = rows[-1]
        top = max(prev) + 1
        row = {}
        for j in range(0, top + 1):
            val = (j + 1) * prev.get(j + 1, 0) + (j - 1) * prev.get(j - 1, 0)
            if val:
                row[j] = val
        rows.append(row)
    return rows


def derivative_coefficients(k: int) -> CoefficientTable:
    return CoefficientTable(int(k), _coefficients_upto(int(k) if isinstance(k, np.integer) else k)[-1])


def curvature_derivative(lam: float, tnorm: float, c: int, k: int) -> float:
    """k-th t-derivative of transport_curvature at the point where it equals lam."""
    table = derivative_coefficients(k)
    total = 0.0
    for j, u in sorted(table.coeffs.items()):
        p = k + 1 - j  # even by parity
        term = float(u) * (c ** (p // 2)) * tnorm**p * lam**j
        if not math.isfinite(term):
            raise OverflowError(f"term u_{{{k},{j}}} overflows double precision")
        total += term
    return total


def power_sums(lams, k_max: int) -> list[float]:
    lams = np.asarray(lams, dtype=float)
    return [float(np.sum(lams**k)) for k in range(1, int(k_max) + 1)]


def charpoly_from_power_sums(p) -> list[float]:
    """Elementary symmetric polynomials e_1..e_n from power sums p_1..p_n."""
    p = [float(x) for x in p]
    if not p:
        raise UsageError("need at least one power sum")
    e = [1.0]
    for k in range(1, len(p) + 1):
        acc = 0.0
        for i in range(1, k + 1):
            acc += (-1) ** (i - 1) * e[k - i] * p[i - 1]
        e.append(acc / k)
    return e[1:]


def _merge_clusters(z: np.ndarray, radius: float) -> np.ndarray:
    """Real parts of ``z`` with single-link clusters (distance <= radius) averaged."""
    order = np.argsort(z.real)
    out = z.real.copy()
    group = [order[0]]
    for i in order[1:]:
        if min(abs(z[i] - z[j]) for j in group) <= radius:
            group.append(i)
            continue
        out[group] = np.mean(z[group].real)
        group = [i]
    out[group] = np.mean(z[group].real)
    return np.sort(out)


def _power_sum_residual(p: np.ndarray, roots: np.ndarray) -> float:
    k = np.arange(1, p.size + 1)
    q = np.sum(roots[None, :] ** k[:, None], axis=1)
    scale = np.sum(np.abs(roots)[None, :] ** k[:, None], axis=1)
    return float(np.max(np.abs(p - q) / np.maximum(1.0, scale)))


def roots_from_power_sums(p) -> np.ndarray:
    """Recover a real multiset from its first n power sums (sorted).

    A root of multiplicity m comes back from the companion matrix split by
    about eps^(1/m), possibly into complex pairs.  The roots are known to be
    real, so clusters are averaged at growing link radii and the most merged
    candidate whose power sums still match to rounding is returned.
    """
    e = charpoly_from_power_sums(p)
    coeffs = [1.0] + [(-1) ** k * ek for k, ek in enumerate(e, start=1)]
    z = np.roots(coeffs)
    p = np.asarray([float(x) for x in p])
    scale = max(1.0, float(np.max(np.abs(z), initial=0.0)))
    best = np.sort(z.real)
    best_res = _power_sum_residual(p, best)
    if np.all(np.abs(z.imag) <= 1e-12 * scale) and np.min(np.diff(best), initial=np.inf) > 1e-4 * scale:
        return best
    floor = max(best_res, 1e-15)
    for radius in scale * 10.0 ** np.arange(-12, -1):
        cand = _merge_clusters(z, radius)
        res = _power_sum_residual(p, cand)
        if res <= 4 * floor:
            best, best_res = cand, res
            floor = min(floor, max(res, 1e-15))
    return _polish(p, best, best_res)


def _polish(p: np.ndarray, roots: np.ndarray, res: float, steps: int = 8) -> np.ndarray:
    """Gauss-Newton on the power-sum equations, keeping only improving steps."""
    k = np.arange(1, p.size + 1)
    for _ in range(steps):
        if res <= 1e-15:
            break
        w = 1.0 / np.maximum(1.0, np.sum(np.abs(roots)[None, :] ** k[:, None], axis=1))
        r = (p - np.sum(roots[None, :] ** k[:, None], axis=1)) * w
        J = k[:, None] * roots[None, :] ** (k[:, None] - 1) * w[:, None]
        step = np.linalg.lstsq(J, r, rcond=1e-12)[0]
        cand = roots + step
        cand = np.sort(cand + (p[0] - np.sum(cand)) / cand.size)  # keep the trace exact
        cand_res = _power_sum_residual(p, cand)
        if not cand_res < res:
            break
        roots, res = cand, cand_res
    return roots


def _min_margin(pcs, c: int, t: float) -> float:
    """Smallest signed margin; all margins equal 1 at t = 0."""
    return float(_margin_profile(pcs, c, np.array([float(t)]))[0])


def _margin_profile(pcs, c: int, ts: np.ndarray) -> np.ndarray:
    """Smallest signed margin over all points and curvatures, for each t."""
    ts = np.asarray(ts, dtype=float)
    out = np.full(ts.shape, np.inf)
    for pc in pcs:
        x = pc.tnorm * ts
        C = np.cos(x) if c == 1 else np.cosh(x)
        S = np.sin(x) if c == 1 else np.sinh(x)
        sinc = S / pc.tnorm if pc.tnorm > 0 else ts
        for lam in pc.lams:
            out = np.minimum(out, C - lam * sinc)
        out = np.minimum(out, 1.0 - ts * pc.lam_T)
    return out


def _first_crossing(pcs, c: int, s: float, eps: float, samples: int = 2001) -> float:
    """Largest r <= s with margins > eps on [0, r] (s may be negative)."""
    ts = np.linspace(0.0, s, samples)
    bad = np.nonzero(_margin_profile(pcs, c, ts) <= eps)[0]
    if bad.size == 0:
        return s
    good, fail = ts[bad[0] - 1], ts[bad[0]]
    for _ in range(60):
        mid = 0.5 * (good + fail)
        if _margin_profile(pcs, c, np.array([mid]))[0] > eps:
            good = mid
        else:
            fail = mid
    return good


def admissible_t_range(chart: Chart, grid, t_range, eps: float = EPS_REG) -> tuple[float, float, bool]:
    """Clip ``t_range`` to the largest symmetric interval with margins > eps.

    Margins are continuous in t and equal 1 at t = 0, so the interval is
    bounded by the first sampled crossing of eps on either side (refined by
    bisection).  Returns ``(lo, hi, clipped)``.
    """
    lo, hi = float(t_range[0]), float(t_range[1])
    if lo > hi:
        raise UsageError(f"empty t range {t_range}")
    pcs = [point_curvatures(chart, u) for u in _probe_points(chart, grid)]
    s = max(abs(lo), abs(hi))
    bound = min(_first_crossing(pcs, chart.c, s, eps), -_first_crossing(pcs, chart.c, -s, eps))
    if bound >= s:
        return lo, hi, False
    bound *= 1 - 1e-9
    return max(lo, -bound), min(hi, bound), True


@dataclass
class ParallelFamily:
    base: Chart
    t_range: tuple[float, float]
    margins: dict[float, float]
    clipped: bool = False

    @classmethod
    def build(cls, chart: Chart, grid, t_values) -> "ParallelFamily":
        t_values = [float(t) for t in t_values]
        lo, hi, clipped = admissible_t_range(chart, grid, (min(t_values), max(t_values)))
        pcs = [point_curvatures(chart, u) for u in _probe_points(chart, grid)]
        margins = {t: _min_margin(pcs, chart.c, t) for t in t_values if lo <= t <= hi}
        return cls(chart, (lo, hi), margins, clipped)

    def at(self, t: float) -> Chart:
        return parallel_immersion(self.base, t)


def predicted_spectrum(pc: PointCurvatures, c: int, t: float) -> np.ndarray:
    vals = [transport_curvature(lam, pc.tnorm, c, t) for lam in pc.lams]
    vals.append(transport_curvature_T(pc.lam_T, t))
    return np.sort(np.asarray(vals))[::-1]


def spectrum_mismatch(predicted, measured) -> float:
    """Max deviation after matching sorted values (optimal for 1D multisets)."""
    a = np.sort(np.asarray(predicted, float))
    b = np.sort(np.asarray(measured, float))
    if a.shape != b.shape:
        raise UsageError("spectra of different sizes")
    return float(np.max(np.abs(a - b), initial=0.0))


def parallel_oracle_check(chart: Chart, u, t: float) -> dict:
    """Compare f_t numerically against the closed-form transport laws at ``u``.

    Returns the predicted and measured spectra, their mismatch, and the
    deviations of |df_t X_i|^2 from (C - lambda_i S/|T|)^2 and (1 - t lambda_n)^2.
    """
    pc = point_curvatures(chart, u)
    sd = shape_data(chart, u)
    lam, X = adapted_frame(sd)
    ft = parallel_immersion(chart, t, grid=[u])
    sdt = shape_data(ft, u)
    measured = np.sort(principal_curvatures(sdt))[::-1]
    predicted = predicted_spectrum(pc, chart.c, t)
    m, mT = regularity_margins(pc.lams, pc.lam_T, pc.tnorm, chart.c, t)
    expected_sq = np.append(m**2, mT**2)
    J = metric_diag(sdt.point.size, chart.c)
    actual_sq = np.array([float(v @ (J * v)) for v in (X.T @ sdt.d1)])
    return {
        "predicted": predicted,
        "measured": measured,
        "spectrum_mismatch": spectrum_mismatch(predicted, measured),
        "metric_mismatch": float(np.max(np.abs(actual_sq - expected_sq))),
    }


@dataclass
class IsoparametricVerdict:
    status: str  # "ok" or "trivial"
    tnorm_spread: float = 0.0
    curvature_spread: float = 0.0
    curvature_spread_per_t: dict[float, float] = field(default_factory=dict)
    tnorm_constant: bool = True
    curvatures_constant: bool = True
    implication_check: bool = True
    reason: str = ""


def _spread(rows) -> float:
    arr = np.asarray(rows, dtype=float)
    return float(np.max(np.ptp(arr, axis=0), initial=0.0)) if arr.size else 0.0


def isoparametric_cpc_test(
    chart: Chart,
    space_grid,
    t_grid,
    tnorm_tol: float = 1e-8,
    curvature_tol: float = 1e-7,
) -> IsoparametricVerdict:
    """Check that constant |T| and constant principal curvatures agree.

    Constancy of curvatures is tested at t = 0 and, through the transport
    laws, on every t in ``t_grid``.  The implication check passes when both
    sides agree (both constant or both not).  Slices, where T vanishes, are
    reported with status ``"trivial"``.
    """
    grid = np.atleast_2d(np.asarray(space_grid, dtype=float))
    try:
        pcs = [point_curvatures(chart, u) for u in grid]
    except InapplicableError as exc:
        sd = shape_data(chart, grid[0])
        if sd.Tnorm <= EPS_T:
            return IsoparametricVerdict(status="trivial", reason=str(exc))
        raise
    tn_spread = _spread([[pc.tnorm] for pc in pcs])
    spectra0 = [np.sort(np.append(pc.lams, pc.lam_T)) for pc in pcs]
    spread0 = _spread(spectra0)
    per_t = {}
    for t in t_grid:
        t = float(t)
        for pc in pcs:
            _check_margins(pc, chart.c, t)
        per_t[t] = _spread([np.sort(predicted_spectrum(pc, chart.c, t)) for pc in pcs])
    tconst = tn_spread <= tnorm_tol
    cconst = spread0 <= curvature_tol and all(v <= curvature_tol for v in per_t.values())
    return IsoparametricVerdict(
        status="ok",
        tnorm_spread=tn_spread,
        curvature_spread=spread0,
        curvature_spread_per_t=per_t,
        tnorm_constant=tconst,
        curvatures_constant=cconst,
        implication_check=tconst == cconst,
    )
