"""Smooth orthonormal eigenframes of symmetric operator fields.

Frames are built from projector products: for the k-th eigenvalue cluster,

    X = (-1)^(k-1) * prod_{j != k} (A - lambda_j I) Y

maps any vector Y into the k-th eigenspace (the product of all the factors
annihilates everything by Cayley-Hamilton).  Applying it to a fixed seed and
orthonormalizing yields frames that vary as smoothly as A does.

Operators here are symmetric matrices with respect to the Euclidean inner
product.  For a shape operator use its matrix in a G-orthonormal basis (see
:func:`orthonormal_shape_matrix`).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ClusteringError, SeedError, StratificationError, UsageError

SEED_FLOOR = 1e-10


@dataclass(frozen=True)
class EigenStructure:
    eigenvalues: tuple[float, ...]  # decreasing cluster means
    multiplicities: tuple[int, ...]
    tol_used: float

    @property
    def n(self) -> int:
        return sum(self.multiplicities)

    @property
    def g(self) -> int:
        return len(self.eigenvalues)

    def offsets(self) -> list[int]:
        return [0, *itertools.accumulate(self.multiplicities)]

    def same_stratum(self, other: "EigenStructure") -> bool:
        return self.multiplicities == other.multiplicities


def cluster_spectrum(A, tol: float = 1e-6) -> EigenStructure:
    """Group the eigenvalues of a symmetric matrix into clusters.

    Consecutive eigenvalues at distance <= tol are merged.  A gap in
    (tol, 2 tol] is ambiguous and raises :class:`ClusteringError`, as does a
    cluster whose total spread exceeds tol.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise UsageError(f"expected a square matrix, got shape {A.shape}")
    if np.max(np.abs(A - A.T), initial=0.0) > 1e-12 * max(1.0, float(np.max(np.abs(A)))):
        raise UsageError("matrix is not symmetric")
    lam = np.sort(np.linalg.eigvalsh(0.5 * (A + A.T)))[::-1]
    groups: list[list[float]] = [[lam[0]]]
    for prev, cur in zip(lam[:-1], lam[1:]):
        gap = prev - cur
        if gap <= tol:
            groups[-1].append(cur)
        elif gap <= 2 * tol:
            raise ClusteringError(f"eigenvalue gap {gap:.3e} lies in the ambiguous band ({tol:g}, {2 * tol:g}]")
        else:
            groups.append([cur])
    for grp in groups:
        if grp[0] - grp[-1] > tol:
            raise ClusteringError(f"cluster spread {grp[0] - grp[-1]:.3e} exceeds tol {tol:g}; chained merge")
    return EigenStructure(
        tuple(float(np.mean(g)) for g in groups),
        tuple(len(g) for g in groups),
        float(tol),
    )


def projector_product(A: np.ndarray, eigenvalues, k: int) -> np.ndarray:
    """``(-1)^k prod_{j != k} (A - lambda_j I)`` with k counted from 0."""
    n = A.shape[0]
    P = np.eye(n)
    for j, lam in enumerate(eigenvalues):
        if j != k:
            P = (A - lam * np.eye(n)) @ P
    return P if k % 2 == 0 else -P


def _gap_scale(eigenvalues, k: int) -> float:
    return math.prod(abs(eigenvalues[k] - lam) for j, lam in enumerate(eigenvalues) if j != k)


@dataclass
class FramePoint:
    frame: np.ndarray  # columns are the frame vectors, grouped by cluster
    eigenvalues: np.ndarray  # per column
    annihilation: float
    cross_orthogonality: float


@dataclass
class FrameField:
    """Frames on a grid (C-order points) with smoothness diagnostics."""

    points: np.ndarray
    frames: np.ndarray  # (npoints, n, n), columns are vectors
    eigenvalues: np.ndarray  # (npoints, n)
    structure: EigenStructure
    seeds: tuple[tuple[int, ...], ...]
    annihilation: float
    cross_orthogonality: float
    max_adjacent_deviation: float
    continuity_constant: float
    orientation_repairs: int
    diagnostics: dict = field(default_factory=dict)

    def gram_defect(self) -> float:
        eye = np.eye(self.frames.shape[1])
        return max(float(np.max(np.abs(F.T @ F - eye))) for F in self.frames)

    def determinants(self) -> np.ndarray:
        return np.array([np.linalg.det(F) for F in self.frames])


def _mgs(vectors: list[np.ndarray], against: list[np.ndarray]) -> list[np.ndarray]:
    out: list[np.ndarray] = []
    for v in vectors:
        w = v.copy()
        for q in against + out:
            w = w - (q @ w) * q
        out.append(w / np.linalg.norm(w))
    return out


def _choose_seeds(A, structure: EigenStructure) -> tuple[tuple[int, ...], ...]:
    """Canonical seed indices per cluster, skipping vectors the projector kills."""
    n = structure.n
    lam = structure.eigenvalues
    seeds = []
    for k, m in enumerate(structure.multiplicities):
        P = projector_product(A, lam, k)
        floor = SEED_FLOOR * max(_gap_scale(lam, k), 1e-300)
        chosen: list[int] = []
        accepted: list[np.ndarray] = []
        for idx in range(n):
            w = P[:, idx].copy()
            for q in accepted:
                w = w - (q @ w) * q
            nrm = np.linalg.norm(w)
            if nrm > floor:
                chosen.append(idx)
                accepted.append(w / nrm)
                if len(chosen) == m:
                    break
        if len(chosen) < m:
            raise SeedError(f"cannot find {m} seeds for cluster {k}")
        seeds.append(tuple(chosen))
    return tuple(seeds)


def frame_at(A, structure: EigenStructure, seeds) -> FramePoint:
    """Projector-product frame at one point, before sign alignment."""
    A = np.asarray(A, dtype=float)
    lam = structure.eigenvalues
    raw_by_cluster: list[list[np.ndarray]] = []
    annihilation = 0.0
    col_lams: list[float] = []
    for k, idxs in enumerate(seeds):
        P = projector_product(A, lam, k)
        floor = SEED_FLOOR * max(_gap_scale(lam, k), 1e-300)
        raw = [P[:, i] for i in idxs]
        for x in raw:
            nrm = np.linalg.norm(x)
            if nrm <= floor:
                raise SeedError(f"projector image of seed for cluster {k} degenerated ({nrm:.2e})")
            annihilation = max(annihilation, float(np.linalg.norm(A @ x - lam[k] * x) / nrm))
        raw_by_cluster.append(raw)
        col_lams.extend([lam[k]] * len(idxs))
    cross = 0.0
    for a, b in itertools.combinations(range(len(raw_by_cluster)), 2):
        for x in raw_by_cluster[a]:
            for y in raw_by_cluster[b]:
                cross = max(cross, abs(float(x @ y)) / (np.linalg.norm(x) * np.linalg.norm(y)))
    basis: list[np.ndarray] = []
    for raw in raw_by_cluster:
        basis.extend(_mgs(raw, basis))
    return FramePoint(np.column_stack(basis), np.asarray(col_lams), annihilation, cross)


def _reference_index(idx: tuple[int, ...]) -> tuple[int, ...] | None:
    """Previous neighbour: decrement the last nonzero multi-index entry."""
    for ax in range(len(idx) - 1, -1, -1):
        if idx[ax] > 0:
            ref = list(idx)
            ref[ax] -= 1
            return tuple(ref)
    return None


def smooth_frame(
    A_field: Callable[[np.ndarray], np.ndarray],
    grid_axes,
    structure: EigenStructure | None = None,
    tol: float = 1e-6,
    seeds=None,
) -> FrameField:
    """Build a smooth positively oriented eigenframe over a tensor grid.

    ``grid_axes`` is a list of 1D coordinate arrays; points are visited in C
    order.  The clustering is recomputed at every point and must match the
    first one.  Seeds (canonical basis indices per cluster) are fixed at the
    first point.  Each frame vector is sign-aligned with the same vector at
    the previous neighbour (last nonzero multi-index decremented).  The last
    vector is flipped when needed so that det = +1.
    """
    axes = [np.asarray(a, dtype=float) for a in grid_axes]
    shape = tuple(a.size for a in axes)
    multi = list(itertools.product(*[range(s) for s in shape]))
    points = np.array([[axes[d][i] for d, i in enumerate(m)] for m in multi])
    A0 = np.asarray(A_field(points[0]), dtype=float)
    st0 = cluster_spectrum(A0, tol)
    if structure is not None and not structure.same_stratum(st0):
        raise StratificationError(f"declared multiplicities {structure.multiplicities} != {st0.multiplicities}")
    structure = structure or st0
    if seeds is None:
        seeds = _choose_seeds(A0, st0)
    frames = np.empty((len(multi), structure.n, structure.n))
    lams = np.empty((len(multi), structure.n))
    pos = {m: i for i, m in enumerate(multi)}
    annihilation = cross = 0.0
    repairs = 0
    max_dev = 0.0
    ratio = 0.0
    for i, m in enumerate(multi):
        A = np.asarray(A_field(points[i]), dtype=float)
        st = cluster_spectrum(A, tol)
        if not st.same_stratum(structure):
            raise StratificationError(
                f"multiplicities change from {structure.multiplicities} to {st.multiplicities} at {tuple(map(float, points[i]))}"
            )
        fp = frame_at(A, st, seeds)
        F = fp.frame
        annihilation = max(annihilation, fp.annihilation)
        cross = max(cross, fp.cross_orthogonality)
        ref = _reference_index(m)
        if ref is not None:
            R = frames[pos[ref]]
            signs = np.where(np.einsum("ij,ij->j", F, R) < 0, -1.0, 1.0)
            F = F * signs
        if np.linalg.det(F) < 0:
            F[:, -1] = -F[:, -1]
            if ref is not None:
                repairs += 1
        if ref is not None:
            R = frames[pos[ref]]
            dev = float(np.max(np.linalg.norm(F - R, axis=0)))
            step = float(np.linalg.norm(points[i] - points[pos[ref]]))
            max_dev = max(max_dev, dev)
            ratio = max(ratio, dev / step)
        frames[i] = F
        lams[i] = fp.eigenvalues
    return FrameField(
        points=points,
        frames=frames,
        eigenvalues=lams,
        structure=structure,
        seeds=tuple(seeds),
        annihilation=annihilation,
        cross_orthogonality=cross,
        max_adjacent_deviation=max_dev,
        continuity_constant=ratio,
        orientation_repairs=repairs,
    )


def refinement_study(A_field, interval, counts=(5, 9, 17, 33), tol: float = 1e-6) -> dict:
    """Max adjacent deviation of the frame on a 1D line under grid refinement.

    Returns spacings, deviations and successive ratios dev_{k+1} / dev_k,
    which should be close to 1/2 for a differentiable frame.
    A field whose frame is constant (all deviations <= 1e-10) is reported as
    ``constant`` and trivially passes.
    """
    a, b = interval
    spacings, devs = [], []
    for k in counts:
        ff = smooth_frame(A_field, [np.linspace(a, b, k)], tol=tol)
        spacings.append((b - a) / (k - 1))
        devs.append(ff.max_adjacent_deviation)
    constant = max(devs) <= 1e-10
    ratios = [] if constant else [d1 / d0 for d0, d1 in zip(devs[:-1], devs[1:])]
    linear = constant or all(0.4 <= r <= 0.6 for r in ratios)
    return {"spacings": spacings, "deviations": devs, "ratios": ratios, "constant": constant, "linear": linear}


def orthonormal_shape_matrix(sd) -> tuple[np.ndarray, np.ndarray]:
    """Shape operator in a G-orthonormal basis.

    Returns ``(S, B)`` with S symmetric and B the basis (columns, coordinate
    components), so that ``A = B S B^{-1}``.
    """
    L = np.linalg.cholesky(sd.G)
    Linv = np.linalg.inv(L)
    S = Linv @ sd.h @ Linv.T
    return 0.5 * (S + S.T), Linv.T


def rotation_field(theta: float, values=(1.0, 3.0)) -> np.ndarray:
    """``R(theta) diag(values) R(theta)^T`` in the plane."""
    c, s = math.cos(theta), math.sin(theta)
    R = np.array([[c, -s], [s, c]])
    return R @ np.diag(values) @ R.T
