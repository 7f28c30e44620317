"""Identities specific to surfaces (n = 2) with two distinct constant curvatures."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ambient import check_c
from .errors import DegenerateError, PreconditionError, UmbilicError


def prop21_residual(lam1: float, lam2: float, b1: float, b2: float, nu: float, c: int) -> float:
    """Left-hand side of the constraint linking curvatures and the pair (T, nu).

    lam1 lam2 + 2 c nu^2 + c (lam1 b1^2 - lam2 b2^2)/(lam2 - lam1)
        + 2 nu^2 (b1^2 + b2^2)/(lam2 - lam1)^2

    where b_i are the components of T in the principal frame.
    """
    check_c(c)
    if lam1 == lam2:
        raise UmbilicError("the identity needs two distinct principal curvatures")
    if abs(nu * nu + b1 * b1 + b2 * b2 - 1.0) > 1e-9:
        raise PreconditionError("nu^2 + b1^2 + b2^2 must equal 1")
    d = lam2 - lam1
    return (
        lam1 * lam2
        + 2 * c * nu * nu
        + c * (lam1 * b1 * b1 - lam2 * b2 * b2) / d
        + 2 * nu * nu * (b1 * b1 + b2 * b2) / (d * d)
    )


@dataclass(frozen=True)
class Biquadratic:
    """x^2 + p x + q = 0 in x = nu^2."""

    coefficients: tuple[float, float, float]
    discriminant: float
    roots: tuple[float, ...]  # real roots, ascending
    admissible: tuple[float, ...]  # real roots in [0, 1]


def minimal_biquadratic(lam1: float, c: int) -> Biquadratic:
    """nu^4 - nu^2 (1 + 5 c lam1^2) + lam1^2 (2 lam1^2 + c) = 0."""
    check_c(c)
    if lam1 == 0:
        raise DegenerateError("lambda_1 = 0 is the totally geodesic case")
    L = lam1 * lam1
    coeffs = (1.0, -(1.0 + 5 * c * L), L * (2 * L + c))
    disc = coeffs[1] ** 2 - 4 * coeffs[2]
    if disc < 0:
        roots: tuple[float, ...] = ()
    else:
        r = math.sqrt(disc)
        roots = tuple(sorted(((-coeffs[1] - r) / 2, (-coeffs[1] + r) / 2)))
    admissible = tuple(x for x in roots if -1e-12 <= x <= 1 + 1e-12)
    return Biquadratic(coeffs, disc, roots, admissible)


@dataclass(frozen=True)
class ScanResult:
    samples: int
    admissible_roots: int
    counterexamples: tuple[tuple[float, int, float], ...]

    @property
    def clean(self) -> bool:
        return not self.counterexamples


def _survives(lam1: float, c: int, nu2: float, tol: float = 1e-12) -> bool:
    """Follow the constraint chain for a minimal surface with curvatures +-lam1.

    A root nu^2 of the biquadratic is a fixed function of the constant lam1,
    so nu is constant.  Then X(nu) = -<AX, T> = 0 for both principal
    directions, i.e. b_i lam_i = 0; with lam_i = +-lam1 != 0 this forces
    b = 0, hence T = 0, nu^2 = 1, and the surface lies in a slice where A = 0,
    contradicting lam1 != 0.  A candidate survives only if some step of this
    chain fails to apply.
    """
    lams = (lam1, -lam1)
    b_sq = 1.0 - nu2
    # X_i(nu) = -lam_i b_i must vanish; squares suffice
    forced_zero = all(abs(lam) > tol for lam in lams)
    if not forced_zero:
        return True
    # b = 0 requires nu^2 = 1; otherwise the root itself is inconsistent
    if abs(b_sq) > tol:
        return False
    # slice: A = 0 contradicts lam1 != 0
    return abs(lam1) <= tol


def scan_minimal_candidates(lam_values=None, cs=(1, -1)) -> ScanResult:
    """Sweep lam1 and c, collecting biquadratic roots that survive the chain."""
    if lam_values is None:
        lam_values = np.linspace(0.05, 5.0, 400)
    found = []
    n_roots = 0
    samples = 0
    for c in cs:
        for lam1 in lam_values:
            samples += 1
            for nu2 in minimal_biquadratic(float(lam1), c).admissible:
                n_roots += 1
                if _survives(float(lam1), c, nu2):
                    found.append((float(lam1), c, nu2))
    return ScanResult(samples, n_roots, tuple(found))


def frame_components(sd, tol: float = 1e-6) -> tuple[float, float, float, float, float]:
    """(lam1, lam2, b1, b2, nu) of a surface's shape data at one point.

    b_i are the components of T along the G-orthonormal principal directions.
    """
    from .immersion import principal_frame

    if sd.n != 2:
        raise PreconditionError("surface identities need n = 2")
    lam, X = principal_frame(sd)
    if abs(lam[0] - lam[1]) <= tol:
        raise UmbilicError("umbilic point")
    b = X.T @ sd.G @ sd.T
    return float(lam[0]), float(lam[1]), float(b[0]), float(b[1]), sd.nu
