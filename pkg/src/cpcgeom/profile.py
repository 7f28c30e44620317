"""Height profiles a(s) of rotational-type hypersurfaces h_s(x) + a(s) d/dt."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import jets
from .errors import DomainError, ParameterError
from .parallel import model_parallel_curvature


@dataclass(frozen=True)
class ProfileFunction:
    """A profile with analytic derivatives up to order 3.

    ``func`` accepts floats or jets (it is composed into charts);
    ``derivs(s)`` returns ``(a, a', a'', a''')`` as floats.
    """

    func: Callable
    derivs: Callable[[float], tuple[float, float, float, float]]
    domain: tuple[float, float]
    kind: str = "custom"
    params: tuple = ()

    def __post_init__(self):
        lo, hi = self.domain
        if not lo < hi:
            raise ParameterError(f"empty profile domain {self.domain}")
        for s in np.linspace(lo, hi, 9)[1:-1]:
            if not self.derivs(float(s))[1] > 0:
                raise ParameterError(f"profile {self.kind} must have a' > 0 on its domain (fails at s={s:g})")

    def contains(self, s: float) -> bool:
        lo, hi = self.domain
        return lo < s < hi if self.kind == "lemma" else lo <= s <= hi

    def __call__(self, s):
        return self.func(s)

    def at(self, s: float) -> tuple[float, float, float, float]:
        s = float(s)
        if not self.contains(s):
            raise DomainError(f"s={s:g} outside profile domain {self.domain}")
        return self.derivs(s)


def affine_profile(B: float, domain=(-5.0, 5.0)) -> ProfileFunction:
    if not B > 0:
        raise ParameterError(f"affine profile needs B > 0, got {B}")
    B = float(B)
    return ProfileFunction(lambda s: B * s, lambda s: (B * s, B, 0.0, 0.0), tuple(domain), "affine", (B,))


def cubic_profile(k: float = 0.2, domain=(-1.0, 1.0)) -> ProfileFunction:
    """a(s) = s + k s^3, a non-solution of the profile ODE."""
    k = float(k)
    return ProfileFunction(
        lambda s: s + k * s * s * s,
        lambda s: (s + k * s**3, 1 + 3 * k * s**2, 6 * k * s, 6 * k),
        tuple(domain),
        "cubic",
        (k,),
    )


def lemma_solution(c1: float, c2: float, c3: float) -> ProfileFunction:
    """a(s) = -sqrt(1 - (c1 s + c2)^2)/c1 + c3 on {0 < c1 s + c2 < 1}."""
    c1, c2, c3 = float(c1), float(c2), float(c3)
    if c1 == 0.0:
        raise ParameterError("c1 must be nonzero")
    ends = sorted(((0.0 - c2) / c1, (1.0 - c2) / c1))

    def func(s):
        w = c1 * s + c2
        return -jets.sqrt(1 - w * w) / c1 + c3

    def derivs(s):
        w = c1 * s + c2
        q = 1.0 - w * w
        if not q > 0:
            raise DomainError(f"s={s:g} outside the lemma domain")
        r = math.sqrt(q)
        return (-r / c1 + c3, w / r, c1 / (q * r), 3 * c1 * c1 * w / (q * q * r))

    return ProfileFunction(func, derivs, (ends[0], ends[1]), "lemma", (c1, c2, c3))


def ode_residual(a: ProfileFunction, s: float) -> float:
    """a'''(1 + a'^2) - 3 a''^2 a'."""
    _, a1, a2, a3 = a.at(s)
    return a3 * (1 + a1 * a1) - 3 * a2 * a2 * a1


def ode_residual_scale(a: ProfileFunction, s: float) -> float:
    """Magnitude of the two ODE terms, floored at 1.

    Near the ends of a lemma domain both terms blow up, and rounding in the
    residual grows with them; divide by this to get a relative residual.
    """
    _, a1, a2, a3 = a.at(s)
    return max(1.0, abs(a3 * (1 + a1 * a1)), abs(3 * a2 * a2 * a1))


def _b(a1: float) -> float:
    return math.sqrt(1 + a1 * a1)


def rotational_curvatures(a: ProfileFunction, lambda_base: float, c: int, s: float) -> tuple[float, float]:
    """Curvatures of h_s(x) + a(s) d/dt along h_s and along T.

    ``lambda_base`` is a principal curvature of the initial leaf h_0; the leaf
    h_s is its parallel hypersurface at distance s.  Returns
    ``(-(a'/b) lambda^s, a''/b^3)`` with b = sqrt(1 + a'^2).
    """
    _, a1, a2, _ = a.at(s)
    b = _b(a1)
    lam_s = model_parallel_curvature(lambda_base, c, s)
    return -(a1 / b) * lam_s, a2 / b**3


def mu_T_derivative(a: ProfileFunction, s: float) -> float:
    """Closed-form d/ds of a''/b^3, namely (a''' b - 3 a'' b')/b^4."""
    _, a1, a2, a3 = a.at(s)
    b = _b(a1)
    db = a1 * a2 / b
    return (a3 * b - 3 * a2 * db) / b**4


def case_constraints(a: ProfileFunction, lambda_s: float, c: int, s: float) -> tuple[float, float]:
    """Residuals (r2, r3) of the constancy conditions for mu_i and mu_T in s."""
    _, a1, a2, _ = a.at(s)
    r2 = a2 * lambda_s + a1 * (1 + a1 * a1) * (c + lambda_s * lambda_s)
    return r2, ode_residual(a, s)


def lemma_constraint(c1: float, c2: float, lambda_s: float, c: int, s: float) -> float:
    """c1 lambda^s + (c1 s + c2)(c + (lambda^s)^2), the reduced form of r2 for lemma profiles."""
    return c1 * lambda_s + (c1 * s + c2) * (c + lambda_s * lambda_s)
