from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpcgeom import jets
from cpcgeom.catalog import default_catalog, generic_graphs
from cpcgeom.chart import Chart, evaluate_jet2
from cpcgeom.errors import DomainError


def flat_chart(func, n=2):
    return Chart(func, n, 1, ((-1, 1),) * n, (0.0,) * n, name="test")


def test_linear_chart_has_zero_second_derivatives():
    ch = flat_chart(lambda u: [1.0, 2 * u[0] - u[1], 3 * u[1], u[0] + u[1]])
    j = evaluate_jet2(ch, [0.2, -0.4])
    assert np.all(j.d2 == 0.0)
    assert np.array_equal(j.d1[:, 1], [2.0, -1.0])


def test_mixed_quadratic():
    ch = flat_chart(lambda u: [1.0, u[0] * u[1], 0.0, 0.0])
    j = evaluate_jet2(ch, [0.3, 0.7])
    assert j.d2[0, 1, 1] == 1.0 and j.d2[1, 0, 1] == 1.0
    assert j.d2[0, 0, 1] == 0.0 and j.d2[1, 1, 1] == 0.0
    assert j.d1[0, 1] == 0.7 and j.d1[1, 1] == 0.3


def test_outside_domain():
    ch = flat_chart(lambda u: [1.0, u[0], u[1], 0.0])
    with pytest.raises(DomainError):
        evaluate_jet2(ch, [2.0, 0.0])


@pytest.mark.parametrize(
    "name, f, df, d2f, x",
    [
        ("sqrt", jets.sqrt, lambda x: 0.5 / math.sqrt(x), lambda x: -0.25 * x**-1.5, 1.7),
        ("sin", jets.sin, math.cos, lambda x: -math.sin(x), 0.4),
        ("cos", jets.cos, lambda x: -math.sin(x), lambda x: -math.cos(x), 0.4),
        ("tan", jets.tan, lambda x: 1 / math.cos(x) ** 2, lambda x: 2 * math.tan(x) / math.cos(x) ** 2, 0.4),
        ("sinh", jets.sinh, math.cosh, math.sinh, 0.9),
        ("cosh", jets.cosh, math.sinh, math.cosh, 0.9),
        ("exp", jets.exp, math.exp, math.exp, -0.3),
        ("log", jets.log, lambda x: 1 / x, lambda x: -1 / x**2, 2.5),
    ],
)
def test_elementary_derivatives(name, f, df, d2f, x):
    out = f(jets.Jet.variable(x, 0, 1))
    assert out.g[0] == pytest.approx(df(x), rel=1e-14)
    assert out.h[0, 0] == pytest.approx(d2f(x), rel=1e-14)


def test_elementary_functions_accept_floats():
    assert jets.sin(0.5) == pytest.approx(math.sin(0.5))


def test_arithmetic_rules():
    x = jets.Jet.variable(0.6, 0, 2)
    y = jets.Jet.variable(-1.3, 1, 2)
    z = (x * y - 2.0 / y + x**3) / (1 + x)
    eps = 1e-6

    def f(a, b):
        return (a * b - 2.0 / b + a**3) / (1 + a)

    g0 = (f(0.6 + eps, -1.3) - f(0.6 - eps, -1.3)) / (2 * eps)
    g1 = (f(0.6, -1.3 + eps) - f(0.6, -1.3 - eps)) / (2 * eps)
    assert z.v == pytest.approx(f(0.6, -1.3), rel=1e-15)
    assert z.g == pytest.approx([g0, g1], rel=1e-8)


def test_numpy_scalars_defer_to_jet():
    x = jets.Jet.variable(0.5, 0, 1)
    out = np.float64(2.0) * x
    assert isinstance(out, jets.Jet) and out.g[0] == 2.0


@pytest.mark.parametrize("entry", default_catalog(), ids=lambda e: e.name)
def test_second_derivatives_bit_symmetric(entry):
    for u in entry.grid((3,) * entry.n):
        j = evaluate_jet2(entry.chart, u)
        assert np.array_equal(j.d2, np.swapaxes(j.d2, 0, 1))


def sixth_order_gradient(f, u, h=1e-3):
    w = {1: 45 / 60, 2: -9 / 60, 3: 1 / 60}
    out = []
    for i in range(u.size):
        acc = 0.0
        for k, wk in w.items():
            e = np.zeros_like(u)
            e[i] = k * h
            acc = acc + wk * (f(u + e) - f(u - e))
        out.append(acc / h)
    return np.stack(out)


@pytest.mark.parametrize("chart", [e.chart for e in default_catalog()] + generic_graphs(), ids=lambda c: c.name)
def test_first_derivatives_match_finite_differences(chart):
    u = np.asarray(chart.base_point)
    j = evaluate_jet2(chart, u)
    fd = sixth_order_gradient(chart.point, u)
    assert np.max(np.abs(j.d1 - fd)) <= 1e-9


def test_fd_jet2_matches_exact_jet():
    ch = generic_graphs()[0]
    u = np.asarray(ch.base_point)
    exact = evaluate_jet2(ch, u)
    fd = jets.fd_jet2(ch.point, u)
    assert np.max(np.abs(exact.d1 - fd.d1)) <= 1e-10
    assert np.max(np.abs(exact.d2 - fd.d2)) <= 1e-6
    assert np.array_equal(fd.d2, np.swapaxes(fd.d2, 0, 1))


@settings(max_examples=40, deadline=None)
@given(
    st.floats(-1, 1),
    st.floats(-1, 1),
    st.floats(-1, 1),
    st.floats(-1, 1),
    st.floats(-0.2, 0.2),
    st.floats(-0.2, 0.2),
)
def test_chain_rule_under_affine_reparametrization(m00, m01, m10, m11, b0, b1):
    M = np.array([[1 + 0.3 * m00, 0.3 * m01], [0.3 * m10, 1 + 0.3 * m11]])
    b = np.array([b0, b1])
    chart = generic_graphs()[0]
    base = np.linalg.solve(M, np.asarray(chart.base_point) - b)
    rep = chart.reparametrize(M, b, tuple((x - 0.05, x + 0.05) for x in base), base_point=base)
    jr = evaluate_jet2(rep, base)
    j = evaluate_jet2(chart, M @ base + b)
    assert np.max(np.abs(jr.d1 - M.T @ j.d1)) <= 1e-10
    d2 = np.einsum("ai,bj,abk->ijk", M, M, j.d2)
    assert np.max(np.abs(jr.d2 - d2)) <= 1e-10
