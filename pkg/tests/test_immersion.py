from __future__ import annotations

import math

import numpy as np
import pytest

from cpcgeom import jets
from cpcgeom.catalog import by_name, cylinder, default_catalog, generic_graphs, rotational_horosphere, slice_entry
from cpcgeom.chart import Chart
from cpcgeom.errors import ConstraintError, InapplicableError, RegularityError
from cpcgeom.immersion import (
    ResidualReport,
    adapted_frame,
    inclusion_weingarten_check,
    principal_curvatures,
    principal_frame,
    sample_grid,
    shape_data,
    structure_residuals,
    t_direction_residuals,
    t_principal_angle,
)

CATALOG = default_catalog()


def ids(e):
    return e.name


@pytest.mark.parametrize("c, n", [(1, 2), (-1, 3)])
def test_slice_is_totally_geodesic(c, n):
    e = slice_entry(c, n, 0.4)
    sd = shape_data(e.chart, e.chart.base_point)
    assert np.max(np.abs(sd.A)) <= 1e-12
    assert sd.Tnorm <= 1e-12 and abs(abs(sd.nu) - 1) <= 1e-12


@pytest.mark.parametrize("c, n, base", [(1, 3, "sphere"), (-1, 2, "horosphere"), (-1, 2, "equidistant")])
def test_cylinder_vertical_curvature_vanishes(c, n, base):
    e = cylinder(c, n, base)
    sd = shape_data(e.chart, e.chart.base_point)
    assert abs(sd.nu) <= 1e-12
    T = sd.T / sd.Tnorm
    assert float(T @ sd.h @ T) == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(sd.A @ T, 0.0, atol=1e-12)


@pytest.mark.parametrize("n", [2, 4])
def test_rotational_horosphere_curvatures(n):
    e = rotational_horosphere(1.0, n)
    lam = principal_curvatures(shape_data(e.chart, e.chart.base_point))
    k = 1 / math.sqrt(2)
    nonzero = lam[np.abs(lam) > 1e-6]
    assert np.sum(np.abs(lam) <= 1e-9) == 1
    assert nonzero.size == n - 1
    assert np.allclose(np.abs(nonzero), k, atol=1e-9)
    assert np.all(np.sign(nonzero) == np.sign(nonzero[0]))


@pytest.mark.parametrize("entry", CATALOG, ids=ids)
def test_invariants_on_catalog(entry):
    for u in entry.grid():
        r = shape_data(entry.chart, u).invariant_residuals()
        assert r["unit_relation"] <= 1e-10
        assert r["self_adjoint"] <= 1e-9
        assert max(r.values()) <= 1e-9


@pytest.mark.parametrize("chart", generic_graphs(), ids=lambda c: c.name)
def test_invariants_on_generic_graphs(chart):
    for u in sample_grid(chart, 3, margin=0.05):
        assert max(shape_data(chart, u).invariant_residuals().values()) <= 1e-9


@pytest.mark.parametrize("chart", [e.chart for e in CATALOG[::3]] + generic_graphs(), ids=lambda c: c.name)
def test_orientation_flip_is_exactly_antisymmetric(chart):
    u = chart.base_point
    a = shape_data(chart, u)
    b = shape_data(chart, u, flip=True)
    assert np.array_equal(b.A, -a.A)
    assert np.array_equal(b.eta, -a.eta)
    assert b.nu == -a.nu
    assert np.array_equal(b.T, a.T)


def test_principal_frame_is_orthonormal():
    chart = generic_graphs()[1]
    sd = shape_data(chart, chart.base_point)
    lam, X = principal_frame(sd)
    assert np.all(np.diff(lam) <= 0)
    assert np.allclose(X.T @ sd.G @ X, np.eye(sd.n), atol=1e-12)
    assert np.allclose(sd.A @ X, X * lam, atol=1e-12)


def test_degenerate_metric_raises():
    def func(u):
        # depends on u only through u0 + u1, so the rank drops
        s = u[0] + u[1]
        return [jets.cos(s), jets.sin(s), 0.0 * s, 0.0 * s]

    ch = Chart(func, 2, 1, ((-0.5, 0.5),) * 2, (0.0, 0.0), name="degenerate")
    with pytest.raises(RegularityError):
        shape_data(ch, (0.1, 0.1))


def test_point_off_model_raises():
    ch = Chart(lambda u: [2.0 + 0 * u[0], u[0], u[1], 0.0], 2, 1, ((-0.5, 0.5),) * 2, (0.0, 0.0), name="off")
    with pytest.raises(ConstraintError):
        shape_data(ch, (0.1, 0.1))


def test_inclusion_weingarten_on_slice():
    e = slice_entry(1, 2)
    r = inclusion_weingarten_check(e.chart, e.chart.base_point)
    assert r["A_xi_T"] == 0.0 and r["A_xi_perp"] <= 1e-12


@pytest.mark.parametrize("entry", CATALOG, ids=ids)
def test_inclusion_weingarten_on_catalog(entry):
    for u in entry.grid((3,) * entry.n):
        assert inclusion_weingarten_check(entry.chart, u).max() <= 1e-8


def test_flipped_xi_is_flagged():
    e = by_name("rotational_horosphere(B=1,n=2)")
    r = inclusion_weingarten_check(e.chart, e.chart.base_point, xi_sign=-1.0)
    assert r["A_xi_perp"] > 1.0
    assert "A_xi_perp" in r.flagged(1e-8)


def test_slice_structure_residuals_vanish():
    e = slice_entry(-1, 3)
    assert structure_residuals(e.chart, e.chart.base_point).max() <= 1e-10


def test_codazzi_on_rotational_horosphere():
    e = rotational_horosphere(1.0, 2)
    assert structure_residuals(e.chart, e.chart.base_point)["codazzi"] <= 1e-6


@pytest.mark.parametrize("chart", generic_graphs(), ids=lambda c: c.name)
def test_gauss_on_generic_graphs(chart):
    r = structure_residuals(chart, chart.base_point)
    assert r["gauss"] <= 1e-6
    assert r.max() <= 1e-6


def test_generic_graph_is_not_special():
    # the graph family must exercise the full equations, not a trivial case
    chart = generic_graphs()[0]
    sd = shape_data(chart, chart.base_point)
    lam = principal_curvatures(sd)
    assert 0.05 < abs(sd.nu) < 0.999 and abs(lam[0] - lam[1]) > 1e-3


def test_structure_residuals_named():
    chart = generic_graphs()[0]
    r = structure_residuals(chart, chart.base_point)
    expected = {"nabla_T", "d_nu", "gauss", "codazzi", "xi_ambient", "xi_perp", "eta_perp"}
    assert expected <= set(r.residuals)


@pytest.mark.parametrize("base", ["sphere", "horosphere"])
def test_t_direction_on_cylinder(base):
    e = cylinder(1 if base == "sphere" else -1, 3, base)
    assert t_direction_residuals(e.chart, e.chart.base_point).max() <= 1e-8


def test_t_direction_on_rotational_horosphere():
    e = rotational_horosphere(1.0, 3)
    r = t_direction_residuals(e.chart, e.chart.base_point)
    assert r["nu"] <= 1e-8
    assert r.max() <= 1e-6


def test_t_direction_inapplicable_on_slice():
    e = slice_entry(1, 2)
    with pytest.raises(InapplicableError):
        t_direction_residuals(e.chart, e.chart.base_point)
    with pytest.raises(InapplicableError):
        t_principal_angle(shape_data(e.chart, e.chart.base_point))


def test_adapted_frame_puts_t_last():
    e = rotational_horosphere(2.0, 4)
    sd = shape_data(e.chart, e.chart.base_point)
    lam, X = adapted_frame(sd)
    assert np.allclose(X[:, -1], sd.T / sd.Tnorm)
    assert lam[-1] == pytest.approx(0.0, abs=1e-10)
    assert np.allclose(X.T @ sd.G @ X, np.eye(4), atol=1e-10)


def test_adapted_frame_rejects_non_principal_t():
    chart = generic_graphs()[0]
    with pytest.raises(InapplicableError):
        adapted_frame(shape_data(chart, chart.base_point))


def test_residual_report_helpers():
    a = ResidualReport({"x": 1e-3, "y": 1e-12})
    b = ResidualReport({"x": 1e-5, "z": 2.0})
    m = a.merge(b)
    assert m.residuals == {"x": 1e-3, "y": 1e-12, "z": 2.0}
    assert m.max() == 2.0
    assert m.flagged(1e-6) == ["x", "z"]
    assert ResidualReport({"nan": float("nan")}).flagged(1.0) == ["nan"]
