from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpcgeom.ambient import model_residual
from cpcgeom.catalog import by_name, cylinder, rotational_cubic, rotational_horosphere, slice_entry
from cpcgeom.errors import FocalPointError, UsageError
from cpcgeom.immersion import shape_data
from cpcgeom.parallel import (
    MAX_ORDER,
    ParallelFamily,
    admissible_t_range,
    charpoly_from_power_sums,
    curvature_derivative,
    derivative_coefficients,
    isoparametric_cpc_test,
    model_parallel_curvature,
    parallel_immersion,
    parallel_normal,
    parallel_oracle_check,
    point_curvatures,
    power_sums,
    regularity_margins,
    roots_from_power_sums,
    transport_curvature,
    transport_curvature_T,
)


def test_family_at_zero_is_the_chart():
    e = rotational_horosphere(1.0, 2)
    f0 = parallel_immersion(e.chart, 0.0)
    for u in e.grid((3, 3)):
        assert np.max(np.abs(f0.point(u) - e.chart.point(u))) <= 1e-14


def test_normal_at_zero_is_eta():
    e = rotational_horosphere(1.0, 3)
    u = e.chart.base_point
    assert np.allclose(parallel_normal(e.chart, 0.0, u), shape_data(e.chart, u).eta, atol=1e-14)


def test_horosphere_cylinder_parallel_stays_on_model():
    e = cylinder(-1, 2, "horosphere")
    f1 = parallel_immersion(e.chart, 1.0, grid=e.grid((3, 3)))
    for u in e.grid((3, 3)):
        assert abs(model_residual(f1.point(u), -1)) <= 1e-10


def test_rotational_horosphere_regular_at_three():
    e = rotational_horosphere(1.0, 2)
    pc = point_curvatures(e.chart, e.chart.base_point)
    m, mT = regularity_margins(pc.lams, pc.lam_T, pc.tnorm, -1, 3.0)
    assert mT == pytest.approx(1.0, abs=1e-9)
    assert np.all(m > 0)
    parallel_immersion(e.chart, 3.0)


def test_focal_point_raises():
    e = by_name("cylinder_sphere(c=1,n=2,r=0.6)")
    with pytest.raises(FocalPointError) as info:
        parallel_immersion(e.chart, 1.0)
    assert info.value.t == 1.0


@pytest.mark.parametrize("c", [1, -1])
def test_transport_at_zero(c):
    assert transport_curvature(0.7, 0.4, c, 0.0) == 0.7
    assert transport_curvature_T(0.7, 0.0) == 0.7


@pytest.mark.parametrize("t", np.linspace(-2, 2, 9))
def test_horosphere_curvature_is_fixed(t):
    assert transport_curvature(-1.0, 1.0, -1, float(t)) == pytest.approx(-1.0, abs=1e-12)


@pytest.mark.parametrize("t", [-1.0, 0.0, 2.5])
def test_zero_t_curvature_is_fixed(t):
    assert transport_curvature_T(0.0, t) == 0.0


def test_t_curvature_example():
    assert transport_curvature_T(0.5, 1.0) == pytest.approx(1.0)


def test_t_curvature_focal():
    with pytest.raises(FocalPointError):
        transport_curvature_T(0.5, 2.0)


@pytest.mark.parametrize(
    "lam, c, s, expected",
    [(0.3, 1, 0.0, 0.3), (1.0, -1, 0.7, 1.0), (1.0, -1, -2.0, 1.0), (0.0, 1, math.pi / 4, 1.0)],
)
def test_model_parallel_curvature(lam, c, s, expected):
    assert model_parallel_curvature(lam, c, s) == pytest.approx(expected, abs=1e-12)


def test_coefficient_examples():
    assert derivative_coefficients(1).coeffs == {0: 1, 2: 1}
    t2 = derivative_coefficients(2)
    assert t2[1] == 2 and t2[3] == 2
    t3 = derivative_coefficients(3)
    assert (t3[0], t3[2], t3[4]) == (2, 8, 6)


@pytest.mark.parametrize("k", range(1, MAX_ORDER + 1))
def test_coefficient_parity_and_positivity(k):
    table = derivative_coefficients(k)
    assert table.parity_ok()
    assert all(isinstance(v, int) and v > 0 for v in table.coeffs.values())
    assert max(table.coeffs) == k + 1


def test_coefficient_order_limits():
    with pytest.raises(UsageError):
        derivative_coefficients(0)
    with pytest.raises(UsageError):
        derivative_coefficients(MAX_ORDER + 1)


@pytest.mark.parametrize(
    "lam, tnorm, c, k, expected",
    [(0.0, 1.0, 1, 1, 1.0), (1.0, 1.0, 1, 2, 4.0)],
)
def test_curvature_derivative_examples(lam, tnorm, c, k, expected):
    assert curvature_derivative(lam, tnorm, c, k) == pytest.approx(expected)


def mp_transport(lam, tnorm, c, t):
    x = tnorm * t
    C, S = (mpmath.cos(x), mpmath.sin(x)) if c == 1 else (mpmath.cosh(x), mpmath.sinh(x))
    return (c * tnorm * S + lam * C) / (C - lam * S / tnorm)


@settings(max_examples=30, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(0.1, 1.0), st.sampled_from([1, -1]), st.integers(1, 6))
def test_curvature_derivative_against_high_precision(lam, tnorm, c, k):
    with mpmath.workdps(40):
        ref = mpmath.diff(lambda t: mp_transport(mpmath.mpf(lam), mpmath.mpf(tnorm), c, t), 0, k)
    val = curvature_derivative(lam, tnorm, c, k)
    assert abs(val - float(ref)) <= 1e-9 * max(1.0, abs(float(ref)))


@settings(max_examples=30, deadline=None)
@given(st.floats(-1.0, 1.0), st.floats(0.1, 1.0), st.sampled_from([1, -1]), st.floats(-0.3, 0.3))
def test_transport_satisfies_riccati(lam, tnorm, c, t):
    h = 1e-5
    lt = transport_curvature(lam, tnorm, c, t)
    d = (transport_curvature(lam, tnorm, c, t + h) - transport_curvature(lam, tnorm, c, t - h)) / (2 * h)
    assert d == pytest.approx(c * tnorm**2 + lt**2, rel=1e-6, abs=1e-8)


def test_power_sum_examples():
    assert power_sums([0.0, 0.0, 0.0], 3) == [0.0, 0.0, 0.0]
    assert power_sums([1.0, 2.0], 2) == [3.0, 5.0]
    assert charpoly_from_power_sums([3.0, 5.0]) == pytest.approx([3.0, 2.0])
    assert charpoly_from_power_sums([0.0, 0.0, 0.0]) == [0.0, 0.0, 0.0]


@settings(max_examples=60)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=6))
def test_newton_round_trip(values):
    lam = np.sort(np.asarray(values))
    rec = roots_from_power_sums(power_sums(lam, lam.size))
    scale = max(1.0, float(np.max(np.abs(lam))))
    assert rec.shape == lam.shape
    assert abs(np.sum(rec) - np.sum(lam)) <= 1e-12 * lam.size * scale
    if lam.size == 1 or np.min(np.diff(lam)) > 0.3:
        assert np.max(np.abs(rec - lam)) <= 1e-9 * scale
    else:
        # a near-multiple cluster of size m is only determined to ~eps^(1/m)
        assert np.max(np.abs(rec - lam)) <= 1e-2 * scale


@pytest.mark.parametrize("values", [[2.0] * 5, [1.0] * 4, [-3.0, 0.5, 0.5, 0.5], [1.0, 1.0, 4.0, 4.0, 4.0, -2.0]])
def test_newton_multiple_roots(values):
    rec = roots_from_power_sums(power_sums(values, len(values)))
    assert np.max(np.abs(rec - np.sort(values))) <= 1e-9


def test_admissible_range_clips_at_focal_value():
    e = by_name("cylinder_sphere(c=1,n=2,r=0.6)")
    lo, hi, clipped = admissible_t_range(e.chart, e.grid(), (-2.0, 2.0))
    assert clipped and lo == -hi
    assert 0.5 < hi < 0.6 + 1e-6
    assert admissible_t_range(e.chart, e.grid(), (-0.2, 0.3)) == (-0.2, 0.3, False)


def test_family_build():
    e = rotational_horosphere(1.0, 2)
    fam = ParallelFamily.build(e.chart, e.grid(), [-0.5, 0.0, 0.5])
    assert not fam.clipped and set(fam.margins) == {-0.5, 0.0, 0.5}
    assert fam.at(0.5).name.endswith("[t=0.5]")


@pytest.mark.parametrize("name", ["rotational_horosphere(B=1,n=2)", "cylinder_horosphere(c=-1,n=2)"])
@pytest.mark.parametrize("t", [-0.4, 0.3])
def test_oracle_matches_numeric_parallel(name, t):
    e = by_name(name)
    r = parallel_oracle_check(e.chart, e.chart.base_point, t)
    assert r["spectrum_mismatch"] <= 1e-5
    assert r["metric_mismatch"] <= 1e-8


def test_t_curvature_cross_validated_numerically():
    e = rotational_cubic(2)
    u = e.chart.base_point
    pc = point_curvatures(e.chart, u)
    r = parallel_oracle_check(e.chart, u, 0.2)
    assert r["spectrum_mismatch"] <= 1e-6
    assert transport_curvature_T(pc.lam_T, 0.2) in r["predicted"]


def test_isoparametric_positive_instance():
    e = rotational_horosphere(1.0, 3)
    v = isoparametric_cpc_test(e.chart, e.grid(), [-0.5, 0.5])
    assert v.status == "ok"
    assert v.tnorm_spread <= 1e-8 and v.curvature_spread <= 1e-7
    assert v.tnorm_constant and v.curvatures_constant and v.implication_check


def test_isoparametric_negative_instance():
    e = rotational_cubic(2)
    v = isoparametric_cpc_test(e.chart, e.grid(), [-0.5, 0.5])
    assert v.tnorm_spread > 1e-3 and v.curvature_spread > 1e-3
    assert not v.tnorm_constant and not v.curvatures_constant and v.implication_check


def test_isoparametric_slice_is_trivial():
    e = slice_entry(1, 2)
    assert isoparametric_cpc_test(e.chart, e.grid(), [0.1]).status == "trivial"
