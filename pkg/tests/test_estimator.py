import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from supnorm_adapt.estimator import (
    Sample,
    cdf_estimate,
    estimate_density,
    project_function,
    project_measure,
    sup_distance_to_ecdf,
    total_mass,
)
from supnorm_adapt.piecewise import (
    DyadicPiecewisePoly,
    combine,
    evaluate,
    integral,
    sup_norm,
)
from supnorm_adapt.spline_kernel import bspline_series, kernel_row, projection_kernel

ORDERS = (1, 2, 3, 4)


def histogram_oracle(xs, j):
    counts = {}
    for x in xs:
        k = int(np.floor(x * 2 ** j))
        counts[k] = counts.get(k, 0) + 1
    return counts


# -- Sample ------------------------------------------------------------------


def test_sample_validation():
    with pytest.raises(ValueError):
        Sample([])
    with pytest.raises(ValueError):
        Sample([1.0, np.nan])
    s = Sample([3.0, 1.0, 2.0])
    assert list(s.xs) == [1.0, 2.0, 3.0] and s.n == 3
    assert s.ecdf(2.0) == 2 / 3 and s.ecdf(2.0, left=True) == 1 / 3


# -- projection --------------------------------------------------------------


def test_single_point_haar():
    d = project_measure(Sample([0.4]), [1.0], 0, projection_kernel(1)).density
    assert list(d.cells) == [0] and np.array_equal(d.coeffs, [[1.0]])


def test_haar_is_histogram(rng):
    k = projection_kernel(1)
    xs = rng.normal(size=3000)
    for j in (0, 3, 7):
        d = estimate_density(Sample(xs), j, k).density
        counts = histogram_oracle(xs, j)
        got = {int(c): v for c, v in zip(d.cells, d.coeffs[:, 0]) if v != 0}
        assert set(got) == set(counts)
        for c, v in got.items():
            assert v == np.ldexp(counts[c] * (1.0 / xs.size), j)


def test_knot_points_go_right():
    d = estimate_density(Sample([0.5, 0.5]), 1, projection_kernel(1)).density
    assert list(d.cells[d.coeffs[:, 0] != 0]) == [1]


@pytest.mark.parametrize("r", ORDERS)
def test_mass_is_one(r, rng):
    k = projection_kernel(r)
    for j in (0, 4, 9):
        d = estimate_density(Sample(rng.standard_t(3, 2000)), j, k)
        assert abs(total_mass(d) - 1.0) < 1e-8


@pytest.mark.parametrize("r", ORDERS)
def test_projection_is_sum_of_rows(r, rng):
    k = projection_kernel(r)
    xs = rng.uniform(-1, 1, 25)
    w = rng.normal(size=25)
    d = project_measure(Sample(xs), w, 3, k).density
    ref = combine([(wi, kernel_row(k, 3, x)) for wi, x in zip(w, np.sort(xs))])
    y = rng.uniform(-2, 2, 500)
    assert np.max(np.abs(evaluate(d, y) - evaluate(ref, y))) < 1e-11


@pytest.mark.parametrize("r", ORDERS)
def test_linearity(r, rng):
    k = projection_kernel(r)
    s = Sample(rng.normal(size=200))
    w, v = rng.normal(size=(2, 200))
    a = project_measure(s, w + v, 4, k).density
    b = combine([(1.0, project_measure(s, w, 4, k).density),
                 (1.0, project_measure(s, v, 4, k).density)])
    assert sup_norm(a - b) < 1e-12 * (1 + sup_norm(a))


def test_weight_length_mismatch():
    with pytest.raises(ValueError):
        project_measure(Sample([0.1, 0.2]), [1.0], 0, projection_kernel(1))


@pytest.mark.parametrize("r", ORDERS)
def test_projection_idempotent(r, rng):
    k = projection_kernel(r)
    j = 2
    f = bspline_series(j, r, -3, rng.normal(size=8), scale=1.0)
    assert sup_norm(project_function(f, j, k) - f) < 1e-7


def test_haar_nesting(rng):
    k = projection_kernel(1)
    s = Sample(rng.normal(size=1000))
    fine = estimate_density(s, 6, k).density
    for jj in (2, 4, 6):
        direct = estimate_density(s, jj, k).density
        assert sup_norm(project_function(fine, jj, k) - direct) < 1e-8


@pytest.mark.parametrize("r", ORDERS)
def test_operator_norm_bound(r, rng):
    k = projection_kernel(r)
    for _ in range(5):
        f = DyadicPiecewisePoly.contiguous(5, -10, rng.normal(size=(20, r)))
        assert sup_norm(project_function(f, 2, k)) <= k.op_norm_bound * sup_norm(f) + 1e-9


# -- CDF ---------------------------------------------------------------------


def test_cdf_single_point():
    c = cdf_estimate(estimate_density(Sample([0.4]), 0, projection_kernel(1)))
    assert c(0.5) == 0.5
    assert sup_distance_to_ecdf(c, Sample([0.4])) == 0.6


def test_cdf_haar_at_knots(rng):
    k = projection_kernel(1)
    xs = rng.uniform(0, 1, 500)
    c = cdf_estimate(estimate_density(Sample(xs), 4, k))
    knots = np.arange(-2, 20) / 16
    assert np.allclose(c(knots), [(xs < t).mean() for t in knots], atol=1e-15)


@pytest.mark.parametrize("r", ORDERS)
def test_cdf_total_mass(r, rng):
    c = cdf_estimate(estimate_density(Sample(rng.normal(size=300)), 5, projection_kernel(r)))
    assert abs(c.total_mass - 1.0) < 1e-9
    assert c(-1e6) == 0.0 and c(1e6) == c.total_mass


@pytest.mark.parametrize("r", ORDERS)
def test_ecdf_distance_against_dense_grid(r, rng):
    k = projection_kernel(r)
    for n, j in ((5, 1), (40, 3), (200, 2)):
        s = Sample(rng.normal(size=n))
        c = cdf_estimate(estimate_density(s, j, k))
        got = sup_distance_to_ecdf(c, s)
        lo, hi = s.xs[0] - 30 * 2.0 ** -j, s.xs[-1] + 30 * 2.0 ** -j
        grid = np.linspace(lo, hi, 1_000_001)
        pts = np.concatenate([grid, s.xs])
        F = c(pts)
        dense = max(np.abs(F - s.ecdf(pts)).max(), np.abs(F - s.ecdf(pts, left=True)).max())
        assert got >= dense - 1e-12
        assert got - dense < 1e-9 + 2 * (hi - lo) / 1e6 * sup_norm(c.density)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=30), st.integers(0, 6),
       st.integers(1, 4))
def test_ecdf_distance_positive(xs, j, r):
    s = Sample(xs)
    c = cdf_estimate(estimate_density(s, j, projection_kernel(r)))
    assert sup_distance_to_ecdf(c, s) > 0
