import numpy as np
import pytest

from supnorm_adapt.estimator import Sample, project_measure
from supnorm_adapt.piecewise import sup_norm
from supnorm_adapt.rademacher import (
    LevelEngine,
    RademacherDraw,
    all_sign_vectors,
    cond_expect_sup,
    draw_signs,
    pair_sup,
    rademacher_sup,
    threshold_stats,
)
from supnorm_adapt.spline_kernel import projection_kernel

ORDERS = (1, 2, 3, 4)


def test_draw_validation():
    with pytest.raises(ValueError):
        RademacherDraw(np.array([1.0, 0.0]), ())
    d = draw_signs(50, 1, "x")
    assert set(np.unique(d.signs)) <= {-1.0, 1.0}


def test_draw_determinism():
    a = draw_signs(100, 7, "run", 3)
    b = draw_signs(100, 7, "run", 3)
    c = draw_signs(100, 7, "run", 4)
    assert np.array_equal(a.signs, b.signs)
    assert not np.array_equal(a.signs, c.signs)


def test_all_sign_vectors():
    v = all_sign_vectors(3)
    assert v.shape == (8, 3)
    assert len({tuple(r) for r in v}) == 8


def test_single_point_haar():
    s = Sample([0.3])
    for sign in (1.0, -1.0):
        assert rademacher_sup(s, RademacherDraw(np.array([sign]), ()), 0, projection_kernel(1)) == 2.0


@pytest.mark.parametrize("r", ORDERS)
def test_global_flip(r, rng):
    s = Sample(rng.normal(size=300))
    d = draw_signs(300, 2)
    flipped = RademacherDraw(-d.signs, ())
    k = projection_kernel(r)
    assert rademacher_sup(s, d, 4, k) == rademacher_sup(s, flipped, 4, k)
    assert pair_sup(s, d, 3, 5, k) == pair_sup(s, flipped, 3, 5, k)


def test_haar_counting_oracle(rng):
    xs = rng.uniform(-2, 2, 1000)
    d = draw_signs(1000, 11)
    s = Sample(xs)
    eps = d.signs
    for j in (1, 3, 6):
        cells = np.floor(s.xs * 2 ** j).astype(int)
        sums = {}
        for c, e in zip(cells, eps):
            sums[c] = sums.get(c, 0.0) + e
        ref = 2 * 2 ** j * max(abs(v) for v in sums.values()) / 1000
        assert abs(rademacher_sup(s, d, j, projection_kernel(1)) - ref) < 1e-15


@pytest.mark.parametrize("r", ORDERS)
def test_rademacher_matches_projection(r, rng):
    s = Sample(rng.normal(size=200))
    d = draw_signs(200, 3)
    k = projection_kernel(r)
    ref = 2 * sup_norm(project_measure(s, d.signs / 200, 4, k).density)
    assert abs(rademacher_sup(s, d, 4, k) - ref) < 1e-13


@pytest.mark.parametrize("r", ORDERS)
def test_pair_sup_matches_projection_difference(r, rng):
    s = Sample(rng.normal(size=200))
    d = draw_signs(200, 4)
    k = projection_kernel(r)
    a = project_measure(s, d.signs / 200, 2, k).density
    b = project_measure(s, d.signs / 200, 5, k).density
    assert abs(pair_sup(s, d, 2, 5, k) - 2 * sup_norm(a - b)) < 1e-12


def test_pair_sup_rejects_bad_levels(rng):
    s = Sample(rng.normal(size=10))
    d = draw_signs(10, 1)
    with pytest.raises(ValueError):
        pair_sup(s, d, 3, 3, projection_kernel(1))
    with pytest.raises(ValueError):
        pair_sup(s, d, 4, 3, projection_kernel(1))


def test_pair_sup_two_point_cancellation():
    # both points in one level-1 cell but different level-3 cells
    s = Sample([0.05, 0.3])
    d = RademacherDraw(np.array([1.0, -1.0]), ())
    k = projection_kernel(1)
    assert rademacher_sup(s, d, 1, k) == 0.0
    assert pair_sup(s, d, 1, 3, k) == rademacher_sup(s, d, 3, k)


@pytest.mark.parametrize("r", ORDERS)
def test_triangle_per_draw(r, rng):
    s = Sample(rng.normal(size=400))
    signs = draw_signs(400, 5, m=300).signs
    eng = LevelEngine(s, [2, 4, 6], projection_kernel(r))
    R, T = eng.sups(signs / 400)
    for (j, l), t in T.items():
        assert np.all(t <= (R[j] + R[l]) * (1 + 1e-12))


def test_monotone_haar_per_draw(rng):
    s = Sample(rng.normal(size=400))
    signs = draw_signs(400, 6, m=300).signs
    eng = LevelEngine(s, [2, 3, 5], projection_kernel(1))
    R, _ = eng.sups(signs / 400, pairs=[])
    assert np.all(R[2] <= R[3] * (1 + 1e-12)) and np.all(R[3] <= R[5] * (1 + 1e-12))


@pytest.mark.parametrize("r", (2, 3, 4))
def test_monotone_with_operator_bound(r, rng):
    s = Sample(rng.normal(size=300))
    k = projection_kernel(r)
    eng = LevelEngine(s, [2, 5], k)
    R, _ = eng.sups(draw_signs(300, 8, m=200).signs / 300, pairs=[])
    assert np.all(R[2] <= k.op_norm_bound * R[5])
    lo = cond_expect_sup(s, 200, 8, 2, kernel=k).mean
    hi = cond_expect_sup(s, 200, 8, 5, kernel=k).mean
    assert lo <= k.op_norm_bound * hi


def test_scale_doubles(rng):
    s = Sample(rng.normal(size=100))
    w = draw_signs(100, 9).signs / 100
    eng = LevelEngine(s, [3], projection_kernel(2))
    a, _ = eng.sups(w, pairs=[])
    b, _ = eng.sups(2 * w, pairs=[])
    assert b[3] == 2 * a[3]


def test_expected_single_point_exact():
    e = cond_expect_sup(Sample([0.4]), 1, 0, 0, kernel=projection_kernel(1), exact=True)
    assert e.mean == 2.0 and e.stderr == 0.0 and e.exact and e.m_draws == 2


def test_monte_carlo_matches_enumeration(rng):
    s = Sample(rng.uniform(0, 1, 10))
    k = projection_kernel(1)
    exact = cond_expect_sup(s, 1, 0, 2, kernel=k, exact=True)
    mc = cond_expect_sup(s, 100_000, 123, 2, kernel=k)
    assert abs(mc.mean - exact.mean) <= 3 * mc.stderr


def test_expected_pair(rng):
    s = Sample(rng.uniform(0, 1, 8))
    k = projection_kernel(2)
    e = cond_expect_sup(s, 1, 0, 1, 3, kernel=k, exact=True)
    signs = all_sign_vectors(8)
    vals = [pair_sup(s, RademacherDraw(v, ()), 1, 3, k) for v in signs]
    assert abs(e.mean - np.mean(vals)) < 1e-14


def test_enumeration_limit():
    with pytest.raises(ValueError):
        all_sign_vectors(21)


def test_threshold_stats_determinism(rng):
    s = Sample(rng.normal(size=500))
    eng = LevelEngine(s, [2, 3, 4], projection_kernel(1))
    a = threshold_stats(eng, draw_signs(500, 1, m=20).signs)
    b = threshold_stats(eng, draw_signs(500, 1, m=20).signs)
    assert a == b
    assert a.pair(3, 3) == 0.0 and all(v >= 0 for v in a.R.values())
    assert a.m_draws == 20 and all(v > 0 for v in a.T_se.values())
