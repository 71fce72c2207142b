import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anchorlab.gdop import (
    DegeneratePlacementError,
    SingularityError,
    gdop_at_points,
    lvt_grid,
    multi_gdop,
    osap_map,
    pair_gdop,
    pair_gdop_matrix,
    region_score,
    trajectory_score,
)
from anchorlab.geometry import AnchorSet, Point2D, Region, Trajectory, distance

SQRT2 = math.sqrt(2.0)


def _pair(p, a, b):
    return pair_gdop(a, b, distance(p, a), distance(p, b))


def test_pair_gdop_examples():
    assert _pair(Point2D(0, 0), Point2D(0, 100), Point2D(100, 0)).value == pytest.approx(SQRT2)
    collinear = _pair(Point2D(50, 0), Point2D(0, 0), Point2D(100, 0))
    assert collinear.value == math.inf and collinear.degenerate
    assert _pair(Point2D(0, 0), Point2D(100, 0), Point2D(100, 100)).value == pytest.approx(2.0)


def test_pair_gdop_matrix_examples():
    assert pair_gdop_matrix(Point2D(0, 0), Point2D(0, 100), Point2D(100, 0)).value == pytest.approx(SQRT2)
    assert pair_gdop_matrix(Point2D(50, 0), Point2D(0, 0), Point2D(100, 0)).value == math.inf
    assert pair_gdop_matrix(Point2D(0, 0), Point2D(100, 0), Point2D(100, 100)).value == pytest.approx(2.0)


def test_pair_gdop_zero_range_raises():
    with pytest.raises(SingularityError):
        pair_gdop(Point2D(0, 0), Point2D(1, 0), 0.0, 1.0)


def test_cosine_and_matrix_forms_agree():
    # rounding in 1 - cos^2 grows like g^2 * eps; g > 1e3 counts as degenerate
    rng = np.random.default_rng(7)
    checked = 0
    while checked < 10_000:
        p, a, b = (Point2D(*xy) for xy in rng.uniform(-100, 100, (3, 2)))
        g5 = _pair(p, a, b)
        g8 = pair_gdop_matrix(p, a, b)
        if not (g5.is_finite and g8.is_finite) or g5.value > 1e3:
            continue
        assert g5.value == pytest.approx(g8.value, rel=1e-9)
        assert g5.value >= SQRT2 - 1e-12
        checked += 1


finite_xy = st.tuples(st.floats(-100, 100), st.floats(-100, 100))


@settings(max_examples=200)
@given(finite_xy, finite_xy, finite_xy, st.floats(0, 2 * math.pi), st.floats(0.01, 100),
       finite_xy)
def test_similarity_invariance(p, a, b, angle, scale, shift):
    pts = [Point2D(*p), Point2D(*a), Point2D(*b)]
    if min(distance(u, v) for u, v in itertools.combinations(pts, 2)) < 1.0:
        return
    base = _pair(*pts)
    if not base.is_finite or base.value > 1e3:
        return
    c, s = math.cos(angle), math.sin(angle)
    moved = [Point2D(scale * (c * q.x - s * q.y) + shift[0],
                     scale * (s * q.x + c * q.y) + shift[1]) for q in pts]
    assert _pair(*moved).value == pytest.approx(base.value, rel=1e-6)


@settings(max_examples=100)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_multi_gdop_is_brute_force_min(m, seed):
    rng = np.random.default_rng(seed)
    anchors = AnchorSet.from_points(rng.uniform(0, 100, (m, 2)))
    p = Point2D(*rng.uniform(0, 100, 2))
    best, best_pair = math.inf, None
    for i, j in itertools.combinations(range(m), 2):
        g = _pair(p, anchors.point(i), anchors.point(j)).value
        if g < best:
            best, best_pair = g, (i + 1, j + 1)
    got = multi_gdop(anchors, p)
    assert got.value == pytest.approx(best, rel=1e-12)
    if best_pair is not None:
        assert got.pair == best_pair


def test_multi_gdop_examples(ap1):
    assert multi_gdop(ap1, Point2D(50, 50)).value == pytest.approx(SQRT2)
    two = AnchorSet.from_points([(0, 100), (100, 0)])
    assert multi_gdop(two, Point2D(0, 0)).value == _pair(Point2D(0, 0), two.point(0), two.point(1)).value
    line = AnchorSet.from_points([(0, 0), (50, 0), (100, 0)])
    res = multi_gdop(line, Point2D(25, 0))
    assert res.value == math.inf and res.degenerate
    with pytest.raises(SingularityError):
        multi_gdop(ap1, Point2D(0, 0))


def test_lvt_ap1_range(ap1):
    grid = lvt_grid(ap1, Region.square(), 101, 101)
    lo, hi = grid.finite_range()
    assert lo >= SQRT2 - 1e-12
    assert hi <= 2.0 + 0.01
    # the three anchor corners are singular
    assert int(np.isinf(grid.values).sum()) == 3


def test_lvt_ap2_has_tall_peaks(ap2):
    grid = lvt_grid(ap2, Region.square(), 101, 101)
    assert grid.finite_range()[1] >= 8


def test_lvt_two_anchor_composition():
    two = AnchorSet.from_points([(0, 100), (100, 0)])
    region = Region(10, 20, 30, 40)
    grid = lvt_grid(two, region, 2, 2)
    for ix, x in enumerate(grid.xs):
        for iy, y in enumerate(grid.ys):
            direct = _pair(Point2D(x, y), two.point(0), two.point(1)).value
            assert grid.values[ix, iy] == direct


def test_region_score_matches_monte_carlo(ap1):
    rng = np.random.default_rng(2)
    pts = rng.uniform(0, 100, (1_000_000, 2))
    mc = gdop_at_points(ap1, pts).mean()
    assert region_score(ap1, Region.square()).value == pytest.approx(mc, rel=2e-3)


def test_region_score_far_pair_matches_monte_carlo():
    two = AnchorSet.from_points([(0, 0), (1, 1)])
    region = Region(40, 10, 50, 20)
    rng = np.random.default_rng(3)
    pts = rng.uniform([40, 10], [50, 20], (1_000_000, 2))
    mc = gdop_at_points(two, pts).mean()
    assert region_score(two, region).value == pytest.approx(mc, rel=1e-3)


def test_region_score_collinear_is_degenerate():
    line = AnchorSet.from_points([(0, 0), (50, 0), (100, 0)])
    with pytest.raises(DegeneratePlacementError):
        region_score(line, Region.square())
    with pytest.raises(DegeneratePlacementError):
        trajectory_score(line, Trajectory([(10, 10), (20, 20)]))


def test_trajectory_score_constant_path(ap1):
    p = Point2D(30, 60)
    t = Trajectory([(30, 60)] * 5 + [(30, 60.0000001)])
    assert trajectory_score(ap1, t).value == pytest.approx(multi_gdop(ap1, p).value, rel=1e-6)


def test_trajectory_score_skips_anchor_samples(ap1):
    t = Trajectory([(0, 0), (50, 50), (20, 30)])
    score = trajectory_score(ap1, t)
    assert score.skipped == 1
    assert math.isfinite(score.value)


def test_trajectory_score_reversal_invariant(ap2, ht):
    fwd = trajectory_score(ap2, ht).value
    assert trajectory_score(ap2, ht.reversed()).value == pytest.approx(fwd, rel=1e-12)


def test_region_and_trajectory_scores_close(ap1, ht):
    r = region_score(ap1, Region.square()).value
    t = trajectory_score(ap1, ht).value
    assert abs(r - t) / r < 0.01


def _brute_winner(anchors, p):
    vals = [_pair(p, anchors.point(i), anchors.point(j)).value for i, j in anchors.pairs()]
    order = sorted(vals)
    tie = len(order) > 1 and math.isclose(order[0], order[1], rel_tol=1e-9)
    return int(np.argmin(vals)), tie


def test_osap_three_regions_and_collinear_pairs_never_win(ap1):
    osap = osap_map(ap1, Region.square(), 41, 41)
    counts = osap.pair_counts()
    assert {k for k in counts if k >= 0} == {0, 1, 2}
    assert all(counts[k] > 0 for k in (0, 1, 2))
    # x axis (y=0) lies on the line through anchors 2 and 3
    assert np.all(osap.labels[1:-1, 0] != 2)
    # high-y cells over the midpoint of the (0,0)-(100,0) baseline
    xs, ys = Region.square().axes(41, 41)
    assert np.all(osap.labels[20, 30:] != 2)


def test_osap_reflection_symmetry(ap1):
    n = 41
    osap = osap_map(ap1, Region.square(), n, n)
    xs, ys = Region.square().axes(n, n)
    # reflecting across y = x swaps anchors 1 and 3: pair labels 0 <-> 2
    swap = {0: 2, 1: 1, 2: 0, -1: -1}
    compared = 0
    for ix in range(n):
        for iy in range(n):
            p = Point2D(xs[ix], ys[iy])
            if osap.labels[ix, iy] < 0:
                continue
            _, tie = _brute_winner(ap1, p)
            if tie:
                continue
            assert osap.labels[iy, ix] == swap[int(osap.labels[ix, iy])]
            compared += 1
    assert compared > n * n // 2


def test_osap_matches_brute_force(ap2):
    n = 21
    osap = osap_map(ap2, Region.square(), n, n)
    xs, ys = Region.square().axes(n, n)
    for ix in range(n):
        for iy in range(n):
            if osap.labels[ix, iy] < 0:
                continue
            winner, _ = _brute_winner(ap2, Point2D(xs[ix], ys[iy]))
            assert osap.labels[ix, iy] == winner


def test_osap_with_noise_is_seeded(ap1):
    from anchorlab.noise import NoiseModel

    noise = NoiseModel("gaussian", 1.0, seed=4)
    a = osap_map(ap1, Region.square(), 21, 21, noise=noise)
    b = osap_map(ap1, Region.square(), 21, 21, noise=noise)
    np.testing.assert_array_equal(a.labels, b.labels)
