import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from omniap.construction import OmniSet, build_diamond_set, build_omni_set
from omniap.covering import (
    analytic_cover_bound,
    ball_cover_count,
    cover_bracket,
    cover_count_segment,
    n_of,
    n_plus,
    packing_lower,
    packing_subset,
)
from omniap.geometry import Ball, clip_segment_to_ball

from oracles import greedy_interval_cover, max_separated_on_segment


@pytest.mark.parametrize("length, r, want", [(0.5, 0.125, 4), (0.5, 0.3, 2), (0.0, 0.7, 1), (1.0, 1.0, 1)])
def test_cover_count_segment_examples(length, r, want):
    assert cover_count_segment(length, r) == want


@given(st.integers(1, 10 ** 6), st.integers(1, 10 ** 6))
def test_cover_count_matches_exact_oracles(a, b):
    length, r = Fraction(a, 997), Fraction(b, 991)
    if not Fraction(1, 10) <= length / r <= 100:
        return
    # dyadic-free rationals are not exact floats; use the float values as the ground truth
    lf, rf = float(length), float(r)
    L, R = Fraction(lf), Fraction(rf)
    n = cover_count_segment(lf, rf)
    assert n == greedy_interval_cover(L, R)
    packed = max_separated_on_segment(L, R)
    if packed is not None:
        assert n == packed


@pytest.mark.parametrize("r, want", [(0.5, 3), (2.0, 1), (1.0, 2)])
def test_packing_lower_examples(r, want):
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    assert packing_lower(pts, r) == want


def exhaustive_max_packing(pts, r):
    n = len(pts)
    for size in range(n, 0, -1):
        for sub in itertools.combinations(range(n), size):
            if all(np.linalg.norm(pts[i] - pts[j]) > r for i, j in itertools.combinations(sub, 2)):
                return size
    return 0


@given(st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=1, max_size=9), st.floats(0.05, 1.0))
def test_packing_subset_is_separated_and_bounded(points, r):
    pts = np.array(points)
    idx = packing_subset(pts, r)
    sub = pts[idx]
    for p, q in itertools.combinations(sub, 2):
        assert np.linalg.norm(p - q) > r
    assert len(idx) <= exhaustive_max_packing(pts, r)
    # maximal: every point is within r of the subset
    for p in pts:
        assert np.min(np.linalg.norm(sub - p, axis=1)) <= r


@pytest.mark.parametrize("R, want", [(0.3, 1), (1.0, 0), (2.0, -1), (0.5, 1), (0.25, 2)])
def test_n_of_examples(R, want):
    assert n_of(R) == want


def test_n_plus():
    assert n_plus(2.0) == 0 and n_plus(0.3) == 1


@given(st.floats(1e-300, 1e300, allow_subnormal=False))
def test_n_of_brackets(R):
    n = n_of(R)
    assert math.ldexp(1.0, -(n + 1)) < R <= math.ldexp(1.0, -n)


@pytest.mark.parametrize("R, r, want", [(0.5, 1 / 16, 9.0), (2.0, 1.0, 2.0)])
def test_analytic_bound_examples(R, r, want):
    assert analytic_cover_bound(R, r) == want


def test_analytic_bound_ratio_sweep():
    for n in range(0, 30):
        R = math.ldexp(1.0, -n)
        for rho in (2, 3, 16, 64, 256, 1000):
            assert analytic_cover_bound(R, R / rho) / rho <= 3


def single_segment():
    return OmniSet(2, 1, 0, includes_origin=False)


def test_bracket_single_segment_inside():
    b = cover_bracket(single_segment(), Ball(np.array([1.0, 0.0]), 0.3), 1 / 8)
    assert (b.lower, b.upper) == (4, 4)


def test_bracket_origin_only():
    K = build_omni_set(2, 8)
    b = cover_bracket(K, Ball(np.zeros(2), 1e-4), 1e-5)
    assert (b.lower, b.upper) == (1, 1)


def test_bracket_disjoint_ball_rejected():
    with pytest.raises(ValueError, match="does not meet"):
        cover_bracket(single_segment(), Ball(np.array([5.0, 5.0]), 0.1), 0.01)


def test_bracket_depth_eight():
    b = cover_bracket(build_omni_set(2, 8), Ball(np.zeros(2), 1.0), 1 / 64)
    assert b.lower >= 32
    assert (b.lower, b.upper) == (48, 50)


@given(st.floats(0.7, 1.3), st.floats(-0.3, 0.3), st.floats(0.01, 0.5), st.floats(0.002, 0.2))
def test_bracket_exact_on_single_segment(x, y, radius, r):
    K = single_segment()
    ball = Ball(np.array([x, y]), radius)
    seg = clip_segment_to_ball(K.piece(0), ball)
    if seg is None:
        return
    b = cover_bracket(K, ball, r)
    want = cover_count_segment(min(seg.length, 2 * radius), r)
    assert b.lower == b.upper == want


@pytest.mark.parametrize("K", [build_omni_set(2, 10), build_diamond_set(2, 2, 4)], ids=["segments", "diamonds"])
def test_bracket_monotone_in_r_and_ball(K):
    c = np.array([0.3, 0.05])
    uppers, lowers = [], []
    for r in (1 / 256, 1 / 128, 1 / 64, 1 / 32):
        b = cover_bracket(K, Ball(c, 0.5), r)
        assert b.lower <= b.upper
        uppers.append(b.upper)
        lowers.append(b.lower)
    assert uppers == sorted(uppers, reverse=True)
    assert lowers == sorted(lowers, reverse=True)
    small = cover_bracket(K, Ball(c, 0.25), 1 / 64)
    big = cover_bracket(K, Ball(c, 0.5), 1 / 64)
    assert small.upper <= big.upper


def test_ball_cover_count():
    assert ball_cover_count(0.1, 0.5, 2) == 1
    assert ball_cover_count(1.0, 1.0, 2) == math.ceil(2 * math.sqrt(2)) ** 2


def test_analytic_consistency_sweep_small():
    K = build_omni_set(2, 12)
    for n in range(0, 7):
        R = math.ldexp(1.0, -n)
        for rho in (16, 64):
            b = cover_bracket(K, Ball(np.zeros(2), R), R / rho)
            assert b.upper <= 3 * rho + 2
