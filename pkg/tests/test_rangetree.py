import math
import random
from fractions import Fraction

import numpy as np
import pytest

from emanet.geom import ConeId, Frame, Point, cone_of
from emanet.rangetree import (ConeIndex, ExactOrder, FrameKeys, MinRangeTree, build_index, dense_first_in_cone,
                              query_first_in_cone, scan_first_in_cone)
from emanet.seg import select_top_neighbor

CONES = list(ConeId)
UPPER = [c for c in ConeId if c not in (ConeId.C_r1b1, ConeId.C_b2r5)]


def keys_for(fx, fy):
    return FrameKeys(np.asarray(fx), np.asarray(fy), np.arange(len(fx)))


def grid_points(rng, n, span):
    pts = set()
    while len(pts) < n:
        pts.add((int(rng.integers(-span, span + 1)), int(rng.integers(-span, span + 1))))
    pts = sorted(pts)
    return np.array([p[0] for p in pts]), np.array([p[1] for p in pts])


def test_exact_order_breaks_float_ties():
    # 1393 * (1 + sqrt2) = 3362.99985..., just below 3363
    order = ExactOrder(np.array([1393, 3363, 0, 0]), np.array([1393, 0, 0, 0]))
    assert order.rank.tolist() == [1, 2, 0, 0]
    # ranks are dense, so thresholds count distinct values
    assert order.count_below(3363, 0) == 2
    assert order.count_below(3363, 0, inclusive=True) == 3


def test_min_range_tree_small():
    u = np.array([0, 1, 2, 3])
    v = np.array([3, 2, 1, 0])
    key = np.array([3, 1, 2, 0])
    t = MinRangeTree(u, v, key)
    assert t.first_point([0], [0]).tolist() == [3]
    assert t.first_point([0], [1]).tolist() == [1]
    assert t.first_point([2], [2]).tolist() == [-1]
    assert t.audit()


def test_empty_index():
    idx = build_index([], Frame(0), ConeId.C_a1r3)
    assert query_first_in_cone(idx, Point(0, 0, 0)) is None


@pytest.mark.parametrize("seed", range(12))
def test_tree_matches_dense_and_exact_scan(seed):
    rng = np.random.default_rng(seed)
    fx, fy = grid_points(rng, int(rng.integers(1, 90)), 6 if seed % 2 else 40)
    keys = keys_for(fx, fy)
    ids = np.arange(len(fx))
    for cone in CONES:
        idx = ConeIndex(keys, cone)
        got = idx.first_for_members()
        assert (got == dense_first_in_cone(keys, cone)).all()
        ref = [scan_first_in_cone(fx, fy, ids, fx[i], fy[i], cone, exclude=i) for i in range(len(fx))]
        assert got.tolist() == ref


def test_augmentation_audit_on_1000_points():
    rng = np.random.default_rng(9)
    fx, fy = grid_points(rng, 1000, 10**5)
    keys = keys_for(fx, fy)
    for cone in UPPER:
        assert ConeIndex(keys, cone).tree.audit()


def test_duplicate_u_keys():
    # many points on few vertical and diagonal lines
    rng = np.random.default_rng(4)
    xs = rng.integers(0, 4, 200)
    ys = rng.integers(0, 50, 200)
    pts = sorted(set(zip(xs.tolist(), (ys + xs).tolist())))
    fx = np.array([p[0] for p in pts])
    fy = np.array([p[1] for p in pts])
    keys = keys_for(fx, fy)
    for cone in CONES:
        assert (ConeIndex(keys, cone).first_for_members() == dense_first_in_cone(keys, cone)).all()


def test_near_boundary_stress():
    # points straddling the 22.5/67.5/112.5/157.5 degree guides by one grid unit at scale 1e6
    rng = random.Random(2)
    s = math.tan(math.radians(22.5))
    raw = set()
    for _ in range(150):
        m = rng.randint(10**5, 10**6)
        for slope in (s, 1 / s):
            for sign in (1, -1):
                for delta in (-1, 0, 1):
                    raw.add((sign * m, int(round(slope * m)) + delta))
    raw.discard((0, 0))
    pts = sorted(raw)
    fx = np.array([p[0] for p in pts] + [0])
    fy = np.array([p[1] for p in pts] + [0])
    keys = keys_for(fx, fy)
    ids = np.arange(len(fx))
    origin = len(fx) - 1
    for cone in CONES:
        got = ConeIndex(keys, cone).first_for_members([origin])[0]
        assert got == scan_first_in_cone(fx, fy, ids, 0, 0, cone, exclude=origin)
        if got >= 0:
            assert cone_of(Point(0, 0, 0), Point(1, int(fx[got]), int(fy[got]))) is cone


def test_external_queries_match_scan():
    rng = np.random.default_rng(21)
    fx, fy = grid_points(rng, 300, 100)
    keys = keys_for(fx, fy)
    ids = np.arange(len(fx))
    for cone in UPPER:
        idx = ConeIndex(keys, cone)
        for _ in range(100):
            px, py = int(rng.integers(-120, 121)), int(rng.integers(-120, 121))
            assert idx.first_for_point(px, py) == scan_first_in_cone(fx, fy, ids, px, py, cone)


def test_query_first_in_cone_points():
    rng = random.Random(8)
    pts = [Point(i, Fraction(rng.randint(0, 400), 4), Fraction(rng.randint(0, 400), 4)) for i in range(80)]
    pts = list({(p.x, p.y): p for p in pts}.values())
    for s in (0, 3):
        frame = Frame(s)
        idx = {c: build_index(pts, frame, c) for c in (ConeId.C_a1r3, ConeId.C_r3a2)}
        for _ in range(30):
            q = Point(999, Fraction(rng.randint(-40, 440), 8), Fraction(rng.randint(-40, 440), 8))
            for cone, index in idx.items():
                hit = query_first_in_cone(index, q)
                members = [p for p in pts if cone_of(q, p, frame) is cone]
                assert (hit is None) == (not members)
                if hit is not None:
                    assert hit in members


def test_top_cone_winner_agrees_with_top_neighbor():
    rng = random.Random(12)
    pts = [Point(i, rng.randint(0, 60), rng.randint(0, 60)) for i in range(60)]
    pts = list({(p.x, p.y): p for p in pts}.values())
    frame = Frame(0)
    p = Point(500, 30, -5)  # below everything
    top = select_top_neighbor(p, pts, frame)
    firsts = [query_first_in_cone(build_index(pts, frame, c), p) for c in (ConeId.C_a1r3, ConeId.C_r3a2)]
    assert top.p_s in firsts
