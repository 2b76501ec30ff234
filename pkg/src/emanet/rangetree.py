"""Cone neighbor queries: "first point of a cone" under a sweep order.

Every cone of a frame is the intersection of two half-planes, and its sweep
order is a linear functional, all with coefficients in Z[sqrt2]. Points are
ranked once per functional with an exact comparator (float sort, exact repair
of near ties), after which a cone query is a pure integer problem:

    minimize keyrank  subject to  urank >= u0  and  vrank >= v0.

:class:`MinRangeTree` answers it in O(log^2 n) per query (a layered segment
tree over u whose nodes keep their points sorted by v with suffix minima of the
key). :func:`scan_first_in_cone` is the exact linear scan used as reference,
and :func:`dense_first_in_cone` is the O(n) per query integer scan used for the
quadratic comparison path.
"""
from __future__ import annotations

import math
from functools import cmp_to_key, reduce
from typing import Optional, Sequence

import numpy as np

from .geom import (A1, A2, B1, B2, CONE_BOUNDS, R1, R3, R5, SQRT2, ConeId, Frame, Point, sign_zsqrt2)

# Sweep order per cone: primary functional, then a secondary tie-break (then id).
# Top cones sweep along their bisectors; secondary is the offset from the
# bisector toward r3, which orders equal-key points by distance to the apex.
_E1 = ((1, 0), (0, 0))
_E3 = ((0, 0), (1, 0))
_NEG_E1 = ((-1, 0), (0, 0))
SWEEP = {
    ConeId.C_a1r3: (A1, ((-1, -1), (1, 0))),
    ConeId.C_r3a2: (A2, ((1, 1), (1, 0))),
    ConeId.C_r1b1: (_E1, _E3),
    ConeId.C_b1r2: (_E1, _E3),
    ConeId.C_r2a1: (_E1, _E3),
    ConeId.C_a2r4: (_NEG_E1, _E3),
    ConeId.C_r4b2: (_NEG_E1, _E3),
    ConeId.C_b2r5: (_NEG_E1, _E3),
}


def functional(fx, fy, vec):
    """Values ``<(fx, fy), vec>`` as integer arrays ``(A, B)`` meaning ``A + B*sqrt2``."""
    (ax, bx), (ay, by) = vec
    return ax * fx + ay * fy, bx * fx + by * fy


def lower_normal(guide):
    """Functional whose value on ``d`` is ``cross(guide, d)``."""
    (gxa, gxb), (gya, gyb) = guide
    return ((-gya, -gyb), (gxa, gxb))


def upper_normal(guide):
    """Functional whose value on ``d`` is ``cross(d, guide)``."""
    (gxa, gxb), (gya, gyb) = guide
    return ((gya, gyb), (-gxa, -gxb))


def sign_zsqrt2_array(a, b) -> np.ndarray:
    sa = np.sign(a).astype(np.int8)
    sb = np.sign(b).astype(np.int8)
    mixed = sa * np.sign(a * a - 2 * b * b).astype(np.int8)
    return np.where(sb == 0, sa, np.where(sa == 0, sb, np.where(sa == sb, sa, mixed)))


def _approx(A, B):
    return A.astype(float) + B.astype(float) * SQRT2


class ExactOrder:
    """Exact dense ranks of the values ``A + B*sqrt2``; equal values share a rank."""

    def __init__(self, A, B):
        A = np.asarray(A)
        B = np.asarray(B)
        n = len(A)
        self.A, self.B = A, B
        if n == 0:
            self.rank = np.zeros(0, dtype=np.int64)
            self.uA = self.uB = []
            return
        f = _approx(A, B)
        order = np.argsort(f, kind="stable")
        fs = f[order]
        scale = float(np.max(np.abs(A))) + 2.0 * float(np.max(np.abs(B))) + 1.0
        tol = 1e-13 * scale
        near = np.diff(fs) <= tol
        Al = A.tolist()
        Bl = B.tolist()

        def cmp(i, j):
            return sign_zsqrt2(Al[i] - Al[j], Bl[i] - Bl[j])

        inc = (~near).astype(np.int64)
        if near.any():
            idx = np.flatnonzero(near)
            # clusters of consecutive near pairs -> positions [s, e]
            breaks = np.flatnonzero(np.diff(idx) > 1)
            starts = np.concatenate([[idx[0]], idx[breaks + 1]])
            ends = np.concatenate([idx[breaks], [idx[-1]]]) + 1
            order = order.copy()
            for s, e in zip(starts.tolist(), ends.tolist()):
                seg = sorted(order[s:e + 1].tolist(), key=cmp_to_key(cmp))
                order[s:e + 1] = seg
            for i in idx.tolist():
                inc[i] = 1 if cmp(int(order[i + 1]), int(order[i])) > 0 else 0
        dense = np.concatenate([[0], np.cumsum(inc)])
        rank = np.empty(n, dtype=np.int64)
        rank[order] = dense
        self.rank = rank
        first = np.concatenate([[True], inc.astype(bool)])
        reps = order[first]
        self.uA = [Al[i] for i in reps.tolist()]
        self.uB = [Bl[i] for i in reps.tolist()]

    def count_below(self, a, b, inclusive: bool = False) -> int:
        """Number of distinct values ``< a + b*sqrt2`` (``<=`` if inclusive)."""
        lo, hi = 0, len(self.uA)
        while lo < hi:
            mid = (lo + hi) // 2
            s = sign_zsqrt2(self.uA[mid] - a, self.uB[mid] - b)
            if s < 0 or (inclusive and s == 0):
                lo = mid + 1
            else:
                hi = mid
        return lo


class MinRangeTree:
    """Layered segment tree answering ``min key s.t. u >= u0, v >= v0`` on integer ranks.

    Level ``h`` partitions the points (sorted by u) into blocks of ``2**h``;
    each block lists its points by v with suffix minima of the key. A suffix of
    the u order is covered by at most one block per level.
    """

    def __init__(self, urank, vrank, keyrank):
        urank = np.asarray(urank, dtype=np.int64)
        vrank = np.asarray(vrank, dtype=np.int64)
        keyrank = np.asarray(keyrank, dtype=np.int64)
        n = len(urank)
        self.n = n
        self.key_to_point = np.empty(n, dtype=np.int64)
        self.key_to_point[keyrank] = np.arange(n)
        order_u = np.argsort(urank, kind="stable")
        self.u_sorted = urank[order_u]
        self.nv = int(vrank.max()) + 2 if n else 1
        nk = n + 1
        self.levels = []
        self._keys = []
        height = max(1, math.ceil(math.log2(n))) if n > 1 else 0
        self.height = height
        v_u = vrank[order_u]
        k_u = keyrank[order_u]
        perm = np.arange(n, dtype=np.int64)
        for h in range(height + 1):
            # the previous level is sorted inside blocks of 2**(h-1); a stable
            # sort on the coarser key only merges neighbouring runs
            node = perm >> h
            perm = perm[np.argsort(node * self.nv + v_u[perm], kind="stable")]
            node = perm >> h
            comb = node * self.nv + v_u[perm]
            enc = node * nk + k_u[perm]
            suf = np.minimum.accumulate(enc[::-1])[::-1] - node * nk
            self.levels.append((comb, suf))
            self._keys.append(k_u[perm])

    def query(self, u0, v0) -> np.ndarray:
        """Minimum key rank per query (``-1`` when the range is empty); vectorized."""
        u0 = np.atleast_1d(np.asarray(u0, dtype=np.int64))
        v0 = np.atleast_1d(np.asarray(v0, dtype=np.int64))
        best = np.full(len(u0), self.n, dtype=np.int64)
        if self.n == 0:
            return np.full(len(u0), -1, dtype=np.int64)
        pos = np.searchsorted(self.u_sorted, u0, side="left").astype(np.int64)
        for h, (comb, suf) in enumerate(self.levels):
            take = (pos < self.n) & ((((pos >> h) & 1) == 1) | (h == self.height))
            if not take.any():
                continue
            block = pos >> h
            target = block * self.nv + np.minimum(v0, self.nv - 1)
            idx = np.searchsorted(comb, target, side="left")
            end = np.minimum((block + 1) << h, self.n)
            ok = take & (idx < end)
            if ok.any():
                vals = suf[np.minimum(idx, self.n - 1)]
                best = np.where(ok, np.minimum(best, vals), best)
            pos = np.where(take, pos + (1 << h), pos)
        return np.where(best < self.n, best, -1)

    def first_point(self, u0, v0) -> np.ndarray:
        k = self.query(u0, v0)
        return np.where(k >= 0, self.key_to_point[np.maximum(k, 0)], -1)

    def audit(self) -> bool:
        """Recompute every stored suffix minimum from scratch."""
        for (comb, suf), keys in zip(self.levels, self._keys):
            node = comb // self.nv
            for b in np.unique(node).tolist():
                sl = np.flatnonzero(node == b)
                if not np.array_equal(np.minimum.accumulate(keys[sl][::-1])[::-1], suf[sl]):
                    return False
        return True


class FrameKeys:
    """Exact ranks of all cone functionals for one frame, shared between cones."""

    def __init__(self, fx, fy, ids):
        self.fx = np.asarray(fx)
        self.fy = np.asarray(fy)
        self.ids = np.asarray(ids, dtype=np.int64)
        self._orders: dict = {}

    def order(self, vec) -> ExactOrder:
        if vec not in self._orders:
            self._orders[vec] = ExactOrder(*functional(self.fx, self.fy, vec))
        return self._orders[vec]

    def keyrank(self, cone: ConeId) -> np.ndarray:
        prim, sec = SWEEP[cone]
        o = np.lexsort((self.ids, self.order(sec).rank, self.order(prim).rank))
        kr = np.empty(len(o), dtype=np.int64)
        kr[o] = np.arange(len(o))
        return kr

    def bounds(self, cone: ConeId):
        lo, hi = CONE_BOUNDS[cone]
        return self.order(lower_normal(lo)), self.order(upper_normal(hi)), lo == R1

    def thresholds(self, cone: ConeId, index=None, point=None):
        """Rank thresholds ``(u0, v0)`` for in-set indices or an external frame point."""
        uo, vo, strict_u = self.bounds(cone)
        if index is not None:
            index = np.asarray(index)
            return uo.rank[index] + (1 if strict_u else 0), vo.rank[index] + 1
        lo, hi = CONE_BOUNDS[cone]
        ua, ub = functional(point[0], point[1], lower_normal(lo))
        va, vb = functional(point[0], point[1], upper_normal(hi))
        return uo.count_below(ua, ub, inclusive=strict_u), vo.count_below(va, vb, inclusive=True)


class ConeIndex:
    """Range-tree index of one (frame, cone) pair over a fixed point set."""

    def __init__(self, keys: FrameKeys, cone: ConeId):
        self.keys = keys
        self.cone = ConeId(cone)
        uo, vo, _ = keys.bounds(self.cone)
        self.keyrank = keys.keyrank(self.cone)
        self.tree = MinRangeTree(uo.rank, vo.rank, self.keyrank)

    def first_for_members(self, index=None) -> np.ndarray:
        """First point (array index, -1 if none) in the cone of each set member."""
        if index is None:
            index = np.arange(len(self.keyrank))
        u0, v0 = self.keys.thresholds(self.cone, index=index)
        return self.tree.first_point(u0, v0)

    def first_for_point(self, fx, fy) -> int:
        u0, v0 = self.keys.thresholds(self.cone, point=(fx, fy))
        return int(self.tree.first_point([u0], [v0])[0])


def dense_first_in_cone(keys: FrameKeys, cone: ConeId, block: int = 256) -> np.ndarray:
    """Same answers as :class:`ConeIndex` by scanning every point for every query."""
    uo, vo, strict_u = keys.bounds(cone)
    kr = keys.keyrank(cone)
    n = len(kr)
    ur, vr = uo.rank, vo.rank
    u0 = ur + (1 if strict_u else 0)
    v0 = vr + 1
    inv = np.empty(n, dtype=np.int64)
    inv[kr] = np.arange(n)
    out = np.empty(n, dtype=np.int64)
    for s in range(0, n, block):
        e = min(n, s + block)
        mask = (ur[None, :] >= u0[s:e, None]) & (vr[None, :] >= v0[s:e, None])
        best = np.where(mask, kr[None, :], n).min(axis=1)
        out[s:e] = np.where(best < n, inv[np.minimum(best, n - 1)], -1)
    return out


def scan_first_in_cone(fx, fy, ids, px, py, cone: ConeId, exclude: Optional[int] = None) -> int:
    """Exact linear scan: index of the first point of ``cone`` around frame point ``(px, py)``.

    Membership uses Z[sqrt2] sign tests, the sweep key is compared exactly,
    and ties go to the smaller squared distance (top cones) or smaller
    vertical offset (side cones), then the smaller id. Returns -1 if empty.
    """
    fx = np.asarray(fx)
    fy = np.asarray(fy)
    dx = fx - px
    dy = fy - py
    lo, hi = CONE_BOUNDS[cone]
    ua, ub = functional(dx, dy, lower_normal(lo))
    va, vb = functional(dx, dy, upper_normal(hi))
    su = sign_zsqrt2_array(ua, ub)
    sv = sign_zsqrt2_array(va, vb)
    member = (dy > 0) & (su >= 0) & (sv > 0)
    if exclude is not None:
        member[exclude] = False
    cand = np.flatnonzero(member)
    if len(cand) == 0:
        return -1
    prim, _ = SWEEP[cone]
    ka, kb = functional(dx[cand], dy[cand], prim)
    approx = _approx(ka, kb)
    scale = float(np.max(np.abs(ka))) + 2.0 * float(np.max(np.abs(kb))) + 1.0
    close = np.flatnonzero(approx <= approx.min() + 1e-12 * scale)
    top = ConeId(cone) in (ConeId.C_a1r3, ConeId.C_r3a2)

    def rank_key(k):
        j = int(cand[k])
        tie = int(dx[j]) ** 2 + int(dy[j]) ** 2 if top else abs(int(dy[j]))
        return j, tie

    best = None
    for k in close.tolist():
        j, tie = rank_key(k)
        if best is None:
            best = (k, tie, j)
            continue
        s = sign_zsqrt2(int(ka[k]) - int(ka[best[0]]), int(kb[k]) - int(kb[best[0]]))
        if s < 0 or (s == 0 and (tie, int(ids[j])) < (best[1], int(ids[best[2]]))):
            best = (k, tie, j)
    return best[2]


def grid_scale(points: Sequence[Point]) -> int:
    return reduce(math.lcm, (c.denominator for p in points for c in (p.x, p.y)), 1)


def frame_coords(points: Sequence[Point], frame: Frame, scale: int):
    """Integer frame coordinates of ``points`` on the grid ``1/scale``."""
    (e1x, e1y), (e3x, e3y) = frame.axes
    gx = [int(p.x * scale) for p in points]
    gy = [int(p.y * scale) for p in points]
    big = max((abs(v) for v in gx + gy), default=0)
    dtype = np.int64 if big < 2**28 else object
    gx = np.array(gx, dtype=dtype)
    gy = np.array(gy, dtype=dtype)
    return gx * e1x + gy * e1y, gx * e3x + gy * e3y


def build_index(points: Sequence[Point], frame: Frame, cone: ConeId) -> ConeIndex:
    """Range-tree index for ``cone`` of ``frame`` over ``points``."""
    points = list(points)
    scale = grid_scale(points) if points else 1
    fx, fy = frame_coords(points, frame, scale) if points else (np.zeros(0, np.int64), np.zeros(0, np.int64))
    index = ConeIndex(FrameKeys(fx, fy, [p.id for p in points]), cone)
    index.points = points
    index.frame = frame
    index.scale = scale
    return index


def query_first_in_cone(index: ConeIndex, p: Point) -> Optional[Point]:
    """First point of ``index.cone`` around ``p`` (which need not belong to the set)."""
    if not index.points:
        return None
    (e1x, e1y), (e3x, e3y) = index.frame.axes
    x = p.x * index.scale
    y = p.y * index.scale
    fx, fy = x * e1x + y * e1y, x * e3x + y * e3y
    if fx.denominator != 1 or fy.denominator != 1:
        # off-grid query point: fall back to the exact scan on a refined grid
        pts = index.points + [Point(-1, p.x, p.y)]
        scale = grid_scale(pts)
        gx, gy = frame_coords(pts, index.frame, scale)
        j = scan_first_in_cone(gx[:-1], gy[:-1], [q.id for q in index.points], gx[-1], gy[-1], index.cone)
        return None if j < 0 else index.points[j]
    j = index.first_for_point(int(fx), int(fy))
    return None if j < 0 else index.points[j]
