"""Full emanation graphs M_k: simultaneous ray competition clipped by the bounding box.

Grades 1 and 2 are simulated exactly on an integer grid (every coordinate is
scaled by twice the common denominator, which keeps collision points and
midpoints integral). Travel times are compared through their squares, so the
event order is exact. Grades >= 3 run the same event loop in floating point
("approximate mode").
"""
from __future__ import annotations

import enum
import heapq
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Optional, Sequence

import numpy as np

from .errors import DuplicatePoint, ModeUnsupported
from .geom import DIRS, Point, RayTime, as_coord
from .graph import Kind, PlaneGraph, Vertex, assemble_segments, gc_paused, graph_from_assembly

APPROX_TOL = 1e-9


@dataclass(frozen=True)
class BBox:
    xmin: Fraction
    xmax: Fraction
    ymin: Fraction
    ymax: Fraction

    def __post_init__(self):
        for name in ("xmin", "xmax", "ymin", "ymax"):
            object.__setattr__(self, name, as_coord(getattr(self, name)))
        if self.xmin > self.xmax or self.ymin > self.ymax:
            raise ValueError("empty bounding box")

    @classmethod
    def of_points(cls, points: Sequence[Point], margin=1) -> "BBox":
        """Bounding box of ``points``; grown by ``margin`` on every side if it has zero area."""
        xs = [p.x for p in points]
        ys = [p.y for p in points]
        box = cls(min(xs), max(xs), min(ys), max(ys))
        if box.xmin == box.xmax or box.ymin == box.ymax:
            m = as_coord(margin)
            if m <= 0:
                raise ValueError("margin must be positive for a degenerate point set")
            box = cls(box.xmin - m, box.xmax + m, box.ymin - m, box.ymax + m)
        return box


class StopCause(str, enum.Enum):
    COLLISION = "collision"
    PARALLEL = "parallel"
    BBOX = "bbox"


@dataclass(frozen=True)
class RaySegment:
    owner: int
    dir: int
    stop_point: tuple
    stop_time: RayTime
    stop_cause: StopCause
    other: Optional[tuple] = None  # (owner, dir) of the ray that caused the stop


@dataclass(frozen=True)
class TiePolicy:
    """How an equal-time crossing is resolved.

    ``lex`` stops the ray whose ``(owner id, dir)`` is larger; ``seeded`` flips
    a coin from ``random.Random(seed)`` in event order.
    """

    mode: str = "lex"
    seed: Optional[int] = None

    def __post_init__(self):
        if self.mode not in ("lex", "seeded"):
            raise ValueError(f"unknown tie mode {self.mode!r}")
        if self.mode == "seeded" and self.seed is None:
            raise ValueError("seeded tie policy needs a seed")

    @classmethod
    def seeded(cls, seed: int) -> "TiePolicy":
        return cls("seeded", int(seed))

    def describe(self) -> str:
        return "lex" if self.mode == "lex" else f"seeded:{self.seed}"

    @classmethod
    def parse(cls, text: str) -> "TiePolicy":
        if text == "lex":
            return cls()
        if text.startswith("seeded:"):
            return cls.seeded(int(text.split(":", 1)[1]))
        raise ValueError(f"bad tie policy {text!r}")


DETERMINISTIC_LEX = TiePolicy()


def check_points(points: Sequence[Point]) -> list[Point]:
    if not points:
        raise ValueError("need at least one point")
    ids = set()
    seen = {}
    for p in points:
        if p.id in ids:
            raise ValueError(f"duplicate point id {p.id}")
        ids.add(p.id)
        if (p.x, p.y) in seen:
            raise DuplicatePoint(f"points {seen[(p.x, p.y)]} and {p.id} coincide at ({p.x}, {p.y})")
        seen[(p.x, p.y)] = p.id
    return sorted(points, key=lambda p: p.id)


def directions_for(grade: int) -> list[int]:
    """Base DirIndex values (multiples of 45 degrees) shot at grade 1 or 2."""
    if grade == 1:
        return [0, 2, 4, 6]
    if grade == 2:
        return list(range(8))
    raise ModeUnsupported(f"grade {grade} has no exact direction set")


@dataclass
class _Simulation:
    """Raw integer-grid result of the exact event loop."""

    scale: int
    owner: list
    dirs: list
    ox: list
    oy: list
    stop: list  # grid parameter along the unnormalized direction
    cause: list
    other: list
    bbox_grid: tuple
    ties: int
    concurrent: int


def _grid_scale(points, bbox) -> int:
    coords = [c for p in points for c in (p.x, p.y)] + [bbox.xmin, bbox.xmax, bbox.ymin, bbox.ymax]
    return 2 * reduce(math.lcm, (c.denominator for c in coords), 1)


def _bbox_params(ox, oy, dx, dy, box):
    xmin, xmax, ymin, ymax = box
    big = np.iinfo(np.int64).max if ox.dtype != object else None
    cand = []
    for o, d, lo, hi in ((ox, dx, xmin, xmax), (oy, dy, ymin, ymax)):
        lim = np.where(d > 0, hi - o, np.where(d < 0, o - lo, -1))
        cand.append(lim)
    sx, sy = cand
    if big is None:
        return np.array([min(a, b) if a >= 0 and b >= 0 else max(a, b) for a, b in zip(sx, sy)], dtype=object)
    sx = np.where(sx < 0, big, sx)
    sy = np.where(sy < 0, big, sy)
    return np.minimum(sx, sy)


def _simulate_exact(points: list[Point], grade: int, bbox: BBox, tie: TiePolicy) -> _Simulation:
    dirs_used = directions_for(grade)
    scale = _grid_scale(points, bbox)
    gx = [int(p.x * scale) for p in points]
    gy = [int(p.y * scale) for p in points]
    box = tuple(int(v * scale) for v in (bbox.xmin, bbox.xmax, bbox.ymin, bbox.ymax))
    span = max(abs(v) for v in list(box) + gx + gy) + 1
    dtype = np.int64 if span < 2**28 else object

    owner, dir_of, ox_l, oy_l = [], [], [], []
    for k, p in enumerate(points):
        for d in dirs_used:
            owner.append(k)
            dir_of.append(d)
            ox_l.append(gx[k])
            oy_l.append(gy[k])
    R = len(owner)
    ox = np.array(ox_l, dtype=dtype)
    oy = np.array(oy_l, dtype=dtype)
    dvec = np.array([DIRS[d] for d in dir_of], dtype=np.int64)
    dx = dvec[:, 0].astype(dtype)
    dy = dvec[:, 1].astype(dtype)
    len2 = (dx * dx + dy * dy)
    own = np.array(owner)
    smax = _bbox_params(ox, oy, dx, dy, box)

    ev_key, ev_kind, ev_i, ev_j, ev_si, ev_sj = [], [], [], [], [], []
    partners: list[list] = [[] for _ in range(R)]
    block = max(1, 2_000_000 // max(R, 1))
    jj = np.arange(R)
    for start in range(0, R, block):
        ii = np.arange(start, min(R, start + block))
        dxi, dyi = dx[ii][:, None], dy[ii][:, None]
        wx = ox[None, :] - ox[ii][:, None]
        wy = oy[None, :] - oy[ii][:, None]
        cr = dxi * dy[None, :] - dyi * dx[None, :]
        upper = (jj[None, :] > ii[:, None]) & (own[None, :] != own[ii][:, None])
        num_i = wx * dy[None, :] - wy * dx[None, :]
        num_j = wx * dyi - wy * dxi
        nz = (cr != 0) & upper
        safe = np.where(cr == 0, 1, cr)
        si = num_i // safe
        sj = num_j // safe
        ok = nz & (si >= 0) & (sj >= 0) & (si <= smax[ii][:, None]) & (sj <= smax[None, :])
        r_i, r_j = np.nonzero(ok)
        if len(r_i):
            gi = ii[r_i]
            s_i = si[r_i, r_j]
            s_j = sj[r_i, r_j]
            t_i = s_i * s_i * len2[gi]
            t_j = s_j * s_j * len2[r_j]
            ev_key.append(np.maximum(t_i, t_j))
            ev_kind.append(np.zeros(len(gi), dtype=np.int8))
            ev_i.append(gi)
            ev_j.append(r_j)
            ev_si.append(s_i)
            ev_sj.append(s_j)
        # head-on: anti-parallel, collinear, facing each other
        anti = (cr == 0) & (dxi == -dx[None, :]) & (dyi == -dy[None, :]) & (own[None, :] != own[ii][:, None])
        anti &= (wx * dyi - wy * dxi == 0) & (wx * dxi + wy * dyi > 0)
        h_i, h_j = np.nonzero(anti)
        for a, b in zip(h_i.tolist(), h_j.tolist()):
            i = int(ii[a])
            gap = int((wx[a, b] * dxi[a, 0] + wy[a, b] * dyi[a, 0]) // len2[i])
            partners[i].append((b, gap))
        up = anti & upper
        h_i, h_j = np.nonzero(up)
        if len(h_i):
            gi = ii[h_i]
            gap = (wx[h_i, h_j] * dx[gi] + wy[h_i, h_j] * dy[gi]) // len2[gi]
            mid = gap // 2
            ev_key.append(mid * mid * len2[gi])
            ev_kind.append(np.ones(len(gi), dtype=np.int8))
            ev_i.append(gi)
            ev_j.append(h_j)
            ev_si.append(mid)
            ev_sj.append(mid)

    if ev_key:
        key = np.concatenate(ev_key)
        kind = np.concatenate(ev_kind)
        ei = np.concatenate(ev_i)
        ej = np.concatenate(ev_j)
        esi = np.concatenate(ev_si)
        esj = np.concatenate(ev_sj)
        if key.dtype == object:
            order = sorted(range(len(key)), key=lambda k: (key[k], kind[k], ei[k], ej[k]))
        else:
            order = np.lexsort((ej, ei, kind, key))
        static = list(zip(key[order].tolist(), kind[order].tolist(), ei[order].tolist(), ej[order].tolist(),
                          esi[order].tolist(), esj[order].tolist()))
    else:
        static = []

    len2_l = len2.tolist()
    stop: list = [None] * R
    cause: list = [None] * R
    other: list = [None] * R
    rng = random.Random(tie.seed) if tie.mode == "seeded" else None
    dyn: list = []
    ties = 0
    stopped_at: dict = {}

    def alive(r, s):
        st = stop[r]
        return st is None or st >= s

    def halt(r, s, why, by):
        if stop[r] is not None:
            return
        stop[r] = s
        cause[r] = why
        other[r] = by
        for q, gap in partners[r]:
            if 2 * s < gap and stop[q] is None:
                sq = gap - s
                heapq.heappush(dyn, (sq * sq * len2_l[q], 2, q, r, sq, s))

    def process(ev):
        nonlocal ties
        _, kind, i, j, si, sj = ev
        if not (alive(i, si) and alive(j, sj)):
            return
        if kind == 1:
            halt(i, si, StopCause.PARALLEL, j)
            halt(j, sj, StopCause.PARALLEL, i)
            return
        if kind == 2:
            halt(i, si, StopCause.PARALLEL, j)
            return
        ti = si * si * len2_l[i]
        tj = sj * sj * len2_l[j]
        if ti > tj:
            halt(i, si, StopCause.COLLISION, j)
        elif tj > ti:
            halt(j, sj, StopCause.COLLISION, i)
        else:
            ties += 1
            if rng is None:
                loser, winner = (j, i) if j > i else (i, j)
            else:
                loser, winner = (i, j) if rng.random() < 0.5 else (j, i)
            s_l = si if loser == i else sj
            halt(loser, s_l, StopCause.COLLISION, winner)

    k = 0
    while k < len(static) or dyn:
        if dyn and (k >= len(static) or dyn[0] < static[k]):
            process(heapq.heappop(dyn))
        else:
            process(static[k])
            k += 1

    smax_l = smax.tolist()
    for r in range(R):
        if stop[r] is None:
            stop[r] = smax_l[r]
            cause[r] = StopCause.BBOX
    # points hit by three or more stopping rays at once
    for r in range(R):
        if cause[r] is not StopCause.BBOX:
            key_pt = (ox_l[r] + stop[r] * DIRS[dir_of[r]][0], oy_l[r] + stop[r] * DIRS[dir_of[r]][1])
            stopped_at[key_pt] = stopped_at.get(key_pt, 0) + 1
    concurrent = sum(1 for c in stopped_at.values() if c >= 2)
    return _Simulation(scale, owner, dir_of, ox_l, oy_l, stop, cause, other, box, ties, concurrent)


def _segments_from_exact(points, sim: _Simulation) -> list[RaySegment]:
    out = []
    S = sim.scale
    for r in range(len(sim.owner)):
        d = sim.dirs[r]
        vx, vy = DIRS[d]
        s = sim.stop[r]
        px = Fraction(sim.ox[r] + s * vx, S)
        py = Fraction(sim.oy[r] + s * vy, S)
        t = RayTime(Fraction(s, S), 0) if d % 2 == 0 else RayTime(0, Fraction(s, S))
        by = sim.other[r]
        by_key = None if by is None else (points[sim.owner[by]].id, sim.dirs[by])
        out.append(RaySegment(points[sim.owner[r]].id, d, (px, py), t, sim.cause[r], by_key))
    return out


def simulate_rays(points: Sequence[Point], grade: int = 2, bbox: Optional[BBox] = None,
                  tie: TiePolicy = DETERMINISTIC_LEX, *, margin=1, approximate: bool = False) -> list[RaySegment]:
    """Stop time and stop point of every ray of ``points``.

    Rays are ordered by (owner id, direction). Exact mode supports grades 1
    and 2; pass ``approximate=True`` for higher grades.
    """
    pts = check_points(points)
    if grade < 1:
        raise ValueError("grade must be >= 1")
    box = bbox or BBox.of_points(pts, margin)
    if grade >= 3 or approximate:
        if not approximate:
            raise ModeUnsupported(f"grade {grade} needs approximate=True (irrational ray slopes)")
        return _simulate_float(pts, grade, box, tie)[0]
    sim = _simulate_exact(pts, grade, box, tie)
    return _segments_from_exact(pts, sim)


def build_emanation(points: Sequence[Point], grade: int = 2, margin=1, tie: TiePolicy = DETERMINISTIC_LEX,
                    *, approximate: bool = False, bbox: Optional[BBox] = None) -> PlaneGraph:
    """The emanation graph M_k: input points, collision (Steiner) points and box clip points."""
    with gc_paused():
        return _build_emanation(points, grade, margin, tie, approximate, bbox)


def _build_emanation(points, grade, margin, tie, approximate, bbox):
    pts = check_points(points)
    box = bbox or BBox.of_points(pts, margin)
    meta = {"algorithm": f"emanation{grade}", "grade": grade, "tie_policy": tie.describe()}
    if grade >= 3 or approximate:
        if not approximate:
            raise ModeUnsupported(f"grade {grade} needs approximate=True (irrational ray slopes)")
        return _build_float_graph(pts, grade, box, tie, meta)
    sim = _simulate_exact(pts, grade, box, tie)
    segs = []
    boundary = set()
    collided = set()
    for r in range(len(sim.owner)):
        vx, vy = DIRS[sim.dirs[r]]
        s = sim.stop[r]
        end = (sim.ox[r] + s * vx, sim.oy[r] + s * vy)
        if s > 0:
            segs.append((sim.ox[r], sim.oy[r], end[0], end[1]))
        (boundary if sim.cause[r] is StopCause.BBOX else collided).add(end)
    originals = {(int(p.x * sim.scale), int(p.y * sim.scale)): p.id for p in pts}
    asm = assemble_segments(segs, anchors=list(originals), repair=True)

    def id_of(x, y):
        if x.denominator == 1 and y.denominator == 1:
            return originals.get((int(x), int(y)))
        return None

    def kind_of(x, y):
        if x.denominator == 1 and y.denominator == 1:
            key = (int(x), int(y))
            if key in collided:
                return Kind.STEINER
            if key in boundary:
                return Kind.BOUNDARY
        return Kind.STEINER

    meta["diagnostics"] = {
        "equal_time_ties": sim.ties,
        "concurrent_stop_points": sim.concurrent,
        "crossings_inserted": asm.crossings,
    }
    meta["approximate"] = False
    return graph_from_assembly(asm, sim.scale, kind_of, id_of, meta)


# --------------------------------------------------------------------------
# approximate mode (grade >= 3)


def _simulate_float(pts, grade, box, tie):
    nd = 2 ** (grade + 1)
    angles = [2 * math.pi * j / nd for j in range(nd)]
    vecs = [(math.cos(a), math.sin(a)) for a in angles]
    vecs = [(0.0 if abs(x) < 1e-15 else x, 0.0 if abs(y) < 1e-15 else y) for x, y in vecs]
    xmin, xmax, ymin, ymax = (float(v) for v in (box.xmin, box.xmax, box.ymin, box.ymax))
    owner, dirs, ox, oy = [], [], [], []
    for k, p in enumerate(pts):
        for j in range(nd):
            owner.append(k)
            dirs.append(j)
            ox.append(float(p.x))
            oy.append(float(p.y))
    R = len(owner)
    ox_a, oy_a = np.array(ox), np.array(oy)
    dx = np.array([vecs[d][0] for d in dirs])
    dy = np.array([vecs[d][1] for d in dirs])
    with np.errstate(divide="ignore", invalid="ignore"):
        tx = np.where(dx > APPROX_TOL, (xmax - ox_a) / dx, np.where(dx < -APPROX_TOL, (xmin - ox_a) / dx, np.inf))
        ty = np.where(dy > APPROX_TOL, (ymax - oy_a) / dy, np.where(dy < -APPROX_TOL, (ymin - oy_a) / dy, np.inf))
    tmax = np.minimum(tx, ty)
    own = np.array(owner)
    events = []
    partners: list[list] = [[] for _ in range(R)]
    for i in range(R):
        wx = ox_a - ox_a[i]
        wy = oy_a - oy_a[i]
        cr = dx[i] * dy - dy[i] * dx
        with np.errstate(divide="ignore", invalid="ignore"):
            ti = (wx * dy - wy * dx) / cr
            tj = (wx * dy[i] - wy * dx[i]) / cr
        ok = (np.abs(cr) > APPROX_TOL) & (np.arange(R) > i) & (own != own[i])
        ok &= (ti >= -APPROX_TOL) & (tj >= -APPROX_TOL) & (ti <= tmax[i] + APPROX_TOL) & (tj <= tmax + APPROX_TOL)
        for j in np.flatnonzero(ok):
            a, b = max(ti[j], 0.0), max(tj[j], 0.0)
            events.append((max(a, b), 0, i, int(j), a, b))
        anti = (np.abs(cr) <= APPROX_TOL) & (np.abs(dx + dx[i]) < APPROX_TOL) & (np.abs(dy + dy[i]) < APPROX_TOL)
        anti &= (own != own[i]) & (np.abs(wx * dy[i] - wy * dx[i]) < APPROX_TOL) & (wx * dx[i] + wy * dy[i] > 0)
        for j in np.flatnonzero(anti):
            gap = float(wx[j] * dx[i] + wy[j] * dy[i])
            partners[i].append((int(j), gap))
            if j > i:
                events.append((gap / 2, 1, i, int(j), gap / 2, gap / 2))
    events.sort()
    stop = [None] * R
    cause = [None] * R
    other = [None] * R
    rng = random.Random(tie.seed) if tie.mode == "seeded" else None
    dyn = []

    def alive(r, s):
        return stop[r] is None or stop[r] >= s - APPROX_TOL

    def halt(r, s, why, by):
        if stop[r] is not None:
            return
        stop[r], cause[r], other[r] = s, why, by
        for q, gap in partners[r]:
            if 2 * s < gap - APPROX_TOL and stop[q] is None:
                heapq.heappush(dyn, (gap - s, 2, q, r, gap - s, s))

    def process(ev):
        _, kind, i, j, si, sj = ev
        if not (alive(i, si) and alive(j, sj)):
            return
        if kind == 1:
            halt(i, si, StopCause.PARALLEL, j)
            halt(j, sj, StopCause.PARALLEL, i)
        elif kind == 2:
            halt(i, si, StopCause.PARALLEL, j)
        elif si > sj + APPROX_TOL:
            halt(i, si, StopCause.COLLISION, j)
        elif sj > si + APPROX_TOL:
            halt(j, sj, StopCause.COLLISION, i)
        else:
            if rng is None:
                loser, winner = (j, i) if j > i else (i, j)
            else:
                loser, winner = (i, j) if rng.random() < 0.5 else (j, i)
            halt(loser, si if loser == i else sj, StopCause.COLLISION, winner)

    k = 0
    while k < len(events) or dyn:
        if dyn and (k >= len(events) or dyn[0] < events[k]):
            process(heapq.heappop(dyn))
        else:
            process(events[k])
            k += 1
    segs = []
    for r in range(R):
        if stop[r] is None:
            stop[r], cause[r] = float(tmax[r]), StopCause.BBOX
        end = (ox[r] + stop[r] * dx[r], oy[r] + stop[r] * dy[r])
        by = other[r]
        segs.append(RaySegment(pts[owner[r]].id, dirs[r], end, RayTime(Fraction(stop[r]), 0), cause[r],
                               None if by is None else (pts[owner[by]].id, dirs[by])))
    return segs, (ox, oy, dx, dy)


def _build_float_graph(pts, grade, box, tie, meta):
    rays, (ox, oy, dx, dy) = _simulate_float(pts, grade, box, tie)
    coords: list = []
    kinds: list = []
    ids: list = []

    def vertex_at(x, y, kind, pid=None):
        for k, (cx, cy) in enumerate(coords):
            if abs(cx - x) <= 1e-7 and abs(cy - y) <= 1e-7:
                if kind == Kind.STEINER and kinds[k] == Kind.BOUNDARY:
                    kinds[k] = Kind.STEINER
                return k
        coords.append((x, y))
        kinds.append(kind)
        ids.append(pid)
        return len(coords) - 1

    for p in pts:
        vertex_at(float(p.x), float(p.y), Kind.ORIGINAL, p.id)
    ends = []
    for r, ray in enumerate(rays):
        kind = Kind.BOUNDARY if ray.stop_cause is StopCause.BBOX else Kind.STEINER
        ends.append(vertex_at(float(ray.stop_point[0]), float(ray.stop_point[1]), kind))
    edges = set()
    xy = np.array(coords)
    origin_index = {p.id: k for k, p in enumerate(pts)}
    for r, ray in enumerate(rays):
        o = origin_index[ray.owner]
        length = float(ray.stop_time.a)
        if length <= APPROX_TOL:
            continue
        rel = xy - np.array([ox[r], oy[r]])
        along = rel[:, 0] * dx[r] + rel[:, 1] * dy[r]
        off = np.abs(rel[:, 0] * dy[r] - rel[:, 1] * dx[r])
        on = np.flatnonzero((off < 1e-7) & (along > 1e-9) & (along < length + 1e-7))
        chain = [o] + sorted(on.tolist(), key=lambda k: along[k])
        for a, b in zip(chain, chain[1:]):
            if a != b:
                edges.add((a, b))
    verts = []
    next_id = max(p.id for p in pts) + 1
    vid = []
    for k, (x, y) in enumerate(coords):
        if ids[k] is not None:
            vid.append(ids[k])
        else:
            vid.append(next_id)
            next_id += 1
        verts.append(Vertex(vid[k], Fraction(x), Fraction(y), kinds[k]))
    meta["approximate"] = True
    meta["diagnostics"] = {"tolerance": APPROX_TOL}
    return PlaneGraph(verts, [(vid[a], vid[b]) for a, b in edges], meta)
