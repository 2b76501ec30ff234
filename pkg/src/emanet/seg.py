"""Simplified emanation graph (grade 2).

Instead of simulating all 8 rays of every point, each point p is linked
directly to its top neighbor p_s in each of 8 rotated frames, provided no
candidate point p_c from the side cones would have intercepted the link. A
link is an elbow: a vertical leg up from p followed by a diagonal leg into p_s.

The per-point operations below (:func:`select_top_neighbor`,
:func:`select_candidates`, :func:`is_blocked`, :func:`connect`) work on exact
Fractions and are meant for inspection and testing. :func:`build_seg` runs the
same rules vectorized per frame on an integer grid.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .emanation import DETERMINISTIC_LEX, TiePolicy, check_points
from .errors import ConfigError, InternalInvariantViolation
from .geom import (A1, A2, CANDIDATE_CONES, LEFT_CANDIDATE_CONES, TOP_CONES, ConeId, Frame, Point, RayTime,
                   cone_in_frame, dot_zsqrt2, sign, sign_zsqrt2)
from .graph import Kind, PlaneGraph, assemble_segments, gc_paused, graph_from_assembly
from .rangetree import (ConeIndex, FrameKeys, dense_first_in_cone, frame_coords, grid_scale, scan_first_in_cone,
                        sign_zsqrt2_array)

U_B1 = ((1, 1), (1, 0))  # 22.5 degrees, scaled
U_R2 = ((1, 0), (1, 0))  # 45 degrees

_MIRROR = {
    ConeId.C_a1r3: ConeId.C_r3a2,
    ConeId.C_r3a2: ConeId.C_a1r3,
    ConeId.C_a2r4: ConeId.C_r2a1,
    ConeId.C_r4b2: ConeId.C_b1r2,
}


@dataclass(frozen=True)
class TopNeighbor:
    """``p_s`` for ``p``; ``sweep_key`` is the projection of ``p_s - p`` on the cone's
    a1 (or a2) guide vector ``(1, 1+sqrt2)``, which has length ``sqrt(4 + 2 sqrt2)``."""

    p: Point
    p_s: Point
    cone: ConeId
    sweep_key: RayTime


@dataclass(frozen=True)
class Candidate:
    p_c: Point
    cone: ConeId


@dataclass(frozen=True)
class Elbow:
    p: Point
    p_s: Point
    frame: Frame
    bend: Optional[tuple]  # base coordinates, None for a straight link

    def segments(self):
        pts = [self.p.xy] + ([self.bend] if self.bend is not None else []) + [self.p_s.xy]
        return list(zip(pts, pts[1:]))


@dataclass(frozen=True)
class SegConfig:
    tie: TiePolicy = DETERMINISTIC_LEX
    planarity_repair: bool = True
    record_diagnostics: bool = True
    neighbor_source: str = "rangetree"  # or "naive"

    def __post_init__(self):
        if self.neighbor_source not in ("rangetree", "naive"):
            raise ConfigError(f"unknown neighbor source {self.neighbor_source!r}")


# --------------------------------------------------------------------------
# per-point operations (exact, O(n) each)


def _frame_xy(p: Point, q: Point, frame: Frame):
    return frame.to_frame(q.x - p.x, q.y - p.y)


def _scan(p: Point, others: Sequence[Point], frame: Frame, cone: ConeId) -> Optional[Point]:
    pool = [q for q in others if q.id != p.id]
    if not pool:
        return None
    scale = grid_scale(pool + [p])
    fx, fy = frame_coords(pool + [p], frame, scale)
    j = scan_first_in_cone(fx[:-1], fy[:-1], [q.id for q in pool], fx[-1], fy[-1], cone)
    return None if j < 0 else pool[j]


def _sweep_key(p: Point, q: Point, frame: Frame, cone: ConeId) -> RayTime:
    fx, fy = _frame_xy(p, q, frame)
    a, b = dot_zsqrt2(A1 if cone == ConeId.C_a1r3 else A2, fx, fy)
    if frame.axis_norm2 == 2:
        # frame coordinates carry a factor sqrt2
        return RayTime(b, Fraction(a) / 2)
    return RayTime(a, b)


def select_top_neighbor(p: Point, others: Sequence[Point], frame: Frame = Frame(0),
                        tie: TiePolicy = DETERMINISTIC_LEX, rng: Optional[random.Random] = None) -> Optional[TopNeighbor]:
    """First point reached by the two simultaneous sweeps of p's top cones."""
    found = []
    for cone in TOP_CONES:
        q = _scan(p, others, frame, cone)
        if q is not None:
            found.append(TopNeighbor(p, q, cone, _sweep_key(p, q, frame, cone)))
    if not found:
        return None
    if len(found) == 1:
        return found[0]
    a, b = found
    if a.sweep_key != b.sweep_key:
        return a if a.sweep_key < b.sweep_key else b
    da = (a.p_s.x - p.x) ** 2 + (a.p_s.y - p.y) ** 2
    db = (b.p_s.x - p.x) ** 2 + (b.p_s.y - p.y) ** 2
    if da != db:
        return a if da < db else b
    if tie.mode == "seeded":
        rng = rng or tie_rng(tie)
        return a if rng.random() < 0.5 else b
    return a if a.p_s.id < b.p_s.id else b


def tie_rng(tie: TiePolicy) -> random.Random:
    return random.Random(tie.seed)


def select_candidates(p: Point, others: Sequence[Point], frame: Frame = Frame(0)) -> list[Candidate]:
    """First point of each side cone, sweeping outward horizontally from p."""
    out = []
    for cone in CANDIDATE_CONES:
        q = _scan(p, others, frame, cone)
        if q is not None:
            out.append(Candidate(q, cone))
    return out


def _allowed(ps_cone, pc_cone, sx, sy, cx, cy) -> bool:
    # right-side table; inputs relative to p in frame coordinates
    if ps_cone == ConeId.C_a1r3 and pc_cone == ConeId.C_b1r2:
        return sx < cx and sx + sy < cx + cy
    if ps_cone == ConeId.C_a1r3 and pc_cone == ConeId.C_r2a1:
        a, b = dot_zsqrt2(U_B1, cx - sx, cy - sy)
        return sign_zsqrt2(a, b) > 0
    if ps_cone == ConeId.C_r3a2 and pc_cone == ConeId.C_b1r2:
        return sx + sy < cx + cy
    if ps_cone == ConeId.C_r3a2 and pc_cone == ConeId.C_r2a1:
        return abs(sx) < abs(sy - cy)
    raise InternalInvariantViolation(f"no blocking rule for p_s in {ps_cone!r}, p_c in {pc_cone!r}")


def is_blocked(p: Point, p_s: TopNeighbor, p_c: Candidate, frame: Frame = Frame(0)) -> bool:
    """True when p_c could reach p's link to p_s before it is made."""
    sx, sy = _frame_xy(p, p_s.p_s, frame)
    cx, cy = _frame_xy(p, p_c.p_c, frame)
    if cone_in_frame(sx, sy) != p_s.cone or p_s.cone not in TOP_CONES:
        raise InternalInvariantViolation(f"p_s {p_s.p_s.id} is not in {p_s.cone!r}")
    if cone_in_frame(cx, cy) != p_c.cone or p_c.cone not in CANDIDATE_CONES:
        raise InternalInvariantViolation(f"p_c {p_c.p_c.id} is not in {p_c.cone!r}")
    ps_cone, pc_cone = p_s.cone, p_c.cone
    if pc_cone in LEFT_CANDIDATE_CONES:
        sx, cx = -sx, -cx
        ps_cone, pc_cone = _MIRROR[ps_cone], _MIRROR[pc_cone]
    return not _allowed(ps_cone, pc_cone, sx, sy, cx, cy)


def connect(p: Point, p_s: Point, frame: Frame = Frame(0)) -> Elbow:
    """Elbow from p up its r3 ray, then diagonally into p_s."""
    sx, sy = _frame_xy(p, p_s, frame)
    if sx == 0:
        return Elbow(p, p_s, frame, None)
    bx, by = frame.to_base(Fraction(0), Fraction(sy - abs(sx)))
    return Elbow(p, p_s, frame, (p.x + bx, p.y + by))


# --------------------------------------------------------------------------
# vectorized construction


@dataclass
class _Links:
    frame: int
    p: np.ndarray
    ps: np.ndarray
    bend_x: np.ndarray  # frame coordinates of the bend
    bend_y: np.ndarray
    straight: np.ndarray


@dataclass
class SegDiagnostics:
    frames: list = field(default_factory=list)

    def as_dict(self):
        tot = {k: sum(f[k] for f in self.frames) for k in ("with_top", "skipped_connected", "blocked", "linked")}
        tot["per_frame"] = self.frames
        return tot


def _first(keys: FrameKeys, cone, source):
    if source == "naive":
        return dense_first_in_cone(keys, cone)
    return ConeIndex(keys, cone).first_for_members()


def _allowed_vec(ps_top_a1r3, pc_right_b1r2, sx, sy, cx, cy):
    """Vectorized right-side table; boolean inputs pick the case."""
    c1 = (sx < cx) & (sx + sy < cx + cy)
    c2 = sign_zsqrt2_array((cx - sx) + (cy - sy), cx - sx) > 0
    c3 = sx + sy < cx + cy
    c4 = np.abs(sx) < np.abs(sy - cy)
    return np.where(ps_top_a1r3, np.where(pc_right_b1r2, c1, c2), np.where(pc_right_b1r2, c3, c4))


def frame_links(fx, fy, ids, frame: int, source="rangetree", rng: Optional[random.Random] = None):
    """Top neighbors and unblocked links of every point in one frame.

    Returns ``(ps, ps_cone, allowed)`` arrays indexed like the points;
    ``ps == -1`` where both top cones are empty.
    """
    keys = FrameKeys(fx, fy, ids)
    n = len(fx)
    ia = _first(keys, ConeId.C_a1r3, source)
    ib = _first(keys, ConeId.C_r3a2, source)
    idx = np.arange(n)
    ka = ia >= 0
    kb = ib >= 0
    sa = np.maximum(ia, 0)
    sb = np.maximum(ib, 0)
    # keys along a1 = (1, 1+sqrt2) and a2 = (-1, 1+sqrt2)
    dax, day = fx[sa] - fx, fy[sa] - fy
    dbx, dby = fx[sb] - fx, fy[sb] - fy
    diff = sign_zsqrt2_array((dax + day) - (-dbx + dby), day - dby)
    da2 = dax * dax + day * day
    db2 = dbx * dbx + dby * dby
    pick_a = diff < 0
    eq = diff == 0
    pick_a |= eq & (da2 < db2)
    tied = eq & (da2 == db2) & ka & kb
    idv = np.asarray(ids)
    pick_a |= tied & (idv[sa] < idv[sb])
    if rng is not None and tied.any():
        for i in np.flatnonzero(tied).tolist():
            pick_a[i] = rng.random() < 0.5
    pick_a = np.where(ka & kb, pick_a, ka)
    ps = np.where(pick_a, ia, ib)
    has = ps >= 0
    ps_safe = np.maximum(ps, 0)
    sx = fx[ps_safe] - fx
    sy = fy[ps_safe] - fy
    allowed = has.copy()
    for cone in CANDIDATE_CONES:
        ic = _first(keys, cone, source)
        hc = (ic >= 0) & has
        cs = np.maximum(ic, 0)
        cx = fx[cs] - fx
        cy = fy[cs] - fy
        top_a = pick_a
        if cone in LEFT_CANDIDATE_CONES:
            ok = _allowed_vec(~top_a, cone == ConeId.C_r4b2, -sx, sy, -cx, cy)
        else:
            ok = _allowed_vec(top_a, cone == ConeId.C_b1r2, sx, sy, cx, cy)
        allowed &= ~hc | ok
    cone_of_ps = np.where(pick_a, int(ConeId.C_a1r3), int(ConeId.C_r3a2))
    return ps, np.where(has, cone_of_ps, -1), allowed


def seg_links(points: Sequence[Point], config: SegConfig = SegConfig()):
    """All elbows of the SEG as ``(list of _Links, grid scale, diagnostics)``."""
    pts = check_points(points)
    scale = grid_scale(pts)
    ids = [p.id for p in pts]
    rng = tie_rng(config.tie) if config.tie.mode == "seeded" else None
    connected: set = set()
    out = []
    diag = SegDiagnostics()
    for step in range(8):
        frame = Frame(step)
        fx, fy = frame_coords(pts, frame, scale)
        ps, cones, allowed = frame_links(fx, fy, ids, step, config.neighbor_source, rng)
        sel = []
        skipped = 0
        for i, j in zip(np.flatnonzero(ps >= 0).tolist(), ps[ps >= 0].tolist()):
            pair = (i, j) if i < j else (j, i)
            if pair in connected:
                skipped += 1
                continue
            if allowed[i]:
                connected.add(pair)
                sel.append(i)
        sel = np.array(sel, dtype=np.int64)
        diag.frames.append({
            "frame": step,
            "with_top": int((ps >= 0).sum()),
            "skipped_connected": skipped,
            "blocked": int(((ps >= 0) & ~allowed).sum()),
            "linked": len(sel),
        })
        if len(sel) == 0:
            continue
        q = ps[sel]
        sx = fx[q] - fx[sel]
        out.append(_Links(step, sel, q, fx[sel], fy[q] - np.abs(sx), sx == 0))
    return pts, out, scale, diag


def _to_base2(frame: Frame, X, Y):
    """Doubled base grid coordinates of frame points."""
    (e1x, e1y), (e3x, e3y) = frame.axes
    m = 2 if frame.axis_norm2 == 1 else 1
    return m * (X * e1x + Y * e3x), m * (X * e1y + Y * e3y)


def build_seg(points: Sequence[Point], config: SegConfig = SegConfig()) -> PlaneGraph:
    """The simplified emanation graph of grade 2."""
    with gc_paused():
        return _build_seg(points, config)


def _build_seg(points, config):
    pts, links, scale, diag = seg_links(points, config)
    gx = np.array([int(p.x * scale) * 2 for p in pts], dtype=object)
    gy = np.array([int(p.y * scale) * 2 for p in pts], dtype=object)
    segs = []
    for lk in links:
        frame = Frame(lk.frame)
        bx, by = _to_base2(frame, lk.bend_x.astype(object), lk.bend_y.astype(object))
        for k in range(len(lk.p)):
            i, j = int(lk.p[k]), int(lk.ps[k])
            if lk.straight[k]:
                segs.append((gx[i], gy[i], gx[j], gy[j]))
            else:
                segs.append((gx[i], gy[i], bx[k], by[k]))
                segs.append((bx[k], by[k], gx[j], gy[j]))
    originals = {(int(x), int(y)): p.id for x, y, p in zip(gx, gy, pts)}
    asm = assemble_segments(segs, anchors=list(originals), repair=config.planarity_repair)

    def id_of(x, y):
        if x.denominator == 1 and y.denominator == 1:
            return originals.get((int(x), int(y)))
        return None

    meta = {"algorithm": "seg", "grade": 2, "tie_policy": config.tie.describe(),
            "neighbor_source": config.neighbor_source}
    d = {"crossings_inserted": asm.crossings if config.planarity_repair else 0,
         "crossings_found": asm.crossings}
    if config.record_diagnostics:
        d.update(diag.as_dict())
    meta["diagnostics"] = d
    return graph_from_assembly(asm, 2 * scale, lambda x, y: Kind.STEINER, id_of, meta)
