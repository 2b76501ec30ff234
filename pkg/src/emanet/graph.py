"""Plane straight-line graphs and exact assembly of segment arrangements.

All builders in the package produce segments whose directions are multiples
of 45 degrees. :func:`assemble_segments` turns such a segment soup into a plane
graph: collinear overlaps are merged, every vertex lying on a segment splits
it, and (optionally) residual proper crossings receive a new vertex.
"""
from __future__ import annotations

import contextlib
import enum
import gc
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import InternalInvariantViolation



@contextlib.contextmanager
def gc_paused():
    """Suspend the cyclic collector while building large acyclic structures.

    Builders allocate millions of small Fractions and tuples; full collections
    would rescan all of them repeatedly, which makes run time grow faster than
    the work itself.
    """
    was = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was:
            gc.enable()


# Coordinates above this bound switch the vectorized predicates to Python ints.
_INT64_SAFE = 2**30


class Kind(str, enum.Enum):
    ORIGINAL = "original"
    STEINER = "steiner"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class Vertex:
    id: int
    x: Fraction
    y: Fraction
    kind: Kind = Kind.ORIGINAL


class PlaneGraph:
    """Immutable vertex/edge container with cached numeric views."""

    def __init__(self, vertices: Iterable[Vertex], edges: Iterable[tuple[int, int]], meta: Optional[Mapping] = None):
        verts = tuple(sorted(vertices, key=lambda v: v.id))
        ids = [v.id for v in verts]
        if len(set(ids)) != len(ids):
            raise ValueError("vertex ids must be unique")
        self._vertices = verts
        self._index = {vid: i for i, vid in enumerate(ids)}
        norm = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if u not in self._index or v not in self._index:
                raise ValueError(f"edge ({u}, {v}) references a missing vertex")
            norm.add((u, v) if u < v else (v, u))
        self._edges = tuple(sorted(norm))
        self.meta = dict(meta or {})

    @property
    def vertices(self) -> tuple[Vertex, ...]:
        return self._vertices

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return self._edges

    def __len__(self):
        return len(self._vertices)

    def __repr__(self):
        counts = {k.value: 0 for k in Kind}
        for v in self._vertices:
            counts[v.kind.value] += 1
        return f"PlaneGraph(V={len(self._vertices)}, E={len(self._edges)}, {counts})"

    def index_of(self, vertex_id: int) -> int:
        return self._index[vertex_id]

    def vertex(self, vertex_id: int) -> Vertex:
        return self._vertices[self._index[vertex_id]]

    def ids_of_kind(self, kind: Kind) -> list[int]:
        return [v.id for v in self._vertices if v.kind == kind]

    @cached_property
    def xy(self) -> np.ndarray:
        arr = np.array([(float(v.x), float(v.y)) for v in self._vertices], dtype=float).reshape(-1, 2)
        arr.setflags(write=False)
        return arr

    @cached_property
    def edge_index(self) -> np.ndarray:
        arr = np.array([(self._index[u], self._index[v]) for u, v in self._edges], dtype=np.int64).reshape(-1, 2)
        arr.setflags(write=False)
        return arr

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        e = self.edge_index
        d = self.xy[e[:, 0]] - self.xy[e[:, 1]]
        out = np.hypot(d[:, 0], d[:, 1])
        out.setflags(write=False)
        return out

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.bincount(self.edge_index.ravel(), minlength=len(self._vertices))
        deg.setflags(write=False)
        return deg

    @cached_property
    def kinds(self) -> np.ndarray:
        return np.array([v.kind.value for v in self._vertices])

    def adjacency(self) -> dict[int, list[int]]:
        adj = {v.id: [] for v in self._vertices}
        for u, v in self._edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def is_connected(self) -> bool:
        if len(self._vertices) <= 1:
            return True
        n = len(self._vertices)
        e = self.edge_index
        mat = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
        ncomp, _ = connected_components(mat, directed=False)
        return ncomp == 1

    def exact_grid(self):
        """Vertex coordinates as integers over a common denominator ``(pts, den)``."""
        den = reduce(math.lcm, (c.denominator for v in self._vertices for c in (v.x, v.y)), 1)
        pts = [(int(v.x * den), int(v.y * den)) for v in self._vertices]
        return pts, den


# --------------------------------------------------------------------------
# exact predicates over integer arrays


def _as_int_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=object)
    if arr.size == 0:
        return np.zeros(arr.shape, dtype=np.int64)
    big = max(abs(int(x)) for x in arr.ravel())
    if big < _INT64_SAFE:
        return arr.astype(np.int64)
    return arr


def _sgn(a):
    return (a > 0).astype(np.int8) - (a < 0).astype(np.int8)


def _family(dx, dy):
    fam = np.full(len(dx), -1, dtype=np.int8)
    fam[dy == 0] = 0
    fam[dx == 0] = 1
    fam[(dx == dy) & (dx != 0)] = 2
    fam[(dx == -dy) & (dx != 0)] = 3
    return fam


def _line_key(fam, x, y):
    """(line constant, position along line) for each family."""
    if fam == 0:
        return y, x
    if fam == 1:
        return x, y
    if fam == 2:
        return y - x, x
    return y + x, x


def _split_on_lines(segs: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Elementary edges (index pairs into ``pts``) of the union of ``segs``.

    ``pts`` must contain every segment endpoint; every point that lies on a
    merged segment becomes a vertex of it.
    """
    dx = segs[:, 2] - segs[:, 0]
    dy = segs[:, 3] - segs[:, 1]
    fam = _family(dx, dy)
    if (fam < 0).any():
        raise ValueError("segments must be axis-parallel or diagonal")
    out = []
    for f in range(4):
        sel = fam == f
        if not sel.any():
            continue
        s = segs[sel]
        m = len(s)
        c_seg, t1 = _line_key(f, s[:, 0], s[:, 1])
        _, t2 = _line_key(f, s[:, 2], s[:, 3])
        lo = np.minimum(t1, t2)
        hi = np.maximum(t1, t2)
        c_pt, t_pt = _line_key(f, pts[:, 0], pts[:, 1])
        _, cinv = np.unique(np.concatenate([c_seg, c_pt]), return_inverse=True)
        tu, tinv = np.unique(np.concatenate([lo, hi, t_pt]), return_inverse=True)
        cinv = cinv.astype(np.int64)
        tinv = tinv.astype(np.int64)
        nt = len(tu)
        lo_k = cinv[:m] * nt + tinv[:m]
        hi_k = cinv[:m] * nt + tinv[m:2 * m]
        order = np.argsort(lo_k, kind="stable")
        lo_k = lo_k[order]
        hi_k = hi_k[order]
        run_max = np.maximum.accumulate(hi_k)
        starts = np.ones(m, dtype=bool)
        starts[1:] = lo_k[1:] > run_max[:-1]
        first = np.flatnonzero(starts)
        comp_start = lo_k[first]
        comp_end = np.maximum.reduceat(hi_k, first)
        pk = cinv[m:] * nt + tinv[2 * m:]
        porder = np.argsort(pk, kind="stable")
        pks = pk[porder]
        ci = np.searchsorted(comp_start, pks, side="right") - 1
        inside = (ci >= 0) & (pks <= comp_end[np.clip(ci, 0, None)])
        link = inside[:-1] & inside[1:] & (ci[:-1] == ci[1:])
        out.append(np.stack([porder[:-1][link], porder[1:][link]], axis=1))
    if not out:
        return np.zeros((0, 2), dtype=np.int64)
    return np.concatenate(out).astype(np.int64)


def _candidate_pairs(xy: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Edge pairs whose bounding regions share a uniform-grid cell (a superset of intersecting pairs)."""
    ne = len(edges)
    if ne < 2:
        return np.zeros((0, 2), dtype=np.int64)
    a = xy[edges[:, 0]]
    b = xy[edges[:, 1]]
    cheb = np.max(np.abs(b - a), axis=1)
    lo = xy.min(axis=0)
    extent = float(max(np.max(xy.max(axis=0) - lo), 1e-300))
    h = max(float(np.median(cheb)), extent / 4096.0)
    while True:
        pieces = np.maximum(np.ceil(cheb / h), 1).astype(np.int64)
        if pieces.sum() <= 8 * ne + 1_000_000:
            break
        h *= 2.0
    eid = np.repeat(np.arange(ne), pieces)
    start = np.cumsum(pieces) - pieces
    j = np.arange(len(eid)) - start[eid]
    m = pieces[eid].astype(float)
    pa = a[eid] + (b[eid] - a[eid]) * (j / m)[:, None]
    pb = a[eid] + (b[eid] - a[eid]) * ((j + 1) / m)[:, None]
    eps = 1e-9 * extent + 1e-12
    cmin = np.floor((np.minimum(pa, pb) - lo - eps) / h).astype(np.int64)
    cmax = np.floor((np.maximum(pa, pb) - lo + eps) / h).astype(np.int64)
    ncols = int(np.floor((extent + 2 * eps) / h)) + 4
    cells, owners = [], []
    for ox in range(3):
        for oy in range(3):
            cx = cmin[:, 0] + ox
            cy = cmin[:, 1] + oy
            ok = (cx <= cmax[:, 0]) & (cy <= cmax[:, 1])
            cells.append((cx[ok] + 1) * ncols + (cy[ok] + 1))
            owners.append(eid[ok])
    key = np.unique(np.concatenate(cells) * ne + np.concatenate(owners))
    cell = key // ne
    own = key % ne
    found = []
    k = 1
    while k < len(cell):
        same = cell[k:] == cell[:-k]
        if not same.any():
            break
        found.append(np.stack([own[:-k][same], own[k:][same]], axis=1))
        k += 1
    if not found:
        return np.zeros((0, 2), dtype=np.int64)
    pairs = np.concatenate(found)
    pairs = np.sort(pairs, axis=1)
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    return np.unique(pairs, axis=0)


@dataclass
class Intersections:
    """Edge pairs whose intersection is more than a shared endpoint."""

    pairs: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=np.int64))
    proper: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    def __len__(self):
        return len(self.pairs)

    @property
    def n_proper(self) -> int:
        return int(self.proper.sum())


def find_intersections(pts: np.ndarray, edges: np.ndarray) -> Intersections:
    """All edge pairs meeting anywhere other than a common endpoint, decided exactly.

    ``pts`` holds integer coordinates (int64 or Python ints in an object array).
    """
    if len(edges) < 2:
        return Intersections()
    cand = _candidate_pairs(pts.astype(float), edges)
    if len(cand) == 0:
        return Intersections()
    e1 = edges[cand[:, 0]]
    e2 = edges[cand[:, 1]]
    ia, ib, ic, idd = e1[:, 0], e1[:, 1], e2[:, 0], e2[:, 1]
    A, B, C, D = pts[ia], pts[ib], pts[ic], pts[idd]

    def orient(p, q, r):
        return (q[:, 0] - p[:, 0]) * (r[:, 1] - p[:, 1]) - (q[:, 1] - p[:, 1]) * (r[:, 0] - p[:, 0])

    o1, o2 = _sgn(orient(A, B, C)), _sgn(orient(A, B, D))
    o3, o4 = _sgn(orient(C, D, A)), _sgn(orient(C, D, B))
    shared = (ia == ic) | (ia == idd) | (ib == ic) | (ib == idd)
    collinear = (o1 == 0) & (o2 == 0)
    meet = (o1 * o2 <= 0) & (o3 * o4 <= 0) & ~collinear
    bad = meet & ~shared
    proper = (o1 * o2 < 0) & (o3 * o4 < 0)
    if collinear.any():
        axis = np.where(A[:, 0] != B[:, 0], 0, 1)
        rows = np.arange(len(A))
        a_ = A[rows, axis]
        b_ = B[rows, axis]
        c_ = C[rows, axis]
        d_ = D[rows, axis]
        lo = np.maximum(np.minimum(a_, b_), np.minimum(c_, d_))
        hi = np.minimum(np.maximum(a_, b_), np.maximum(c_, d_))
        overl = (lo < hi) | ((lo == hi) & ~shared)
        bad = bad | (collinear & overl)
    return Intersections(cand[bad], proper[bad])


def _crossing_point(pts, edges, pair):
    a, b = (pts[i] for i in edges[pair[0]])
    c, d = (pts[i] for i in edges[pair[1]])
    a = [int(v) for v in a]
    b = [int(v) for v in b]
    c = [int(v) for v in c]
    d = [int(v) for v in d]
    s1 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    s2 = (b[0] - a[0]) * (d[1] - a[1]) - (b[1] - a[1]) * (d[0] - a[0])
    t = Fraction(s1, s1 - s2)
    return (c[0] + (d[0] - c[0]) * t, c[1] + (d[1] - c[1]) * t)


@dataclass
class Assembly:
    pts: np.ndarray  # integer coordinates in units of 1/den of the input grid
    edges: np.ndarray
    den: int
    crossings: int  # proper crossings found (and repaired when requested)
    repaired: bool


def assemble_segments(segments, anchors=(), repair: bool = True) -> Assembly:
    """Plane graph from integer segments at multiples of 45 degrees.

    ``anchors`` are extra points that must appear as vertices (isolated or on a
    segment). Zero-length segments are ignored.
    """
    segs = _as_int_array(np.asarray(segments, dtype=object).reshape(-1, 4))
    segs = segs[(segs[:, 0] != segs[:, 2]) | (segs[:, 1] != segs[:, 3])]
    anc = _as_int_array(np.asarray(anchors, dtype=object).reshape(-1, 2))
    den = 1
    extra: list[tuple[Fraction, Fraction]] = []
    crossings = 0
    for _ in range(4):
        allpts = np.concatenate([segs[:, :2], segs[:, 2:], anc]) if len(segs) else anc
        if extra:
            allpts = np.concatenate([allpts, _as_int_array(np.array(extra, dtype=object).reshape(-1, 2))])
        if len(allpts) == 0:
            return Assembly(np.zeros((0, 2), dtype=np.int64), np.zeros((0, 2), dtype=np.int64), den, 0, repair)
        allpts = _as_int_array(allpts)
        pts = np.unique(allpts, axis=0) if allpts.dtype != object else _unique_rows_object(allpts)
        edges = _split_on_lines(segs, pts) if len(segs) else np.zeros((0, 2), dtype=np.int64)
        hits = find_intersections(pts, edges)
        if len(hits) == 0:
            return Assembly(pts, edges, den, crossings, repair)
        if hits.n_proper != len(hits):
            raise InternalInvariantViolation("assembly left a touching or overlapping edge pair")
        if crossings == 0:
            crossings = len(hits)
        if not repair:
            return Assembly(pts, edges, den, crossings, False)
        points = [_crossing_point(pts, edges, pair) for pair in hits.pairs]
        mult = reduce(math.lcm, (c.denominator for p in points for c in p), 1)
        if mult != 1:
            segs = _as_int_array(segs.astype(object) * mult)
            anc = _as_int_array(anc.astype(object) * mult)
            extra = [(x * mult, y * mult) for x, y in extra]
            den *= mult
        extra.extend((int(x * mult), int(y * mult)) for x, y in points)
    raise InternalInvariantViolation("crossing repair did not converge")


def _unique_rows_object(arr):
    rows = sorted(set((int(x), int(y)) for x, y in arr))
    return np.array(rows, dtype=object).reshape(-1, 2)


def graph_from_assembly(asm: Assembly, scale: int, kind_of, id_of, meta=None) -> PlaneGraph:
    """Wrap an :class:`Assembly` whose input grid is ``scale`` units per coordinate unit.

    ``kind_of(ix, iy)`` and ``id_of(ix, iy)`` receive grid coordinates of the
    input scale (possibly Fractions after repair); ``id_of`` returns an
    original id or None.
    """
    den = asm.den
    vertices = []
    idx_to_id = {}
    pending = []
    for i, (gx, gy) in enumerate(asm.pts):
        gx, gy = int(gx), int(gy)
        key = (Fraction(gx, den), Fraction(gy, den))
        vid = id_of(*key)
        if vid is None:
            pending.append((Fraction(gx, den * scale), Fraction(gy, den * scale), i, key))
        else:
            idx_to_id[i] = vid
            vertices.append(Vertex(vid, Fraction(gx, den * scale), Fraction(gy, den * scale), Kind.ORIGINAL))
    next_id = max((v.id for v in vertices), default=-1) + 1
    for x, y, i, key in sorted(pending):
        idx_to_id[i] = next_id
        vertices.append(Vertex(next_id, x, y, kind_of(*key)))
        next_id += 1
    edges = [(idx_to_id[int(u)], idx_to_id[int(v)]) for u, v in asm.edges]
    return PlaneGraph(vertices, edges, meta)


def graph_intersections(graph: PlaneGraph) -> Intersections:
    """Exact planarity audit of an existing graph."""
    pts, _ = graph.exact_grid()
    arr = _as_int_array(np.array(pts, dtype=object).reshape(-1, 2))
    return find_intersections(arr, graph.edge_index)


def check_plane_graph(graph: PlaneGraph) -> dict:
    """Summary of PlaneGraph invariant violations (all zero for a valid graph)."""
    hits = graph_intersections(graph)
    zero = sum(1 for u, v in graph.edges if graph.vertex(u).x == graph.vertex(v).x and graph.vertex(u).y == graph.vertex(v).y)
    deg = graph.degrees
    lonely = sum(1 for i, v in enumerate(graph.vertices) if v.kind != Kind.ORIGINAL and deg[i] == 0)
    return {
        "crossings": len(hits),
        "proper_crossings": hits.n_proper,
        "zero_length_edges": zero,
        "isolated_non_original": lonely,
    }
