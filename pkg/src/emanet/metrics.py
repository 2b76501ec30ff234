"""Spanner quality measures of a :class:`PlaneGraph`."""
from __future__ import annotations

import heapq
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import EmptyGraph
from .graph import Kind, PlaneGraph


@dataclass(frozen=True)
class MetricsReport:
    point_count: int
    steiner_points: int
    boundary_points: int
    max_degree: float
    avg_degree: float
    edge_count: int
    max_edge_len: float
    avg_edge_len: float
    total_edge_len: float
    min_angle_deg: float
    spanning_ratio: float
    witness_pair: Optional[tuple]

    def as_dict(self):
        d = asdict(self)
        d["witness_pair"] = list(self.witness_pair) if self.witness_pair else None
        return d


def shortest_paths_from(graph: PlaneGraph, source: int) -> dict:
    """Dijkstra distances from ``source`` to every vertex id (inf if unreachable)."""
    adj = graph.adjacency()
    if source not in adj:
        raise KeyError(f"vertex {source} not in graph")
    w = {}
    for (u, v), length in zip(graph.edges, graph.edge_lengths.tolist()):
        w[(u, v)] = w[(v, u)] = length
    dist = {v.id: math.inf for v in graph.vertices}
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v in adj[u]:
            nd = d + w[(u, v)]
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def _csgraph(graph: PlaneGraph):
    n = len(graph.vertices)
    e = graph.edge_index
    if len(e) == 0:
        return csr_matrix((n, n))
    lens = graph.edge_lengths
    return csr_matrix((lens, (e[:, 0], e[:, 1])), shape=(n, n))


def spanning_ratio(graph: PlaneGraph, block: int = 256):
    """Largest ``d_G / d_E`` over pairs of original vertices, with the pair attaining it.

    Returns ``(1.0, None)`` with fewer than two originals and ``(inf, pair)``
    when some pair is disconnected.
    """
    kinds = graph.kinds
    orig = np.flatnonzero(kinds == Kind.ORIGINAL.value)
    if len(orig) < 2:
        return 1.0, None
    g = _csgraph(graph)
    xy = graph.xy
    ids = [v.id for v in graph.vertices]
    best, pair = -1.0, None
    for s in range(0, len(orig), block):
        src = orig[s:s + block]
        dist = dijkstra(g, directed=False, indices=src)[:, orig]
        de = np.hypot(xy[src, 0][:, None] - xy[orig, 0][None, :], xy[src, 1][:, None] - xy[orig, 1][None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(de > 0, dist / np.where(de > 0, de, 1.0), 0.0)
        k = int(np.argmax(r))
        i, j = divmod(k, len(orig))
        if r[i, j] > best:
            best = float(r[i, j])
            a, b = ids[src[i]], ids[orig[j]]
            pair = (min(a, b), max(a, b))
    # float rounding can put a straight path a hair below 1
    return max(best, 1.0), pair


def min_angle(graph: PlaneGraph) -> float:
    """Smallest angle in degrees between cyclically consecutive edges at any vertex.

    Vertices of degree 0 are skipped; a lone edge end contributes 360.
    """
    if len(graph.edges) == 0:
        raise EmptyGraph("graph has no edges")
    e = graph.edge_index
    # edge vectors are differenced exactly before rounding: short edges far from
    # the origin would otherwise lose most of their digits
    pts, _ = graph.exact_grid()
    dx = np.array([float(pts[v][0] - pts[u][0]) for u, v in e.tolist()]).reshape(-1)
    dy = np.array([float(pts[v][1] - pts[u][1]) for u, v in e.tolist()]).reshape(-1)
    # both orientations of every edge, grouped by tail vertex
    tail = np.concatenate([e[:, 0], e[:, 1]])
    ang = np.degrees(np.arctan2(np.concatenate([dy, -dy]), np.concatenate([dx, -dx]))) % 360.0
    order = np.lexsort((ang, tail))
    tail, ang = tail[order], ang[order]
    start = np.r_[True, tail[1:] != tail[:-1]]
    nxt = np.roll(ang, -1)
    last = np.r_[start[1:], True]
    # wrap-around: the last edge of a group pairs with the first one
    firsts = ang[start]
    group = np.cumsum(start) - 1
    nxt = np.where(last, firsts[group] + 360.0, nxt)
    return float(np.min(nxt - ang))


def metrics_report(graph: PlaneGraph) -> MetricsReport:
    kinds = graph.kinds
    deg = graph.degrees
    lens = graph.edge_lengths
    n_v = len(graph.vertices)
    m = len(graph.edges)
    ratio, witness = spanning_ratio(graph)
    try:
        angle = min_angle(graph)
    except EmptyGraph:
        angle = 360.0
    return MetricsReport(
        point_count=int(np.sum(kinds == Kind.ORIGINAL.value)),
        steiner_points=int(np.sum(kinds == Kind.STEINER.value)),
        boundary_points=int(np.sum(kinds == Kind.BOUNDARY.value)),
        max_degree=float(deg.max()) if n_v else 0.0,
        avg_degree=2.0 * m / n_v if n_v else 0.0,
        edge_count=m,
        max_edge_len=float(lens.max()) if m else 0.0,
        avg_edge_len=float(lens.mean()) if m else 0.0,
        total_edge_len=float(lens.sum()),
        min_angle_deg=angle,
        spanning_ratio=ratio,
        witness_pair=witness,
    )
