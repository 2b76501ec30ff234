"""Slow, independent reference implementations used by the tests.

Nothing here shares code paths with the package internals beyond the exact
scalar helpers in ``emanet.geom``.
"""
from __future__ import annotations

import math
from fractions import Fraction

from emanet.geom import DIRS, RayTime, ray_time


def brute_force_rays(points, grade, bbox):
    """Ray stop parameters by repeated global minimum search.

    Every round computes, for each undecided ray, its earliest possible stop
    given what is already decided (undecided rays are assumed to run to the
    box). The rays achieving the global minimum are final. Returns a dict
    ``(owner id, dir) -> (stop point, RayTime)``. Ties use the lexicographic rule.
    """
    dirs = [0, 2, 4, 6] if grade == 1 else list(range(8))
    pts = sorted(points, key=lambda p: p.id)
    rays = [(p, d) for p in pts for d in dirs]
    R = len(rays)

    def box_param(p, d):
        vx, vy = DIRS[d]
        lims = []
        if vx > 0:
            lims.append(bbox.xmax - p.x)
        if vx < 0:
            lims.append(p.x - bbox.xmin)
        if vy > 0:
            lims.append(bbox.ymax - p.y)
        if vy < 0:
            lims.append(p.y - bbox.ymin)
        return min(lims)

    smax = [box_param(p, d) for p, d in rays]
    entries = [[] for _ in range(R)]
    partners = [[] for _ in range(R)]
    for r, (p, d) in enumerate(rays):
        vx, vy = DIRS[d]
        for q_i, (q, e) in enumerate(rays):
            if q.id == p.id:
                continue
            ux, uy = DIRS[e]
            wx, wy = q.x - p.x, q.y - p.y
            cr = vx * uy - vy * ux
            if cr != 0:
                s_r = Fraction(wx * uy - wy * ux, cr)
                s_q = Fraction(wx * vy - wy * vx, cr)
                if s_r >= 0 and s_q >= 0 and s_r <= smax[r] and s_q <= smax[q_i]:
                    entries[r].append((ray_time(s_r, d), s_r, q_i, s_q))
                continue
            if wx * vy - wy * vx != 0:
                continue
            along = Fraction(wx * vx + wy * vy, vx * vx + vy * vy)
            if along <= 0:
                continue
            if (ux, uy) == (vx, vy):
                if along <= smax[r]:
                    entries[r].append((ray_time(along, d), along, q_i, Fraction(0)))
            else:
                partners[r].append((q_i, along))
        entries[r].sort(key=lambda e: (float(e[0]), e[1]))
        # exact order (float ties are re-sorted exactly)
        entries[r].sort(key=_ExactKey)

    ext = [None] * R
    ptr = [0] * R
    undecided = set(range(R))

    def extent(q):
        return ext[q] if ext[q] is not None else smax[q]

    while undecided:
        best = {}
        for r in undecided:
            p, d = rays[r]
            cand = (ray_time(smax[r], d), smax[r])
            lst = entries[r]
            k = ptr[r]
            while k < len(lst):
                t_r, s_r, q, s_q = lst[k]
                t_q = ray_time(s_q, rays[q][1])
                if extent(q) >= s_q and (t_q < t_r or (t_q == t_r and r > q)):
                    break
                k += 1
            ptr[r] = k
            if k < len(lst) and lst[k][0] < cand[0]:
                cand = (lst[k][0], lst[k][1])
            for q, gap in partners[r]:
                s = max(gap / 2, gap - extent(q))
                t = ray_time(s, d)
                if t < cand[0]:
                    cand = (t, s)
            best[r] = cand
        tmin = min((c[0] for c in best.values()), key=_ExactKey)
        for r, (t, s) in best.items():
            if t == tmin:
                ext[r] = s
                undecided.discard(r)
    out = {}
    for r, (p, d) in enumerate(rays):
        vx, vy = DIRS[d]
        s = ext[r]
        out[(p.id, d)] = ((p.x + s * vx, p.y + s * vy), ray_time(s, d))
    return out


class _ExactKey:
    """Sort key comparing RayTime (or tuples led by one) exactly."""

    def __init__(self, item):
        self.t = item[0] if isinstance(item, tuple) else item

    def __lt__(self, other):
        return self.t < other.t


def bellman_ford(graph, source):
    """Single-source distances by edge relaxation; O(VE)."""
    dist = {v.id: math.inf for v in graph.vertices}
    dist[source] = 0.0
    lengths = {}
    for (u, v), w in zip(graph.edges, graph.edge_lengths):
        lengths[(u, v)] = float(w)
    for _ in range(len(graph.vertices)):
        changed = False
        for (u, v), w in lengths.items():
            if dist[u] + w < dist[v]:
                dist[v] = dist[u] + w
                changed = True
            if dist[v] + w < dist[u]:
                dist[u] = dist[v] + w
                changed = True
        if not changed:
            break
    return dist


def brute_force_crossings(graph):
    """Count edge pairs meeting other than at a shared endpoint, all pairs checked exactly."""
    pos = {v.id: (v.x, v.y) for v in graph.vertices}

    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return (v > 0) - (v < 0)

    def on_seg(a, b, c):
        return min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])

    bad = 0
    edges = list(graph.edges)
    for i in range(len(edges)):
        u1, v1 = edges[i]
        a, b = pos[u1], pos[v1]
        for j in range(i + 1, len(edges)):
            u2, v2 = edges[j]
            c, d = pos[u2], pos[v2]
            shared = {u1, v1} & {u2, v2}
            o1, o2, o3, o4 = orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b)
            if o1 == o2 == 0:
                # collinear: bad if the overlap is more than a shared endpoint
                pts = sorted([a, b, c, d])
                lo = max(min(a, b), min(c, d))
                hi = min(max(a, b), max(c, d))
                if lo < hi or (lo == hi and not shared):
                    bad += 1
                continue
            if shared:
                continue
            if o1 * o2 <= 0 and o3 * o4 <= 0:
                if o1 == 0 and not on_seg(a, b, c):
                    continue
                if o2 == 0 and not on_seg(a, b, d):
                    continue
                bad += 1
    return bad
