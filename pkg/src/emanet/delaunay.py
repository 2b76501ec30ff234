"""Delaunay baseline and import of meshes written by Shewchuk's Triangle."""
from __future__ import annotations

import random
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .emanation import check_points
from .errors import DegenerateInput, ParseError
from .geom import Point, format_coord
from .graph import Kind, PlaneGraph, Vertex
from .rangetree import grid_scale

GHOST = -1


def _orient(P, a, b, c):
    (ax, ay), (bx, by), (cx, cy) = P[a], P[b], P[c]
    v = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return (v > 0) - (v < 0)


def _incircle(P, a, b, c, d):
    """> 0 when d is strictly inside the circle through the ccw triangle abc."""
    (dx, dy) = P[d]
    ax, ay = P[a][0] - dx, P[a][1] - dy
    bx, by = P[b][0] - dx, P[b][1] - dy
    cx, cy = P[c][0] - dx, P[c][1] - dy
    det = ((ax * ax + ay * ay) * (bx * cy - cx * by)
           - (bx * bx + by * by) * (ax * cy - cx * ay)
           + (cx * cx + cy * cy) * (ax * by - bx * ay))
    return (det > 0) - (det < 0)


def _between(P, a, b, p):
    (ax, ay), (bx, by), (px, py) = P[a], P[b], P[p]
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


def _canon(t):
    """Rotate a triangle so a ghost vertex, if any, comes last."""
    a, b, c = t
    if a == GHOST:
        return (b, c, a)
    if b == GHOST:
        return (c, a, b)
    return t


class _Mesh:
    def __init__(self, P):
        self.P = P
        self.tris: set = set()
        self.edge: dict = {}  # directed edge -> triangle holding it

    def add(self, t):
        t = _canon(t)
        self.tris.add(t)
        a, b, c = t
        self.edge[(a, b)] = self.edge[(b, c)] = self.edge[(c, a)] = t

    def remove(self, t):
        self.tris.discard(t)
        a, b, c = t
        for e in ((a, b), (b, c), (c, a)):
            if self.edge.get(e) == t:
                del self.edge[e]

    def conflict(self, t, p) -> bool:
        a, b, c = t
        if c == GHOST:
            o = _orient(self.P, a, b, p)
            return o > 0 or (o == 0 and _between(self.P, a, b, p))
        return _incircle(self.P, a, b, c, p) > 0

    def locate(self, start, p):
        t = start
        for _ in range(4 * len(self.tris) + 8):
            a, b, c = t
            if c == GHOST:
                return t
            for u, v in ((a, b), (b, c), (c, a)):
                if _orient(self.P, u, v, p) < 0:
                    t = self.edge[(v, u)]
                    break
            else:
                return t
        # a walk can only cycle on non-Delaunay meshes; fall back to a scan
        return next(s for s in sorted(self.tris) if self.conflict(s, p))

    def insert(self, p, start):
        t0 = self.locate(start, p)
        if not self.conflict(t0, p):
            t0 = next(s for s in sorted(self.tris) if self.conflict(s, p))
        cavity = {t0}
        stack = [t0]
        while stack:
            t = stack.pop()
            a, b, c = t
            for u, v in ((a, b), (b, c), (c, a)):
                n = self.edge.get((v, u))
                if n is not None and n not in cavity and self.conflict(n, p):
                    cavity.add(n)
                    stack.append(n)
        rim = []
        for t in cavity:
            a, b, c = t
            for u, v in ((a, b), (b, c), (c, a)):
                if self.edge.get((v, u)) not in cavity:
                    rim.append((u, v))
        for t in cavity:
            self.remove(t)
        last = None
        for u, v in rim:
            t = _canon((u, v, p))
            self.add(t)
            if t[2] != GHOST:
                last = t
        return last


def _lex_flip(mesh: _Mesh):
    """Flip co-circular diagonals toward the lexicographically smaller one."""
    P = mesh.P

    def key(u, v):
        return tuple(sorted((P[u], P[v])))

    flips = 0
    changed = True
    while changed:
        changed = False
        for t in sorted(mesh.tris):
            if t not in mesh.tris or GHOST in t:
                continue
            a, b, c = t
            for u, v, w in ((a, b, c), (b, c, a), (c, a, b)):
                n = mesh.edge.get((v, u))
                if n is None or GHOST in n:
                    continue
                x = next(z for z in n if z not in (u, v))
                if _incircle(P, u, v, w, x) != 0 or not key(w, x) < key(u, v):
                    continue
                mesh.remove(t)
                mesh.remove(n)
                mesh.add((w, u, x))
                mesh.add((x, v, w))
                flips += 1
                changed = True
                break
    return flips


def delaunay_triangles(points: Sequence[Point], seed: int = 0):
    """Triangles (id triples, counter-clockwise) of the Delaunay triangulation.

    Returns ``(triangles, flips)`` where ``flips`` counts co-circular
    tie-break flips. Raises :class:`DegenerateInput` for fewer than 3 points or
    a collinear set.
    """
    pts = check_points(points)
    if len(pts) < 3:
        raise DegenerateInput("fewer than 3 points")
    s = grid_scale(pts)
    P = [(int(p.x * s), int(p.y * s)) for p in pts]
    n = len(P)
    a, b = 0, 1
    c = next((k for k in range(2, n) if _orient(P, a, b, k) != 0), None)
    if c is None:
        raise DegenerateInput("all points are collinear")
    if _orient(P, a, b, c) < 0:
        a, b = b, a
    mesh = _Mesh(P)
    mesh.add((a, b, c))
    for u, v in ((a, b), (b, c), (c, a)):
        mesh.add((v, u, GHOST))
    rest = [k for k in range(n) if k not in (a, b, c)]
    random.Random(seed).shuffle(rest)
    last = (a, b, c)
    for k in rest:
        last = mesh.insert(k, last) or last
    flips = _lex_flip(mesh)
    ids = [p.id for p in pts]
    tris = sorted(tuple(ids[i] for i in t) for t in mesh.tris if GHOST not in t)
    return tris, flips


def _path_graph(pts, meta):
    order = sorted(pts, key=lambda p: (p.x, p.y))
    vertices = [Vertex(p.id, p.x, p.y, Kind.ORIGINAL) for p in pts]
    edges = [(u.id, v.id) for u, v in zip(order, order[1:])]
    return PlaneGraph(vertices, edges, meta)


def delaunay(points: Sequence[Point]) -> PlaneGraph:
    """Delaunay triangulation as a plane graph; co-circular ties take the lexicographically smallest diagonal."""
    pts = check_points(points)
    meta = {"algorithm": "delaunay", "cocircular_rule": "lexicographically smallest diagonal"}
    try:
        tris, flips = delaunay_triangles(pts)
    except DegenerateInput as exc:
        warnings.warn(f"{exc}; returning a path graph", DegenerateInput, stacklevel=2)
        meta["degenerate"] = str(exc)
        return _path_graph(pts, meta)
    edges = set()
    for a, b, c in tris:
        for u, v in ((a, b), (b, c), (c, a)):
            edges.add((min(u, v), max(u, v)))
    meta["cocircular_flips"] = flips
    meta["triangles"] = len(tris)
    vertices = [Vertex(p.id, p.x, p.y, Kind.ORIGINAL) for p in pts]
    return PlaneGraph(vertices, sorted(edges), meta)


# --------------------------------------------------------------------------
# Triangle .node / .ele files


@dataclass(frozen=True)
class TriangleMeshFiles:
    node_text: str
    ele_text: str

    @classmethod
    def read(cls, stem) -> "TriangleMeshFiles":
        stem = str(stem)
        with open(stem + ".node") as f_node, open(stem + ".ele") as f_ele:
            return cls(f_node.read(), f_ele.read())


def _records(text: str, what: str):
    """Non-comment, non-blank lines as ``(line number, fields)``."""
    out = []
    for no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if line:
            out.append((no, line.split()))
    if not out:
        raise ParseError(f"empty {what} file", 1)
    return out


def _int(tok, no, what):
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"expected an integer {what}, got {tok!r}", no) from None


def parse_node(text: str):
    """``(list of (index, x, y), first index)`` from a .node payload."""
    recs = _records(text, ".node")
    no, head = recs[0]
    if len(head) < 2:
        raise ParseError("node header needs at least <#points> <dim>", no)
    count = _int(head[0], no, "point count")
    dim = _int(head[1], no, "dimension")
    attrs = _int(head[2], no, "attribute count") if len(head) > 2 else 0
    markers = _int(head[3], no, "marker count") if len(head) > 3 else 0
    if dim != 2:
        raise ParseError(f"dimension must be 2, got {dim}", no)
    body = recs[1:]
    if len(body) != count:
        last = body[-1][0] if body else no
        raise ParseError(f"header announces {count} nodes, found {len(body)}", last)
    nodes = []
    for no, f in body:
        if len(f) < 3 + attrs + markers:
            raise ParseError(f"node record needs {3 + attrs + markers} fields, got {len(f)}", no)
        try:
            x, y = Fraction(f[1]), Fraction(f[2])
        except ValueError:
            raise ParseError(f"bad coordinate in {' '.join(f[:3])!r}", no) from None
        nodes.append((_int(f[0], no, "node index"), x, y, no))
    base = nodes[0][0] if nodes else 0
    if base not in (0, 1):
        raise ParseError(f"node indices must start at 0 or 1, got {base}", nodes[0][3])
    for k, (idx, _, _, no) in enumerate(nodes):
        if idx != base + k:
            raise ParseError(f"node index {idx} out of sequence (expected {base + k})", no)
    return [(i, x, y) for i, x, y, _ in nodes], base


def parse_ele(text: str, base: int, n_nodes: int):
    recs = _records(text, ".ele")
    no, head = recs[0]
    count = _int(head[0], no, "triangle count")
    per = _int(head[1], no, "nodes per triangle") if len(head) > 1 else 3
    if per not in (3, 6):
        raise ParseError(f"nodes per triangle must be 3 or 6, got {per}", no)
    body = recs[1:]
    if len(body) != count:
        last = body[-1][0] if body else no
        raise ParseError(f"header announces {count} triangles, found {len(body)}", last)
    tris = []
    for no, f in body:
        if len(f) < 1 + per:
            raise ParseError(f"triangle record needs {1 + per} fields, got {len(f)}", no)
        corners = [_int(t, no, "vertex index") - base for t in f[1:4]]
        if any(not 0 <= c < n_nodes for c in corners):
            raise ParseError(f"triangle refers to a missing node in {' '.join(f[1:4])!r}", no)
        tris.append(tuple(corners))
    return tris


def import_triangle(files: TriangleMeshFiles, originals: Optional[Sequence[Point]] = None) -> PlaneGraph:
    """Plane graph of a Triangle mesh.

    Nodes whose coordinates equal an input point keep that point's id and are
    originals; every other node is a steiner vertex. Without ``originals`` all
    nodes count as originals and ids follow the file's 0-based order.
    """
    nodes, base = parse_node(files.node_text)
    tris = parse_ele(files.ele_text, base, len(nodes))
    if originals is None:
        ids = list(range(len(nodes)))
        kinds = [Kind.ORIGINAL] * len(nodes)
    else:
        by_xy = {(p.x, p.y): p.id for p in originals}
        nxt = max(by_xy.values(), default=-1) + 1
        ids, kinds = [], []
        for _, x, y in nodes:
            if (x, y) in by_xy:
                ids.append(by_xy[(x, y)])
                kinds.append(Kind.ORIGINAL)
            else:
                ids.append(nxt)
                kinds.append(Kind.STEINER)
                nxt += 1
    vertices = [Vertex(i, x, y, k) for i, (_, x, y), k in zip(ids, nodes, kinds)]
    edges = set()
    for a, b, c in tris:
        for u, v in ((a, b), (b, c), (c, a)):
            edges.add((min(ids[u], ids[v]), max(ids[u], ids[v])))
    meta = {"algorithm": "triangle-import", "index_base": base, "triangles": len(tris)}
    return PlaneGraph(vertices, sorted(edges), meta)


def points_to_node(points: Sequence[Point]) -> str:
    """A 0-based .node payload of ``points`` (input for Triangle)."""
    lines = [f"{len(points)} 2 0 0"]
    lines += [f"{k} {format_coord(p.x)} {format_coord(p.y)}" for k, p in enumerate(points)]
    return "\n".join(lines) + "\n"
