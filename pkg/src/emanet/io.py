"""Point generation, JSON/CSV files and SVG rendering."""
from __future__ import annotations

import csv
import io as _io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence
from xml.sax.saxutils import quoteattr

import numpy as np

from .errors import ParseError
from .geom import Point, as_coord, format_coord
from .graph import Kind, PlaneGraph, Vertex

SIDE = 1000
SNAP = 1000  # grid points per unit
GENERATORS = ("uniform", "clustered")


def generate_points(n: int, seed: int, model: str = "uniform") -> list[Point]:
    """``n`` distinct points in ``[0, 1000]^2`` on the 1/1000 grid, deterministic per seed."""
    if n < 1:
        raise ValueError("n must be positive")
    if model not in GENERATORS:
        raise ValueError(f"unknown point model {model!r}")
    rng = np.random.default_rng(seed)
    if model == "clustered":
        centers = rng.uniform(0, SIDE, size=(math.ceil(n / 50), 2))

    def draw(m):
        if model == "uniform":
            raw = rng.uniform(0, SIDE, size=(m, 2))
        else:
            which = rng.integers(0, len(centers), size=m)
            raw = np.clip(centers[which] + rng.normal(0, 40.0, size=(m, 2)), 0, SIDE)
        return np.rint(raw * SNAP).astype(np.int64)

    seen: set = set()
    out: list = []
    while len(out) < n:
        for x, y in draw(n - len(out)).tolist():
            if (x, y) not in seen:
                seen.add((x, y))
                out.append((x, y))
    return [Point(i, Fraction(x, SNAP), Fraction(y, SNAP)) for i, (x, y) in enumerate(out)]


# --------------------------------------------------------------------------
# point files


def points_to_json(points: Sequence[Point], meta: Optional[dict] = None) -> str:
    doc = {
        "points": [{"id": p.id, "x": format_coord(p.x), "y": format_coord(p.y)} for p in points],
        "meta": meta or {},
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def points_to_csv(points: Sequence[Point]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "x", "y"])
    for p in points:
        w.writerow([p.id, format_coord(p.x), format_coord(p.y)])
    return buf.getvalue()


def _coord(text, line):
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        # JSON numbers: go through their decimal text so 0.1 stays 1/10
        text = repr(text)
    try:
        return as_coord(text)
    except (ValueError, TypeError, ZeroDivisionError):
        raise ParseError(f"bad coordinate {text!r}", line) from None


def _unique(points):
    ids = [p.id for p in points]
    if len(set(ids)) != len(ids):
        raise ParseError("duplicate point ids", 1)
    return points


def points_from_json(text: str) -> list[Point]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from None
    if not isinstance(doc, dict) or not isinstance(doc.get("points"), list):
        raise ParseError("expected an object with a 'points' list", 1)
    pts = []
    for k, rec in enumerate(doc["points"]):
        try:
            pts.append(Point(int(rec["id"]), _coord(rec["x"], 1), _coord(rec["y"], 1)))
        except (KeyError, TypeError, ValueError):
            raise ParseError(f"point #{k} needs id, x and y", 1) from None
    return _unique(pts)


def points_from_csv(text: str) -> list[Point]:
    rows = list(csv.reader(_io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["id", "x", "y"]:
        raise ParseError("CSV header must be id,x,y", 1)
    pts = []
    for no, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise ParseError(f"expected 3 fields, got {len(row)}", no)
        try:
            pid = int(row[0])
        except ValueError:
            raise ParseError(f"bad id {row[0]!r}", no) from None
        pts.append(Point(pid, _coord(row[1].strip(), no), _coord(row[2].strip(), no)))
    return _unique(pts)


def read_points(path) -> list[Point]:
    with open(path) as f:
        text = f.read()
    if str(path).lower().endswith(".csv"):
        return points_from_csv(text)
    return points_from_json(text)


def write_points(path, points: Sequence[Point], meta: Optional[dict] = None) -> None:
    text = points_to_csv(points) if str(path).lower().endswith(".csv") else points_to_json(points, meta)
    with open(path, "w") as f:
        f.write(text)


# --------------------------------------------------------------------------
# graph files


def graph_to_json(graph: PlaneGraph) -> str:
    doc = {
        "vertices": [{"id": v.id, "x": format_coord(v.x), "y": format_coord(v.y), "kind": v.kind.value}
                     for v in graph.vertices],
        "edges": [list(e) for e in graph.edges],
        "meta": graph.meta,
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def graph_from_json(text: str) -> PlaneGraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from None
    try:
        vertices = [Vertex(int(v["id"]), _coord(v["x"], 1), _coord(v["y"], 1), Kind(v["kind"])) for v in doc["vertices"]]
        edges = [(int(u), int(v)) for u, v in doc["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed graph file: {exc}", 1) from None
    try:
        return PlaneGraph(vertices, edges, doc.get("meta", {}))
    except ValueError as exc:
        raise ParseError(str(exc), 1) from None


def read_graph(path) -> PlaneGraph:
    with open(path) as f:
        return graph_from_json(f.read())


def write_graph(path, graph: PlaneGraph) -> None:
    with open(path, "w") as f:
        f.write(graph_to_json(graph))


# --------------------------------------------------------------------------
# SVG


@dataclass(frozen=True)
class SvgStyle:
    width: int = 800
    edge_color: str = "#1f4e9c"
    original_color: str = "#000000"
    steiner_color: str = "#d03030"
    boundary_color: str = "#808080"
    size: float = 0.006  # marker size as a fraction of the larger bbox side
    stroke: float = 0.0015


def _num(v: float) -> str:
    s = f"{v:.4f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def render_svg(graph: PlaneGraph, style: SvgStyle = SvgStyle()) -> str:
    """Flat SVG: one element per edge and per vertex under the root, ordered by id."""
    if not graph.vertices:
        raise ValueError("cannot render an empty graph")
    xy = graph.xy
    xmin, ymin = xy.min(axis=0)
    xmax, ymax = xy.max(axis=0)
    span = max(xmax - xmin, ymax - ymin) or 1.0
    pad_x = 0.05 * (xmax - xmin) or 0.05 * span
    pad_y = 0.05 * (ymax - ymin) or 0.05 * span
    vx, vy = xmin - pad_x, -(ymax + pad_y)
    vw, vh = (xmax - xmin) + 2 * pad_x, (ymax - ymin) + 2 * pad_y
    height = max(1, round(style.width * vh / vw))
    r = style.size * span
    sw = style.stroke * span
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{style.width}" height="{height}" '
        f'viewBox="{_num(vx)} {_num(vy)} {_num(vw)} {_num(vh)}">'
    ]
    idx = {v.id: i for i, v in enumerate(graph.vertices)}

    def pt(i):
        return float(xy[i, 0]), -float(xy[i, 1])

    for u, v in graph.edges:
        (x1, y1), (x2, y2) = pt(idx[u]), pt(idx[v])
        out.append(f'<line x1="{_num(x1)}" y1="{_num(y1)}" x2="{_num(x2)}" y2="{_num(y2)}" '
                   f'stroke={quoteattr(style.edge_color)} stroke-width="{_num(sw)}"/>')
    for v in graph.vertices:
        x, y = pt(idx[v.id])
        if v.kind is Kind.ORIGINAL:
            out.append(f'<circle cx="{_num(x)}" cy="{_num(y)}" r="{_num(r)}" fill={quoteattr(style.original_color)}/>')
        elif v.kind is Kind.STEINER:
            s = 0.7 * r
            out.append(f'<rect x="{_num(x - s)}" y="{_num(y - s)}" width="{_num(2 * s)}" height="{_num(2 * s)}" '
                       f'fill={quoteattr(style.steiner_color)}/>')
        else:
            out.append(f'<path d="M{_num(x - r)} {_num(y)}H{_num(x + r)}M{_num(x)} {_num(y - r)}V{_num(y + r)}" '
                       f'stroke={quoteattr(style.boundary_color)} stroke-width="{_num(sw)}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
