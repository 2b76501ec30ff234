import random
import warnings
from fractions import Fraction

import pytest

from emanet.delaunay import (TriangleMeshFiles, delaunay, delaunay_triangles, import_triangle, parse_node,
                             points_to_node)
from emanet.errors import DegenerateInput, DuplicatePoint, ParseError
from emanet.geom import Point
from emanet.graph import Kind, check_plane_graph
from emanet.metrics import metrics_report

P = Point


def random_points(rng, n, span=10**6, den=1000):
    seen = {}
    while len(seen) < n:
        xy = (Fraction(rng.randint(0, span), den), Fraction(rng.randint(0, span), den))
        seen.setdefault(xy, P(len(seen), *xy))
    return list(seen.values())


def hull_size(pts):
    # points on the hull boundary, collinear ones included
    pts = sorted((p.x, p.y) for p in pts)

    def half(seq):
        out = []
        for q in seq:
            while len(out) >= 2 and ((out[-1][0] - out[-2][0]) * (q[1] - out[-2][1])
                                     - (out[-1][1] - out[-2][1]) * (q[0] - out[-2][0])) < 0:
                out.pop()
            out.append(q)
        return out

    return len(half(pts)) + len(half(pts[::-1])) - 2


def in_circle(a, b, c, d):
    rows = [(p.x - d.x, p.y - d.y) for p in (a, b, c)]
    m = [(x, y, x * x + y * y) for x, y in rows]
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def test_unit_square():
    g = delaunay([P(0, 0, 0), P(1, 1, 0), P(2, 0, 1), P(3, 1, 1)])
    assert len(g.edges) == 5
    assert (0, 3) in g.edges  # the diagonal starting at the smallest corner
    assert g.meta["cocircular_rule"]


def test_three_points():
    g = delaunay([P(0, 0, 0), P(1, 4, 0), P(2, 1, 3)])
    assert g.edges == ((0, 1), (0, 2), (1, 2))


def test_degenerate_input_falls_back():
    with pytest.warns(DegenerateInput):
        g = delaunay([P(0, 0, 0), P(1, 2, 2), P(2, 1, 1)])
    assert g.edges == ((0, 2), (1, 2))
    with pytest.warns(DegenerateInput):
        assert delaunay([P(0, 0, 0)]).edges == ()
    with pytest.raises(DegenerateInput):
        delaunay_triangles([P(0, 0, 0), P(1, 1, 0)])


def test_duplicates_rejected():
    with pytest.raises(DuplicatePoint):
        delaunay([P(0, 0, 0), P(1, 0, 0), P(2, 1, 1)])


@pytest.mark.parametrize("seed", range(4))
def test_empty_circle_certificate(seed):
    rng = random.Random(seed)
    pts = random_points(rng, 100) if seed % 2 == 0 else random_points(rng, 100, span=12, den=1)
    tris, _ = delaunay_triangles(pts)
    by_id = {p.id: p for p in pts}
    for a, b, c in tris:
        A, B, C = by_id[a], by_id[b], by_id[c]
        for q in pts:
            if q.id not in (a, b, c):
                assert in_circle(A, B, C, q) <= 0


@pytest.mark.parametrize("seed", range(6))
def test_euler_count_and_planarity(seed):
    rng = random.Random(10 + seed)
    pts = random_points(rng, rng.randint(3, 150), span=rng.choice([20, 10**6]), den=rng.choice([1, 1000]))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateInput)
        g = delaunay(pts)
    if "degenerate" in g.meta:
        return
    assert len(g.edges) == 3 * len(pts) - 3 - hull_size(pts)
    assert check_plane_graph(g)["crossings"] == 0


def test_average_degree_band():
    rep = metrics_report(delaunay(random_points(random.Random(3), 100)))
    assert 5.2 <= rep.avg_degree <= 6.0
    assert rep.steiner_points == 0


NODE = """# three corners
3 2 0 0
0 0 0
1 4 0
2 0 3
"""
ELE = "1 3 0\n0 0 1 2\n"


def test_minimal_mesh():
    g = import_triangle(TriangleMeshFiles(NODE, ELE))
    assert g.edges == ((0, 1), (0, 2), (1, 2))
    assert g.meta["index_base"] == 0


def test_one_based_indices_give_the_same_graph():
    node = "3 2 0 1\n1 0 0 1\n2 4 0 1\n3 0 3 0\n"
    ele = "1 3\n1 1 2 3\n"
    a = import_triangle(TriangleMeshFiles(NODE, ELE))
    b = import_triangle(TriangleMeshFiles(node, ele))
    assert a.edges == b.edges and a.vertices == b.vertices


def test_refined_mesh_steiner_count():
    originals = [P(10, 0, 0), P(11, 4, 0), P(12, 0, 3)]
    node = "4 2 0 0\n0 0 0\n1 4 0\n2 0 3\n3 1.5 1\n"
    ele = "3 3 0\n0 0 1 3\n1 1 2 3\n2 2 0 3\n"
    g = import_triangle(TriangleMeshFiles(node, ele), originals)
    assert sum(v.kind is Kind.STEINER for v in g.vertices) == 1
    assert {v.id for v in g.vertices if v.kind is Kind.ORIGINAL} == {10, 11, 12}
    assert len(g.edges) == 6


def test_quadratic_elements_use_corners():
    node = "3 2 0 0\n0 0 0\n1 4 0\n2 0 3\n"
    ele = "1 6 0\n0 0 1 2 0 1 2\n"
    assert len(import_triangle(TriangleMeshFiles(node, ele)).edges) == 3


@pytest.mark.parametrize("node, ele, line", [
    ("3 2 0 0\n0 0 0\n1 4 0\n", ELE, 3),               # fewer nodes than announced
    ("3 3 0 0\n0 0 0\n1 4 0\n2 0 3\n", ELE, 1),         # 3-D header
    (NODE, "1 3 0\n0 0 1 7\n", 2),                       # missing node
    (NODE, "1 3 0\n0 0 x 2\n", 2),                       # bad index
    ("3 2 0 0\n0 0 0\n1 4 zero\n2 0 3\n", ELE, 3),       # bad coordinate
    ("3 2 0 0\n0 0 0\n2 4 0\n3 0 3\n", ELE, 3),          # out of sequence
])
def test_parse_errors_carry_line_numbers(node, ele, line):
    with pytest.raises(ParseError) as info:
        import_triangle(TriangleMeshFiles(node, ele))
    assert info.value.line == line


def test_node_export_round_trip():
    pts = [P(0, Fraction(1, 8), 2), P(1, 3, Fraction(-7, 4)), P(2, 0, 0)]
    nodes, base = parse_node(points_to_node(pts))
    assert base == 0
    assert [(x, y) for _, x, y in nodes] == [(p.x, p.y) for p in pts]


def test_read_from_files(tmp_path):
    (tmp_path / "m.node").write_text(NODE)
    (tmp_path / "m.ele").write_text(ELE)
    files = TriangleMeshFiles.read(tmp_path / "m")
    assert files.ele_text == ELE
