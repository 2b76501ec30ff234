"""Ray competition on a handful of points, printed ray by ray.

Run: python3 demos/emanation_tour.py [out.svg]
"""
import sys
from collections import Counter

from emanet.emanation import build_emanation, simulate_rays
from emanet.geom import Point
from emanet.io import render_svg

NAMES = ["E", "NE", "N", "NW", "W", "SW", "S", "SE"]

pts = [Point(i, x, y) for i, (x, y) in enumerate([(0, 0), (4, 7), (9, 3), (13, 10), (6, 14), (15, 1)])]

print("who stops where (grade 2):")
for seg in simulate_rays(pts, 2):
    if seg.stop_cause.value == "bbox":
        continue
    x, y = seg.stop_point
    by = f" by {seg.other[0]}/{NAMES[seg.other[1]]}" if seg.other else ""
    print(f"  point {seg.owner} ray {NAMES[seg.dir]:>2} stops at ({x}, {y}) t={float(seg.stop_time):.3f}"
          f" [{seg.stop_cause.value}{by}]")

for grade in (1, 2):
    g = build_emanation(pts, grade)
    kinds = Counter(v.kind.value for v in g.vertices)
    print(f"M{grade}: {len(g.edges)} edges, {dict(kinds)}")

if len(sys.argv) > 1:
    with open(sys.argv[1], "w") as f:
        f.write(render_svg(build_emanation(pts, 2)))
    print("wrote", sys.argv[1])
