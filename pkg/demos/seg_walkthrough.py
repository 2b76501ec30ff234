"""One frame of the simplified construction, step by step, then the whole graph.

Shows the top neighbor, the side-cone candidates and the blocking verdicts
for every point in frame 0, then compares the finished graph with M2.
"""
from emanet.emanation import build_emanation
from emanet.geom import Frame, Point, format_coord
from emanet.metrics import metrics_report
from emanet.seg import build_seg, connect, is_blocked, select_candidates, select_top_neighbor

pts = [Point(i, x, y) for i, (x, y) in enumerate([(0, 0), (4, 7), (9, 3), (13, 10), (6, 14), (15, 1)])]
frame = Frame(0)

for p in pts:
    top = select_top_neighbor(p, pts, frame)
    if top is None:
        print(f"{p.id}: nothing above")
        continue
    verdicts = [(c.p_c.id, c.cone.name, is_blocked(p, top, c, frame)) for c in select_candidates(p, pts, frame)]
    blocked = any(b for *_, b in verdicts)
    line = f"{p.id}: top neighbor {top.p_s.id} in {top.cone.name}; candidates {verdicts}"
    if not blocked:
        e = connect(p, top.p_s, frame)
        bend = "none" if e.bend is None else "(%s, %s)" % tuple(format_coord(c) for c in e.bend)
        line += f" -> link, bend {bend}"
    print(line)

for name, g in [("SEG", build_seg(pts)), ("M2", build_emanation(pts, 2))]:
    r = metrics_report(g)
    print(f"{name:>3}: steiner {r.steiner_points}, edges {r.edge_count}, max degree {r.max_degree:.0f}, "
          f"spanning ratio {r.spanning_ratio:.3f}, min angle {r.min_angle_deg:.1f}")
