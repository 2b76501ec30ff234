"""Command line entry point ``emanet``.

Exit codes: 0 success, 2 bad input, 3 output written but an invariant
diagnostic fired (for example the planarity repair had to insert vertices).
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings

from . import __version__
from .delaunay import TriangleMeshFiles, delaunay, import_triangle
from .emanation import TiePolicy, build_emanation
from .errors import DuplicatePoint, EmanetError, ModeUnsupported
from .experiment import ExperimentConfig, compare_experiment
from .io import generate_points, graph_to_json, read_graph, read_points, render_svg, write_points
from .metrics import metrics_report
from .seg import SegConfig, build_seg

EXIT_OK, EXIT_INPUT, EXIT_DIAG = 0, 2, 3


def _emit(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as f:
            f.write(text)


def _diag_code(graph) -> int:
    d = graph.meta.get("diagnostics", {})
    if d.get("crossings_inserted", 0):
        print(f"warning: planarity repair inserted {d['crossings_inserted']} crossing vertices", file=sys.stderr)
        return EXIT_DIAG
    return EXIT_OK


def _finish_graph(graph, args) -> int:
    _emit(graph_to_json(graph), args.out)
    if getattr(args, "svg", None):
        _emit(render_svg(graph), args.svg)
    return _diag_code(graph)


def cmd_gen(args) -> int:
    pts = generate_points(args.n, args.seed, args.model)
    if args.out in (None, "-"):
        from .io import points_to_json
        sys.stdout.write(points_to_json(pts, {"seed": args.seed, "model": args.model}))
    else:
        write_points(args.out, pts, {"seed": args.seed, "model": args.model})
    return EXIT_OK


def cmd_build(args) -> int:
    pts = read_points(args.inp)
    tie = TiePolicy.parse(args.tie)
    if args.alg == "seg":
        graph = build_seg(pts, SegConfig(tie=tie, planarity_repair=not args.no_repair,
                                         neighbor_source=args.neighbors))
    else:
        graph = build_emanation(pts, args.grade, margin=args.margin, tie=tie, approximate=args.approximate)
    return _finish_graph(graph, args)


def cmd_delaunay(args) -> int:
    return _finish_graph(delaunay(read_points(args.inp)), args)


def cmd_import(args) -> int:
    originals = read_points(args.points) if args.points else None
    return _finish_graph(import_triangle(TriangleMeshFiles.read(args.inp), originals), args)


def cmd_metrics(args) -> int:
    rep = metrics_report(read_graph(args.inp)).as_dict()
    _emit(json.dumps(rep, indent=1, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def cmd_compare(args) -> int:
    algs = [a for chunk in args.alg for a in chunk.split(",") if a]
    cfg = ExperimentConfig(sizes=args.sizes, instances_per_size=args.instances, seed=args.seed,
                           generator=args.model, algorithms=algs)
    res = compare_experiment(cfg, raw_dir=args.raw)
    _emit(res.to_csv(), args.out)
    return EXIT_OK


def cmd_render(args) -> int:
    _emit(render_svg(read_graph(args.inp)), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="emanet", description="Emanation graphs, simplified emanation graphs and baselines.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random point set")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model", choices=["uniform", "clustered"], default="uniform")
    p.add_argument("--out", help=".json or .csv (default: JSON on stdout)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("build", help="build an emanation graph or a SEG")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out")
    p.add_argument("--svg", help="also render the graph to this file")
    p.add_argument("--alg", choices=["seg", "emanation"], default="seg")
    p.add_argument("--grade", type=int, default=2)
    p.add_argument("--margin", type=int, default=1)
    p.add_argument("--tie", default="lex", help="lex or seeded:<int>")
    p.add_argument("--approximate", action="store_true", help="float mode, required for grade >= 3")
    p.add_argument("--neighbors", choices=["rangetree", "naive"], default="rangetree")
    p.add_argument("--no-repair", action="store_true", help="report crossings instead of repairing them")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("delaunay", help="Delaunay triangulation")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_delaunay)

    p = sub.add_parser("import-triangle", help="read a Triangle .node/.ele pair")
    p.add_argument("--in", dest="inp", required=True, help="path stem, without .node/.ele")
    p.add_argument("--points", help="original point file; other nodes become steiner vertices")
    p.add_argument("--out")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_import)

    p = sub.add_parser("metrics", help="metrics report of a graph file")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("compare", help="averaged metrics over random instances (CSV)")
    p.add_argument("--sizes", type=int, nargs="+", default=[100])
    p.add_argument("--instances", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model", choices=["uniform", "clustered"], default="uniform")
    p.add_argument("--alg", action="append", default=None,
                   help="seg, emanation1, emanation2, delaunay or triangle-import:<dir>; repeat or comma-separate")
    p.add_argument("--raw", help="directory for per-instance JSON records")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("render", help="SVG of a graph file")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_render)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "alg", "") is None:
        args.alg = ["seg", "delaunay"]
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except (EmanetError, DuplicatePoint, ModeUnsupported, ValueError, OSError) as exc:
        print(f"emanet: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
