"""Batch comparison of constructions on random point sets (one CSV row per algorithm and size)."""
from __future__ import annotations

import csv
import io as _io
import json
import os
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .delaunay import TriangleMeshFiles, delaunay, import_triangle
from .emanation import build_emanation
from .errors import ConfigError, ParseError
from .io import GENERATORS, generate_points
from .metrics import metrics_report
from .seg import build_seg

COLUMNS = (
    "algorithm", "point_count", "instances", "steiner_points", "max_degree", "avg_degree", "edge_count",
    "max_edge_len", "avg_edge_len", "total_edge_len", "min_angle_deg", "spanning_ratio",
)
_AVERAGED = COLUMNS[3:]
BUILTIN = ("seg", "emanation1", "emanation2", "delaunay")


@dataclass(frozen=True)
class ExperimentConfig:
    sizes: tuple = (100,)
    instances_per_size: int = 10
    seed: int = 0
    generator: str = "uniform"
    algorithms: tuple = ("seg", "delaunay")

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        if not self.sizes or any(s < 1 for s in self.sizes):
            raise ConfigError("sizes must be a nonempty list of positive integers")
        if self.instances_per_size < 1:
            raise ConfigError("instances_per_size must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 bits")
        if self.generator not in GENERATORS:
            raise ConfigError(f"generator must be one of {GENERATORS}")
        if not self.algorithms:
            raise ConfigError("no algorithms selected")
        for alg in self.algorithms:
            if alg not in BUILTIN and not alg.startswith("triangle-import:"):
                raise ConfigError(f"unknown algorithm {alg!r}")


def instance_points(config: ExperimentConfig, size: int, index: int):
    return generate_points(size, [config.seed, size, index], config.generator)


def _build(alg: str, points, size: int, index: int):
    if alg == "seg":
        return build_seg(points)
    if alg == "emanation1":
        return build_emanation(points, 1)
    if alg == "emanation2":
        return build_emanation(points, 2)
    if alg == "delaunay":
        return delaunay(points)
    folder = alg.split(":", 1)[1]
    stem = os.path.join(folder, f"n{size}_{index}")
    if not (os.path.exists(stem + ".node") and os.path.exists(stem + ".ele")):
        return None
    return import_triangle(TriangleMeshFiles.read(stem), points)


@dataclass
class ExperimentResult:
    rows: list
    raw: list = field(default_factory=list)
    skipped: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for row in self.rows:
            w.writerow([_fmt(row[c]) for c in COLUMNS])
        return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def compare_experiment(config: ExperimentConfig, raw_dir: Optional[str] = None) -> ExperimentResult:
    """Average metrics per (algorithm, size); per-instance records go to ``raw_dir`` if given."""
    rows, raw, skipped = [], [], {}
    for alg in config.algorithms:
        for size in config.sizes:
            reports = []
            for index in range(config.instances_per_size):
                pts = instance_points(config, size, index)
                try:
                    graph = _build(alg, pts, size, index)
                except ParseError as exc:
                    warnings.warn(f"{alg} n={size} #{index}: {exc}")
                    graph = None
                if graph is None:
                    skipped[(alg, size)] = skipped.get((alg, size), 0) + 1
                    continue
                rep = metrics_report(graph).as_dict()
                rec = {"algorithm": alg, "size": size, "index": index, "metrics": rep,
                       "diagnostics": graph.meta.get("diagnostics", {})}
                raw.append(rec)
                reports.append(rep)
            if not reports:
                warnings.warn(f"{alg} n={size}: every instance skipped")
                continue
            row = {"algorithm": alg, "point_count": size, "instances": len(reports)}
            for c in _AVERAGED:
                row[c] = float(np.mean([r[c] for r in reports]))
            rows.append(row)
    if skipped:
        warnings.warn(f"skipped instances: {sum(skipped.values())}")
    if raw_dir is not None:
        os.makedirs(raw_dir, exist_ok=True)
        for rec in raw:
            name = rec["algorithm"].split(":", 1)[0]
            path = os.path.join(raw_dir, f"{name}_n{rec['size']}_{rec['index']}.json")
            with open(path, "w") as f:
                json.dump(rec, f, indent=1, sort_keys=True)
                f.write("\n")
    return ExperimentResult(rows, raw, skipped)
