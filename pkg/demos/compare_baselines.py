"""Small version of the comparison table: SEG, M1, M2 and Delaunay on random sets.

Run: python3 demos/compare_baselines.py [instances]
"""
import sys

from emanet.experiment import ExperimentConfig, compare_experiment

n = int(sys.argv[1]) if len(sys.argv) > 1 else 5
cfg = ExperimentConfig(sizes=[50, 100], instances_per_size=n, seed=1,
                       algorithms=["seg", "emanation1", "emanation2", "delaunay"])
res = compare_experiment(cfg)
cols = ["algorithm", "point_count", "steiner_points", "avg_degree", "max_degree", "min_angle_deg", "spanning_ratio"]
print("  ".join(f"{c:>14}" for c in cols))
for row in res.rows:
    print("  ".join(f"{row[c]:>14.3f}" if isinstance(row[c], float) else f"{row[c]:>14}" for c in cols))
