"""Range-tree neighbor queries against the quadratic scan, on growing inputs."""
import time

import numpy as np

from emanet.geom import ConeId
from emanet.rangetree import ConeIndex, FrameKeys, dense_first_in_cone

rng = np.random.default_rng(0)
print(f"{'n':>7} {'tree s':>8} {'dense s':>8} same")
for n in (1000, 2000, 4000, 8000):
    fx, fy = rng.integers(0, 10**6, n), rng.integers(0, 10**6, n)
    keys = FrameKeys(fx, fy, np.arange(n))
    t0 = time.perf_counter()
    a = ConeIndex(keys, ConeId.C_a1r3).first_for_members()
    t1 = time.perf_counter()
    b = dense_first_in_cone(keys, ConeId.C_a1r3)
    t2 = time.perf_counter()
    print(f"{n:>7} {t1 - t0:>8.3f} {t2 - t1:>8.3f} {bool((a == b).all())}")
