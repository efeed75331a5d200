"""Why the expansion test is pairwise against seeds.

A point is accepted when the segment to at least one seed stays inside the
object. Acceptance is not transitive: two accepted points may still see
each other only through empty space. The dumbbell shows this directly.

    python3 demos/dumbbell_convexity.py
"""

import numpy as np

from contactkit.bundle import make_shape, synthesize
from contactkit.geometry import closest_points, dumbbell_tips, segment_inside
from contactkit.sgcr import ScoredCloud, SgcrConfig, convexity_expand, run_sgcr

mesh = make_shape("dumbbell")
seed = (0.0, 0.028, 0.0)  # top of the neck
a, b = dumbbell_tips()
pts = closest_points(mesh, np.array([seed, a, b]))[2]

cl = ScoredCloud(pts, np.array([1.0, 0.5, 0.5]), np.array([[1, 0, 0], [1, 1, 0], [1, 2, 0]]))
cm = convexity_expand(cl, np.array([0]), mesh, SgcrConfig())
print("accepted:", len(cm), "of", len(cl))
print("seed -> left tip inside: ", segment_inside(mesh, pts[0], pts[1]))
print("seed -> right tip inside:", segment_inside(mesh, pts[0], pts[2]))
print("left tip -> right tip inside:", segment_inside(mesh, pts[1], pts[2]))

# the full pipeline on a rendered dumbbell scene
bundle, _ = synthesize("dumbbell", resolution=64, seed=0)
full = run_sgcr(bundle, 0)
d = full.diagnostics
print(f"\nscene: {d['cloud_points']} lifted, {len(full.seed_indices)} seeds, "
      f"{d['final_points']} kept, {d['convexity_rejected']} rejected")
x = full.points[:, 0]
print(f"kept x range {x.min():.3f} .. {x.max():.3f} m")
