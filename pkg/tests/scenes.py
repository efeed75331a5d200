"""Small hand-built scenes shared by the unit and acceptance tests."""

import numpy as np

from contactkit.bundle import ring_views
from contactkit.geometry import back_project_many, closest_points, render_depth, sphere
from contactkit.ingest import init_confidence_map
from contactkit.sgcr import ScoredCloud

RADIUS = 0.05


def two_view_sphere(c_bars=(0.8, 0.6), resolution=64):
    """Front (-y) and right (+x) cameras on a 5 cm sphere with silhouette masks."""
    mesh = sphere(RADIUS)
    views = [v.with_depth(render_depth(mesh, v)) for v in ring_views(resolution)[:2]]
    masks = [np.isfinite(v.depth) for v in views]
    maps = [init_confidence_map(m, c, v.view_id) for m, v, c in zip(masks, views, c_bars)]
    return mesh, views, masks, maps, list(c_bars)


def facing(view, rows, cols, other):
    """Cosine between the analytic outward normal at each pixel's surface point
    and the direction to ``other``'s camera centre."""
    p = back_project_many(view, cols, rows, view.depth[rows, cols])
    n = p / np.linalg.norm(p, axis=1, keepdims=True)
    to_cam = other.pose.center - p
    to_cam /= np.linalg.norm(to_cam, axis=1, keepdims=True)
    return (n * to_cam).sum(1)


def cloud(points, scores=None, views=None):
    points = np.asarray(points, float)
    n = len(points)
    scores = np.ones(n) if scores is None else np.asarray(scores, float)
    prov = np.stack([np.ones(n, int) if views is None else np.asarray(views), np.arange(n), np.zeros(n, int)], 1)
    return ScoredCloud(points, scores, prov)


def snap(mesh, points):
    return closest_points(mesh, np.asarray(points, float))[2]


def episode(distances, contacts=(), theta=(0.0, 0.0, 0.0), intent_id=0, name="ep"):
    """Episode log with the object ``distances[t]`` along +x from a goal at the
    origin. ``contacts`` are final-step contacting tip positions; one extra
    non-contacting tip is always present far away."""
    from contactkit.metrics import EpisodeLog
    from contactkit.reward import SimStateSnapshot

    theta = np.asarray(theta, float)
    tips = np.vstack([np.asarray(contacts, float).reshape(-1, 3), [[9.0, 9.0, 9.0]]])
    flags = np.r_[np.ones(len(tips) - 1, bool), False]
    ref = {"w": np.zeros(3), "phi": np.zeros(3), "theta": theta}
    snaps = []
    for t, d in enumerate(distances):
        last = t == len(distances) - 1
        snaps.append(SimStateSnapshot(t, np.zeros(3), np.zeros(3), theta, tips, np.array([d, 0.0, 0.0]),
                                      np.zeros(3), ref, flags if last else np.zeros(len(tips), bool), intent_id))
    return EpisodeLog(snaps, intent_id, name)


def handcrafted_logs():
    """Ten logs with successes 1, 2, 3, 4, 5, 7, 10 and SADs against a map
    holding only the origin of 0.02, 0.03, 0.039, 0.04, 0.05, 0.01, 0.01."""
    at = lambda sad: [[sad, 0.0, 0.0]]
    far = [0.3] * 200
    hold = lambda k, d=0.0: [0.3] * 50 + [d] * k + [0.3] * (150 - k)
    z = (0.0, 0.0, 0.0)
    return [
        episode([0.0] * 200, at(0.02), z, name="ep01"),
        episode(hold(20, 0.0499), at(0.03), z, name="ep02"),
        episode(hold(40), at(0.039), z, name="ep03"),
        episode(hold(25), at(0.04), z, name="ep04"),
        episode(hold(30), at(0.05), z, name="ep05"),
        episode(hold(19), at(0.01), (1.0, 1.0, 1.0), name="ep06"),
        episode(hold(60), at(0.01), z, name="ep07"),
        episode([0.05] * 200, at(0.01), (2.0, 0.0, 0.0), name="ep08"),
        episode(far, at(0.0), (0.0, 2.0, 0.0), name="ep09"),
        episode(hold(20) + [0.0], at(0.01), (3.0, 4.0, 0.0), name="ep10"),
    ]
