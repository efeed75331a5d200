"""Semantic-geometric consistency refinement of per-view contact proposals.

Per intent: initial per-view confidence maps gain support from neighbouring
views that see the same surface point inside their own mask, are normalised
by the global maximum, lifted to a scored 3D cloud, and then reduced to the
points that form a locally convex pair with at least one high-confidence seed.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import EmptyInputError, MissingDepthError, StageError
from .geometry.camera import back_project_many, depth_consistency_many
from .geometry.query import closest_points, segments_inside
from .ingest import ConfidenceMap, calibrate_confidence, filter_mask, init_confidence_map, valid_region_ratio

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SgcrConfig:
    alpha: float = 0.5
    tau: float = 0.01
    seed_fraction: float = 0.10
    neighbor_policy: str = "all"  # "all" | "adjacent"
    convexity_samples: int = 16
    surface_tol: float = 1e-3
    seed_component: bool = True
    component_radius: float | None = None  # None: 2x median nearest-neighbour spacing
    prune_distance: float | None = None  # None: test every candidate-seed pair
    calibration_scale: float | None = None
    calibration_bias: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be > 0")
        if not self.tau > 0:
            raise ValueError("tau must be > 0")
        if not 0 < self.seed_fraction <= 1:
            raise ValueError("seed_fraction must be in (0, 1]")
        if self.neighbor_policy not in ("all", "adjacent"):
            raise ValueError(f"unknown neighbor policy {self.neighbor_policy!r}")
        if self.convexity_samples < 2:
            raise ValueError("convexity_samples must be >= 2")

    def to_dict(self):
        return asdict(self)


@dataclass(eq=False)
class ScoredCloud:
    points: np.ndarray
    scores: np.ndarray
    provenance: np.ndarray  # (n, 3) ints: view_id, row, col

    def __len__(self):
        return len(self.points)


@dataclass(eq=False)
class ContactMap:
    intent_id: int
    points: np.ndarray
    scores: np.ndarray
    seed_indices: np.ndarray
    normals: np.ndarray | None = None
    provenance: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.points)

    def to_dict(self):
        return {
            "intent_id": int(self.intent_id),
            "points": self.points.tolist(),
            "scores": self.scores.tolist(),
            "seed_indices": [int(i) for i in self.seed_indices],
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(int(doc["intent_id"]), np.array(doc["points"], float).reshape(-1, 3),
                   np.array(doc["scores"], float), np.array(doc["seed_indices"], dtype=np.int64))


def neighbors(view_ids, index, policy="all"):
    """Indices (into ``view_ids``) of the views that support view ``index``."""
    n = len(view_ids)
    if policy == "all":
        return [j for j in range(n) if j != index]
    order = sorted(range(n), key=lambda j: view_ids[j])
    pos = order.index(index)
    adj = {order[(pos - 1) % n], order[(pos + 1) % n]} - {index}
    return sorted(adj)


def cross_view_refine(maps, views, masks, c_bars, cfg: SgcrConfig):
    """Add ``alpha * c_bar[j]`` to every source mask pixel whose back-projected
    point lands depth-consistently inside neighbour ``j``'s mask."""
    ids = [v.view_id for v in views]
    for v in views:
        if v.depth is None:
            raise MissingDepthError(f"view {v.view_id} has no depth map")
    out = []
    for i, (m, view, mask) in enumerate(zip(maps, views, masks)):
        scores = m.scores.copy()
        rows, cols = np.nonzero(mask)
        supported = np.zeros(len(rows), int)
        if len(rows):
            for j in neighbors(ids, i, cfg.neighbor_policy):
                delta, dcol, drow, hit = depth_consistency_many(view, views[j], cols, rows)
                ok = hit & (delta < cfg.tau) & masks[j][drow, dcol]
                scores[rows[ok], cols[ok]] += cfg.alpha * c_bars[j]
                supported += ok
        meta = {"mask_pixels": int(len(rows)), "supported_pixels": int(np.count_nonzero(supported)),
                "support_events": int(supported.sum())}
        out.append(ConfidenceMap(scores, "refined", view.view_id, meta))
    return out


def normalize_global(maps):
    """Divide every map by the single maximum over all views."""
    peak = max((float(m.scores.max()) for m in maps if m.scores.size), default=0.0)
    out = []
    for m in maps:
        scores = m.scores / peak if peak > 0 else m.scores.copy()
        out.append(ConfidenceMap(scores, "normalized", m.view_id, dict(m.meta)))
    return out


def lift_to_3d(maps, views):
    """One scored world point per nonzero pixel with valid depth.

    Points are ordered by provenance ``(view_id, row, col)``. Returns the cloud
    and a diagnostics dict counting pixels skipped for missing depth.
    """
    pts, scores, prov = [], [], []
    skipped = 0
    for m, view in zip(maps, views):
        rows, cols = np.nonzero(m.scores > 0)
        d = view.depth[rows, cols] if view.depth is not None else np.full(len(rows), np.nan)
        ok = np.isfinite(d)
        skipped += int(np.count_nonzero(~ok))
        rows, cols, d = rows[ok], cols[ok], d[ok]
        pts.append(back_project_many(view, cols, rows, d).reshape(-1, 3))
        scores.append(m.scores[rows, cols])
        prov.append(np.stack([np.full(len(rows), view.view_id), rows, cols], axis=1))
    if pts:
        P, S, V = np.concatenate(pts), np.concatenate(scores), np.concatenate(prov).astype(np.int64)
    else:
        P, S, V = np.zeros((0, 3)), np.zeros(0), np.zeros((0, 3), np.int64)
    order = np.lexsort((V[:, 2], V[:, 1], V[:, 0]))
    cloud = ScoredCloud(P[order], S[order], V[order])
    return cloud, {"lifted_points": len(cloud), "skipped_no_depth": skipped}


def seed_count(n, fraction):
    # round before ceil so 0.1 * 30 = 3.0000000000000004 still gives 3
    return max(1, math.ceil(round(fraction * n, 9)))


def rank_order(cloud):
    """Indices sorted by score descending, then provenance ascending."""
    V = cloud.provenance
    return np.lexsort((V[:, 2], V[:, 1], V[:, 0], -cloud.scores))


def median_spacing(points):
    if len(points) < 2:
        return 0.0
    d, _ = cKDTree(points).query(points, k=2)
    return float(np.median(d[:, 1]))


def select_seeds(cloud, cfg: SgcrConfig):
    """Top ``seed_fraction`` of the cloud by confidence, optionally reduced to
    the largest spatially connected group. Returned in rank order."""
    if len(cloud) == 0:
        raise EmptyInputError("cannot select seeds from an empty cloud")
    top = rank_order(cloud)[:seed_count(len(cloud), cfg.seed_fraction)]
    if not cfg.seed_component or len(top) == 1:
        return top
    radius = cfg.component_radius
    if radius is None:
        radius = 2.0 * median_spacing(cloud.points)
    pairs = cKDTree(cloud.points[top]).query_pairs(radius, output_type="ndarray")
    n = len(top)
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    sizes = np.bincount(labels)
    # largest component; ties go to the one holding the best-ranked seed
    best = min(np.flatnonzero(sizes == sizes.max()), key=lambda lab: np.flatnonzero(labels == lab)[0])
    return top[labels == best]


def convexity_expand(cloud, seeds, mesh, cfg: SgcrConfig, intent_id=0):
    """Keep the seeds plus every point that forms a locally convex pair with
    at least one seed. Candidates are tested against seeds only, never against
    other accepted points."""
    mesh.require_watertight()
    seeds = np.asarray(seeds, dtype=np.int64)
    if len(seeds) == 0:
        raise EmptyInputError("no seeds")
    n = len(cloud)
    accepted = np.zeros(n, bool)
    accepted[seeds] = True
    candidates = np.flatnonzero(~accepted)
    S = cloud.points[seeds]
    tree = cKDTree(S)
    pairs_tested = 0
    pruned_pairs = 0
    block = 256
    for b in range(0, len(candidates), block):
        cand = candidates[b:b + block]
        k = len(seeds)
        dist, order = tree.query(cloud.points[cand], k=k)
        dist = dist.reshape(len(cand), k)
        order = order.reshape(len(cand), k)
        if cfg.prune_distance is not None:
            within = dist <= cfg.prune_distance
            pruned_pairs += int(np.count_nonzero(~within))
        else:
            within = np.ones_like(dist, bool)
        ok = np.zeros(len(cand), bool)
        c0, chunk = 0, 1
        while c0 < k:
            # seeds are distance-sorted, so `within` is monotone along each row
            sub = within[:, c0:c0 + chunk] & ~ok[:, None]
            if not sub.any():
                break
            rows, cj = np.nonzero(sub)
            cols = order[rows, c0 + cj]
            res = segments_inside(mesh, cloud.points[cand[rows]], S[cols],
                                  cfg.convexity_samples, cfg.surface_tol)
            pairs_tested += len(rows)
            ok[np.unique(rows[res])] = True
            c0 += chunk
            chunk = min(2 * chunk, 32)
        accepted[cand[ok]] = True

    keep = np.flatnonzero(accepted)
    pos = np.full(n, -1)
    pos[keep] = np.arange(len(keep))
    diag = {
        "cloud_points": int(n),
        "seed_points": int(len(seeds)),
        "final_points": int(len(keep)),
        "convexity_rejected": int(n - len(keep)),
        "pairs_tested": int(pairs_tested),
        "pruning_enabled": cfg.prune_distance is not None,
        "pruned_pairs": int(pruned_pairs),
    }
    cmap = ContactMap(intent_id, cloud.points[keep], cloud.scores[keep], np.sort(pos[seeds]),
                      provenance=cloud.provenance[keep], diagnostics=diag)
    return cmap


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except Exception as exc:  # relabel with the stage that failed
        raise StageError(name, exc) from exc


def initial_maps(bundle, intent_id, cfg: SgcrConfig):
    """Filtered masks, calibrated confidences and initial maps for one intent."""
    proposal = next((p for p in bundle.proposals if p.intent_id == intent_id), None)
    if proposal is None:
        raise KeyError(f"intent {intent_id} not in proposals")
    masks, c_bars, maps, details = [], [], [], []
    for view in bundle.views:
        vp = proposal.view(view.view_id)
        raw = bundle.masks.get((view.view_id, intent_id))
        if view.depth is None:
            raise MissingDepthError(f"view {view.view_id} has no depth map")
        if vp is None or not vp.visible or raw is None:
            filtered = np.zeros(view.shape, bool)
            c_bar, rho = 0.0, 0.0
        else:
            filtered = filter_mask(raw, view.depth)
            rho = valid_region_ratio(filtered, vp.bbox)
            c_bar = calibrate_confidence(vp.confidence, rho, cfg.calibration_scale, cfg.calibration_bias)
        masks.append(filtered)
        c_bars.append(c_bar)
        maps.append(init_confidence_map(filtered, c_bar, view.view_id))
        details.append({"view_id": view.view_id, "rho": rho, "c_bar": c_bar,
                        "mask_pixels": int(np.count_nonzero(filtered))})
    return maps, masks, c_bars, details


def run_sgcr(bundle, intent_id, cfg: SgcrConfig | None = None):
    """Full refinement for one intent of a scene bundle; returns a ContactMap
    whose ``diagnostics`` hold per-stage counts and support statistics."""
    cfg = cfg or SgcrConfig()
    maps, masks, c_bars, per_view = _stage("ingest", initial_maps, bundle, intent_id, cfg)
    refined = _stage("cross_view_refine", cross_view_refine, maps, bundle.views, masks, c_bars, cfg)
    normalized = _stage("normalize_global", normalize_global, refined)
    cloud, lift_diag = _stage("lift_to_3d", lift_to_3d, normalized, bundle.views)
    seeds = _stage("select_seeds", select_seeds, cloud, cfg)
    cmap = _stage("convexity_expand", convexity_expand, cloud, seeds, bundle.mesh, cfg, intent_id)
    _, tri, _ = closest_points(bundle.mesh, cmap.points)
    cmap.normals = bundle.mesh.face_normals[tri]

    support = [m.meta for m in refined]
    cmap.diagnostics = {
        "intent_id": int(intent_id),
        "views": per_view,
        "support": support,
        "refined_max": float(max(m.scores.max() for m in refined)),
        **lift_diag,
        **cmap.diagnostics,
        "config": cfg.to_dict(),
    }
    return cmap
