"""Split a contact map into per-finger target regions along its principal axis."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import AssignmentError, DegenerateGeometryError


@dataclass(eq=False)
class FingerRegionAssignment:
    regions: dict  # finger -> (m, 3) target points
    indices: dict  # finger -> indices into the input points
    axis: np.ndarray
    split: float  # projection value separating the two sides
    center: np.ndarray
    thumb: str
    thumb_side: str  # "low" or "high" projection side
    meta: dict = field(default_factory=dict)

    def region(self, finger):
        pts = self.regions.get(finger)
        if pts is None or len(pts) == 0:
            raise AssignmentError(f"finger {finger!r} has no target region")
        return pts

    def to_dict(self):
        return {
            "axis": self.axis.tolist(), "split": float(self.split), "center": self.center.tolist(),
            "thumb": self.thumb, "thumb_side": self.thumb_side,
            "sizes": {f: int(len(p)) for f, p in self.regions.items()},
        }


def principal_axis(points):
    """Unit eigenvector of the largest covariance eigenvalue.

    Sign is fixed so the largest-magnitude component is positive (the first
    such component on ties). Raises when the cloud has no spread at all.
    """
    pts = np.asarray(points, float)
    center = pts.mean(axis=0)
    X = pts - center
    cov = X.T @ X / len(pts)
    vals, vecs = np.linalg.eigh(cov)
    scale = max(np.abs(X).max(), np.abs(center).max(), 1e-300)
    if vals[-1] <= (1e-12 * scale) ** 2:
        raise DegenerateGeometryError("contact points coincide; no principal axis")
    axis = vecs[:, -1]
    k = int(np.argmax(np.abs(axis)))
    if axis[k] < 0:
        axis = -axis
    return axis, center, vals


def partition_regions(points, chain, palm_normal=None, thumb_side="facing") -> FingerRegionAssignment:
    """Thumb region on one side of the median along the principal axis; the
    other side cut into contiguous equal-count pieces for the other fingers.

    ``points`` is an (n, 3) array or anything with a ``points`` attribute.
    ``palm_normal`` is the world palm normal at the initial pose. With
    ``thumb_side="facing"`` the thumb takes the side the palm normal points
    toward along the axis (the high side when there is no normal or it is
    orthogonal to the axis). ``"high"`` or ``"low"`` forces a side.
    """
    pts = np.asarray(getattr(points, "points", points), float).reshape(-1, 3)
    fingers = chain.fingers
    if len(pts) < len(fingers):
        raise AssignmentError(f"{len(pts)} contact points for {len(fingers)} fingers")
    # lexicographic order makes everything below independent of input order
    lex = np.lexsort(pts.T[::-1])
    axis, center, vals = principal_axis(pts[lex])
    t = (pts[lex] - center) @ axis
    order = lex[np.argsort(t, kind="stable")]
    n = len(pts)

    if thumb_side == "facing":
        d = 0.0 if palm_normal is None else float(np.dot(palm_normal, axis))
        side = "low" if d < 0 else "high"
    elif thumb_side in ("high", "low"):
        side = thumb_side
    else:
        raise ValueError(f"thumb_side must be 'facing', 'high' or 'low', got {thumb_side!r}")

    others = [f for f in fingers if f != chain.thumb_finger]
    n_thumb = n // 2 if side == "low" else n - n // 2
    # keep at least one point for every other finger
    n_thumb = min(n_thumb, n - len(others)) if others else n
    n_thumb = max(n_thumb, 1)
    if side == "low":
        thumb_idx, rest = order[:n_thumb], order[n_thumb:]
    else:
        thumb_idx, rest = order[n - n_thumb:], order[:n - n_thumb]
    ts = np.sort(t)
    b = n_thumb if side == "low" else n - n_thumb  # boundary in sorted order
    split = 0.5 * (ts[b - 1] + ts[b]) if 0 < b < n else float(ts[min(b, n - 1)])

    indices = {chain.thumb_finger: np.sort(thumb_idx)}
    for f, seg in zip(others, np.array_split(rest, len(others)) if others else []):
        indices[f] = np.sort(seg)
    regions = {f: pts[indices[f]] for f in fingers}
    return FingerRegionAssignment(regions, {f: indices[f] for f in fingers}, axis, float(split),
                                  center, chain.thumb_finger, side, {"eigenvalues": vals.tolist()})
