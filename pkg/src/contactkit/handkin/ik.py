"""Damped least-squares fingertip IK toward per-finger target regions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import AssignmentError, NumericError
from .chain import HandConfiguration, clamp_joints, fingertip_jacobian, forward_kinematics, mid_range


@dataclass(frozen=True)
class IkConfig:
    iters: int = 12
    damping: float = 0.05  # lambda_dls
    step: float = 1.0  # eta
    reselect_targets: bool = True
    fixed_wrist: bool = False
    standoff: float = 0.12

    def __post_init__(self):
        if self.iters < 1:
            raise ValueError("iters must be >= 1")
        if not self.damping > 0:
            raise ValueError("damping must be > 0")
        if not self.step > 0:
            raise ValueError("step must be > 0")
        if self.standoff < 0:
            raise ValueError("standoff must be >= 0")

    def to_dict(self):
        return {"iters": self.iters, "lambda_dls": self.damping, "eta": self.step,
                "reselect_targets": self.reselect_targets, "fixed_wrist": self.fixed_wrist,
                "standoff": self.standoff}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "lambda_dls" in d:
            d["damping"] = d.pop("lambda_dls")
        if "eta" in d:
            d["step"] = d.pop("eta")
        return cls(**d)


@dataclass(eq=False)
class IkResult:
    h: HandConfiguration
    trace: np.ndarray  # objective at h0 and after each update
    targets: np.ndarray  # targets used in the last update, one row per finger


def _regions(chain, assignment):
    regions = []
    for f in chain.fingers:
        r = assignment.regions.get(f) if hasattr(assignment, "regions") else assignment.get(f)
        if r is None or len(r) == 0:
            raise AssignmentError(f"finger {f!r} has no target region")
        regions.append(np.asarray(r, float).reshape(-1, 3))
    return regions


def nearest_targets(tips, regions):
    """Closest region point to each tip, and the squared distances."""
    out, d2 = np.empty_like(tips), np.empty(len(tips))
    for f, (tip, R) in enumerate(zip(tips, regions)):
        sq = ((R - tip) ** 2).sum(axis=1)
        k = int(np.argmin(sq))
        out[f], d2[f] = R[k], sq[k]
    return out, d2


def ik_objective(chain, h, assignment) -> float:
    """Sum over fingers of the squared distance from the tip to its region."""
    tips = forward_kinematics(chain, h)
    return float(nearest_targets(tips, _regions(chain, assignment))[1].sum())


def canonical_rotvec(phi):
    """Same rotation with angle in [0, pi]."""
    phi = np.asarray(phi, float)
    t = np.linalg.norm(phi)
    if t <= np.pi:
        return phi
    return phi / t * (np.mod(t + np.pi, 2 * np.pi) - np.pi)


def solve_ik(chain, h0, assignment, cfg: IkConfig = IkConfig()) -> IkResult:
    """Update ``h <- h - eta * J^T (J J^T + lambda^2 I)^-1 e`` for ``cfg.iters``
    steps, re-selecting each finger's nearest target before every update
    unless ``reselect_targets`` is off. Joints are clamped after each update.

    The trace holds ``iters + 1`` objective values: the region objective when
    targets are re-selected, the distance to the fixed targets otherwise.
    """
    regions = _regions(chain, assignment)
    h = HandConfiguration(h0.w, canonical_rotvec(h0.phi), clamp_joints(chain, h0.theta))
    nf = len(regions)
    cols = np.arange(6 + chain.dof)
    if cfg.fixed_wrist:
        cols = cols[6:]
    lam2 = cfg.damping ** 2

    tips = forward_kinematics(chain, h)
    targets, d2 = nearest_targets(tips, regions)
    trace = [float(d2.sum())]
    for _ in range(cfg.iters):
        if cfg.reselect_targets:
            targets, _ = nearest_targets(tips, regions)
        e = (tips - targets).reshape(-1)
        J = fingertip_jacobian(chain, h)[:, cols]
        try:
            y = np.linalg.solve(J @ J.T + lam2 * np.eye(3 * nf), e)
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"damped least-squares solve failed: {exc}") from exc
        dh = np.zeros(6 + chain.dof)
        dh[cols] = -J.T @ y
        if not np.all(np.isfinite(dh)):
            raise NumericError("non-finite IK update")
        v = h.vector + cfg.step * dh
        h = HandConfiguration(v[:3], canonical_rotvec(v[3:6]), clamp_joints(chain, v[6:]))
        tips = forward_kinematics(chain, h)
        if cfg.reselect_targets:
            trace.append(float(nearest_targets(tips, regions)[1].sum()))
        else:
            trace.append(float(((tips - targets) ** 2).sum()))
    return IkResult(h, np.array(trace), targets)


def _rotation_between(a, b):
    """Axis-angle vector of the shortest rotation taking unit ``a`` to unit ``b``."""
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    v = np.cross(a, b)
    s, c = np.linalg.norm(v), float(np.dot(a, b))
    if s < 1e-12:
        if c > 0:
            return np.zeros(3)
        # antiparallel: any axis orthogonal to a
        k = int(np.argmin(np.abs(a)))
        e = np.zeros(3)
        e[k] = 1.0
        axis = np.cross(a, e)
        return np.pi * axis / np.linalg.norm(axis)
    return v / s * np.arctan2(s, c)


def default_initial_pose(chain, contact_map, standoff=0.12) -> HandConfiguration:
    """Wrist at the map centroid pushed out along the mean surface normal,
    palm turned to face the centroid, joints at mid-range.

    Falls back to world +Z when the map has no usable normals.
    """
    pts = np.asarray(getattr(contact_map, "points", contact_map), float).reshape(-1, 3)
    if len(pts) == 0:
        raise AssignmentError("empty contact map")
    lex = np.lexsort(pts.T[::-1])
    centroid = pts[lex].mean(axis=0)
    normals = getattr(contact_map, "normals", None)
    n = np.zeros(3)
    if normals is not None and len(normals) == len(pts):
        n = np.asarray(normals, float)[lex].mean(axis=0)
    norm = np.linalg.norm(n)
    n = n / norm if norm > 1e-9 else np.array([0.0, 0.0, 1.0])
    phi = _rotation_between(np.asarray(chain.palm_normal, float), -n)
    return HandConfiguration(centroid + standoff * n, phi, mid_range(chain))
