"""Grasp reward terms evaluated on single state snapshots.

Episode logs are JSON lines, one snapshot per timestep::

    {"t": 0, "wrist": [x, y, z], "phi": [..], "theta": [..],
     "fingertips": [[x, y, z], ...], "object": [x, y, z], "goal": [x, y, z],
     "reference": {"w": [..], "phi": [..], "theta": [..]},
     "in_contact": [true, false, ...], "intent_id": 0}

``in_contact`` and ``intent_id`` are optional. When ``in_contact`` is
given, it marks which fingertips touch the object at that step; the
metrics read it on the final step.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.transform import Rotation

from .errors import AssignmentError, DimensionError


@dataclass(frozen=True)
class RewardConfig:
    lambda_w: float = 7.0
    lambda_phi: float = 2.0
    lambda_theta: float = 0.12
    beta: float = 0.55
    beta_c: float = 0.25
    kappa_horizon: int = 80
    kappa_floor: float = 0.15
    kappa_shape: str = "linear"  # or "exponential"
    contact_threshold: float = 0.01
    w_approach: float = 1.0
    w_lift: float = 1.0
    w_goal: float = 1.0
    w_bonus: float = 2.0
    bonus_radius: float = 0.05
    table_height: float = 0.0
    reference_mode: str = "full"  # or "joints"

    def __post_init__(self):
        for name in ("lambda_w", "lambda_phi", "lambda_theta", "beta", "beta_c", "contact_threshold",
                     "w_approach", "w_lift", "w_goal", "w_bonus", "bonus_radius"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0 < self.kappa_floor <= 1:
            raise ValueError("kappa_floor must lie in (0, 1]")
        if self.kappa_horizon < 1:
            raise ValueError("kappa_horizon must be >= 1")
        if self.kappa_shape not in ("linear", "exponential"):
            raise ValueError(f"unknown kappa_shape {self.kappa_shape!r}")
        if self.reference_mode not in ("full", "joints"):
            raise ValueError(f"unknown reference_mode {self.reference_mode!r}")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown reward settings {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True, eq=False)
class SimStateSnapshot:
    t: int
    wrist: np.ndarray
    phi: np.ndarray
    theta: np.ndarray
    fingertips: np.ndarray
    object: np.ndarray
    goal: np.ndarray
    reference: dict  # {"w", "phi", "theta"}
    in_contact: np.ndarray | None = None
    intent_id: int | None = None

    @classmethod
    def from_dict(cls, d):
        ref = d["reference"]
        contact = d.get("in_contact")
        return cls(
            int(d["t"]), np.asarray(d["wrist"], float), np.asarray(d["phi"], float),
            np.asarray(d["theta"], float), np.asarray(d["fingertips"], float).reshape(-1, 3),
            np.asarray(d["object"], float), np.asarray(d["goal"], float),
            {k: np.asarray(ref[k], float) for k in ("w", "phi", "theta")},
            None if contact is None else np.asarray(contact, bool), d.get("intent_id"),
        )

    def to_dict(self):
        d = {"t": self.t, "wrist": self.wrist.tolist(), "phi": self.phi.tolist(),
             "theta": self.theta.tolist(), "fingertips": self.fingertips.tolist(),
             "object": self.object.tolist(), "goal": self.goal.tolist(),
             "reference": {k: np.asarray(v, float).tolist() for k, v in self.reference.items()}}
        if self.in_contact is not None:
            d["in_contact"] = [bool(x) for x in self.in_contact]
        if self.intent_id is not None:
            d["intent_id"] = self.intent_id
        return d


@dataclass(frozen=True)
class RewardBreakdown:
    r_track: float
    r_pose: float
    r_contact: float
    r_approach: float
    r_lift: float
    r_goal: float
    r_bonus: float
    total: float

    def to_dict(self):
        return asdict(self)


def read_log(path):
    out = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                out.append(SimStateSnapshot.from_dict(json.loads(line)))
    return out


def write_log(path, snapshots):
    with open(path, "w") as fh:
        for s in snapshots:
            fh.write(json.dumps(s.to_dict(), sort_keys=True) + "\n")


def track_score(dw, dphi, dtheta, cfg=RewardConfig(), dof=None) -> float:
    """exp(-lambda_w |dw|_2 - lambda_phi |dphi|_2 - lambda_theta |dtheta|_1)."""
    dtheta = np.asarray(dtheta, float).reshape(-1)
    if dof is not None and len(dtheta) != dof:
        raise DimensionError(f"joint error has {len(dtheta)} entries, expected {dof}")
    return math.exp(-cfg.lambda_w * float(np.linalg.norm(dw))
                    - cfg.lambda_phi * float(np.linalg.norm(dphi))
                    - cfg.lambda_theta * float(np.abs(dtheta).sum()))


def kappa(t, cfg=RewardConfig()) -> float:
    """Guidance weight: 1 at t = 0 decaying to the floor at the horizon."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if t >= cfg.kappa_horizon:
        return cfg.kappa_floor
    if cfg.kappa_shape == "linear":
        return 1.0 - (1.0 - cfg.kappa_floor) * t / cfg.kappa_horizon
    # exponential through the same endpoints
    return cfg.kappa_floor ** (t / cfg.kappa_horizon)


def pose_reward(t, r_track, cfg=RewardConfig()) -> float:
    return cfg.beta * kappa(t, cfg) * r_track


def contact_indicator(fingertips, contact_points, threshold=0.01) -> int:
    """1 when some fingertip lies within ``threshold`` (inclusive) of the map."""
    pts = np.asarray(getattr(contact_points, "points", contact_points), float).reshape(-1, 3)
    if len(pts) == 0:
        raise AssignmentError("empty contact map")
    tips = np.asarray(fingertips, float).reshape(-1, 3)
    d, _ = cKDTree(pts).query(tips)
    return int(np.any(d <= threshold))


def contact_reward(b, r_track, cfg=RewardConfig()) -> float:
    return cfg.beta_c * b * r_track


def task_reward(s: SimStateSnapshot, cfg=RewardConfig()):
    """(approach, lift, goal, bonus) shaping terms."""
    approach = -cfg.w_approach * float(np.linalg.norm(s.fingertips - s.object, axis=1).mean())
    lift = cfg.w_lift * max(0.0, float(s.object[2]) - cfg.table_height)
    dist = float(np.linalg.norm(s.object - s.goal))
    goal = -cfg.w_goal * dist
    bonus = cfg.w_bonus * float(dist < cfg.bonus_radius)
    return approach, lift, goal, bonus


def tracking_errors(s: SimStateSnapshot, cfg=RewardConfig()):
    """Wrist position, wrist orientation and joint errors against the reference.

    The orientation error is the rotation vector of R_t R_ref^T. In
    ``joints`` mode only the joint error is kept.
    """
    ref = s.reference
    if len(s.theta) != len(ref["theta"]):
        raise DimensionError("joint vector and reference joint vector differ in length")
    dtheta = s.theta - ref["theta"]
    if cfg.reference_mode == "joints":
        return np.zeros(3), np.zeros(3), dtheta
    dw = s.wrist - ref["w"]
    dphi = (Rotation.from_rotvec(s.phi) * Rotation.from_rotvec(ref["phi"]).inv()).as_rotvec()
    return dw, dphi, dtheta


def total_reward(s: SimStateSnapshot, contact_points, cfg=RewardConfig()) -> RewardBreakdown:
    dw, dphi, dtheta = tracking_errors(s, cfg)
    r_track = track_score(dw, dphi, dtheta, cfg)
    r_pose = pose_reward(s.t, r_track, cfg)
    b = contact_indicator(s.fingertips, contact_points, cfg.contact_threshold)
    r_contact = contact_reward(b, r_track, cfg)
    approach, lift, goal, bonus = task_reward(s, cfg)
    total = r_pose + r_contact + approach + lift + goal + bonus
    return RewardBreakdown(r_track, r_pose, r_contact, approach, lift, goal, bonus, total)


def reward_report(snapshots, contact_points, cfg=RewardConfig()) -> dict:
    rows = [dict(t=s.t, **total_reward(s, contact_points, cfg).to_dict()) for s in snapshots]
    return {"config": cfg.to_dict(), "steps": rows,
            "return": math.fsum(r["total"] for r in rows)}
