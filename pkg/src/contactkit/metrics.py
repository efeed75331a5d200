"""Episode-level grasp metrics: success, contact-to-intent distance, intent
success, joint-space style diversity and hand-surface coverage.

An episode is a list of snapshots (see ``reward`` for the log format).
Contacts for the distance metrics are the fingertips flagged ``in_contact``
on the final step.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .errors import DimensionError, EmptyInputError, InsufficientDataError, MissingContactError
from .geometry.query import signed_distances
from .reward import read_log


@dataclass(frozen=True)
class MetricsConfig:
    success_radius: float = 0.05
    hold_steps: int = 20
    isr_threshold: float = 0.04
    sad_aggregation: str = "mean"  # or "min"
    coverage_taus: tuple = (0.002, 0.005)

    def __post_init__(self):
        if self.sad_aggregation not in ("mean", "min"):
            raise ValueError(f"unknown sad_aggregation {self.sad_aggregation!r}")
        if self.hold_steps < 1:
            raise ValueError("hold_steps must be >= 1")
        object.__setattr__(self, "coverage_taus", tuple(float(t) for t in self.coverage_taus))

    def to_dict(self):
        d = asdict(self)
        d["coverage_taus"] = list(self.coverage_taus)
        return d

    @classmethod
    def from_dict(cls, d):
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"unknown metric settings {sorted(unknown)}")
        return cls(**d)


@dataclass(eq=False)
class EpisodeLog:
    snapshots: list
    intent_id: int | None = None
    name: str = ""

    def __post_init__(self):
        if not self.snapshots:
            raise EmptyInputError(f"episode {self.name!r} has no snapshots")
        if self.intent_id is None:
            self.intent_id = self.snapshots[-1].intent_id

    @property
    def final(self):
        return self.snapshots[-1]

    @property
    def theta_final(self):
        return np.asarray(self.final.theta, float)

    def goal_distances(self):
        return np.array([np.linalg.norm(s.object - s.goal) for s in self.snapshots])

    def contacts(self):
        """Final-step fingertip positions flagged as in contact."""
        s = self.final
        if s.in_contact is None:
            return np.empty((0, 3))
        return s.fingertips[np.asarray(s.in_contact, bool)]

    @classmethod
    def read(cls, path):
        return cls(read_log(path), name=Path(path).stem)


def episode_success(log: EpisodeLog, radius=0.05, hold=20) -> bool:
    """True when the object stays strictly within ``radius`` of the goal for
    ``hold`` consecutive steps somewhere in the episode."""
    run = 0
    for d in log.goal_distances():
        run = run + 1 if d < radius else 0
        if run >= hold:
            return True
    return False


def gsr(logs, radius=0.05, hold=20) -> float:
    if not logs:
        raise EmptyInputError("no episodes")
    return sum(episode_success(l, radius, hold) for l in logs) / len(logs)


def _map_points(maps, log):
    if isinstance(maps, dict):
        key = log.intent_id
        if key not in maps:
            raise MissingContactError(f"no contact map for intent {key!r} of episode {log.name!r}")
        m = maps[key]
    else:
        m = maps
    return np.asarray(getattr(m, "points", m), float).reshape(-1, 3)


def sad(log: EpisodeLog, contact_map, aggregation="mean") -> float:
    """Distance from the final-step contacts to the intended contact points,
    averaged (or minimised) over contacting fingertips."""
    tips = log.contacts()
    if len(tips) == 0:
        raise MissingContactError(f"episode {log.name!r} records no fingertip contact")
    pts = _map_points(contact_map, log)
    if len(pts) == 0:
        raise MissingContactError("empty contact map")
    d, _ = cKDTree(pts).query(tips)
    if aggregation == "mean":
        return math.fsum(d) / len(d)
    if aggregation == "min":
        return float(d.min())
    raise ValueError(f"unknown aggregation {aggregation!r}")


def msad(logs, maps, cfg=MetricsConfig()):
    """Mean SAD over successful episodes, or None when none succeeded."""
    vals = [sad(l, maps, cfg.sad_aggregation) for l in logs
            if episode_success(l, cfg.success_radius, cfg.hold_steps)]
    return math.fsum(vals) / len(vals) if vals else None


def isr(logs, maps, cfg=MetricsConfig()) -> float:
    """Fraction of all episodes that succeed with SAD below the threshold."""
    if not logs:
        raise EmptyInputError("no episodes")
    n = 0
    for l in logs:
        if episode_success(l, cfg.success_radius, cfg.hold_steps) and len(l.contacts()):
            n += sad(l, maps, cfg.sad_aggregation) < cfg.isr_threshold
    return n / len(logs)


def pairwise_mean_distance(vectors) -> float:
    vecs = [np.asarray(v, float) for v in vectors]
    if len(vecs) < 2:
        raise InsufficientDataError("need at least two vectors")
    if len({len(v) for v in vecs}) != 1:
        raise DimensionError("vectors differ in length")
    d = [float(np.linalg.norm(a - b)) for a, b in itertools.combinations(vecs, 2)]
    # sorted accumulation keeps the sum independent of episode order
    return math.fsum(sorted(d)) / len(d)


def style_diversity(logs, cfg=MetricsConfig()) -> float:
    """Mean pairwise L2 distance of final joint vectors over successes."""
    wins = [l.theta_final for l in logs if episode_success(l, cfg.success_radius, cfg.hold_steps)]
    if len(wins) < 2:
        raise InsufficientDataError(f"{len(wins)} successful episodes; style diversity needs two")
    return pairwise_mean_distance(wins)


def coverage(hand_points, mesh, tau) -> float:
    """Percentage of points whose signed distance to the surface is within +-tau."""
    pts = np.asarray(hand_points, float).reshape(-1, 3)
    if len(pts) == 0:
        raise EmptyInputError("no hand-surface points")
    sd = signed_distances(mesh, pts)
    return 100.0 * np.count_nonzero(np.abs(sd) <= tau) / len(pts)


def evaluate(logs, maps, cfg=MetricsConfig()) -> dict:
    """Report document with every episode metric and the settings used."""
    if not logs:
        raise EmptyInputError("no episodes")
    wins = [episode_success(l, cfg.success_radius, cfg.hold_steps) for l in logs]
    try:
        sd = style_diversity(logs, cfg)
    except InsufficientDataError:
        sd = None
    report = {
        "episodes": len(logs),
        "successes": int(sum(wins)),
        "gsr": gsr(logs, cfg.success_radius, cfg.hold_steps),
        "msad": msad(logs, maps, cfg),
        "isr": isr(logs, maps, cfg),
        "sd": sd,
        "per_episode": [{"name": l.name, "intent_id": l.intent_id, "success": bool(w)} for l, w in zip(logs, wins)],
        "config": cfg.to_dict(),
    }
    return report
