"""Pipeline settings as one JSON document; partial documents fill from defaults."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

from .handkin.ik import IkConfig
from .metrics import MetricsConfig
from .reward import RewardConfig
from .sgcr import SgcrConfig

ENV_VAR = "CONTACTKIT_CONFIG"


def _from(cls, d):
    known = {f.name for f in fields(cls)}
    unknown = set(d) - known
    if unknown:
        raise ValueError(f"unknown {cls.__name__} settings {sorted(unknown)}")
    return cls(**d)


@dataclass(frozen=True)
class PipelineConfig:
    sgcr: SgcrConfig = field(default_factory=SgcrConfig)
    ik: IkConfig = field(default_factory=IkConfig)
    reward: RewardConfig = field(default_factory=RewardConfig)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)
    hand: str = "shadow_like"  # built-in name or path to a chain document
    thumb_side: str = "facing"

    def to_dict(self):
        return {"sgcr": self.sgcr.to_dict(), "ik": self.ik.to_dict(), "reward": self.reward.to_dict(),
                "metrics": self.metrics.to_dict(), "hand": self.hand, "thumb_side": self.thumb_side}

    @classmethod
    def from_dict(cls, d):
        unknown = set(d) - {"sgcr", "ik", "reward", "metrics", "hand", "thumb_side"}
        if unknown:
            raise ValueError(f"unknown config sections {sorted(unknown)}")
        return cls(
            sgcr=_from(SgcrConfig, d.get("sgcr", {})),
            ik=IkConfig.from_dict(d.get("ik", {})),
            reward=RewardConfig.from_dict(d.get("reward", {})),
            metrics=MetricsConfig.from_dict(d.get("metrics", {})),
            hand=d.get("hand", "shadow_like"),
            thumb_side=d.get("thumb_side", "facing"),
        )


def load_config(path=None) -> PipelineConfig:
    """Read ``path``, else the file named by $CONTACTKIT_CONFIG, else defaults."""
    path = path or os.environ.get(ENV_VAR)
    if not path:
        return PipelineConfig()
    return PipelineConfig.from_dict(json.loads(Path(path).read_text()))
