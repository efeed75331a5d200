"""Built-in chain documents: a five-digit 20-DoF hand, a four-digit 16-DoF
hand and a planar two-link test finger.

Palm frame: fingers point along +x, the palm faces +z, and positive flexion
curls the digits toward +z. Dimensions are rough human-scale values.
"""

from __future__ import annotations

import numpy as np

from .chain import KinematicChain

FLEX = (-0.2, 1.6)
ABDUCT = (-0.35, 0.35)
FLEX_AXIS = (0.0, -1.0, 0.0)  # rotates +x toward +z


def _digit(prefix, base_xyz, base_rpy, lengths, first_axis=(0.0, 0.0, 1.0), first_limits=ABDUCT):
    """Four revolute joints (spread, three flexions) and a fixed tip frame."""
    l1, l2, l3 = lengths
    joints = [
        {"name": f"{prefix}_j0", "parent": "palm", "child": f"{prefix}_base",
         "origin": {"xyz": list(base_xyz), "rpy": list(base_rpy)}, "axis": list(first_axis),
         "limits": list(first_limits)},
        {"name": f"{prefix}_j1", "parent": f"{prefix}_base", "child": f"{prefix}_proximal",
         "origin": {"xyz": [0, 0, 0], "rpy": [0, 0, 0]}, "axis": list(FLEX_AXIS), "limits": list(FLEX)},
        {"name": f"{prefix}_j2", "parent": f"{prefix}_proximal", "child": f"{prefix}_middle",
         "origin": {"xyz": [l1, 0, 0], "rpy": [0, 0, 0]}, "axis": list(FLEX_AXIS), "limits": list(FLEX)},
        {"name": f"{prefix}_j3", "parent": f"{prefix}_middle", "child": f"{prefix}_distal",
         "origin": {"xyz": [l2, 0, 0], "rpy": [0, 0, 0]}, "axis": list(FLEX_AXIS), "limits": list(FLEX)},
        {"name": f"{prefix}_tip_joint", "parent": f"{prefix}_distal", "child": f"{prefix}_tip",
         "origin": {"xyz": [l3, 0, 0], "rpy": [0, 0, 0]}, "axis": [0, 0, 1], "limits": [0, 0],
         "type": "fixed"},
    ]
    return joints, {"finger": prefix, "frame": f"{prefix}_tip"}


def _hand(name, digits):
    joints, tips = [], []
    for args in digits:
        j, t = _digit(*args)
        joints += j
        tips.append(t)
    return {"name": name, "root": "palm", "palm_normal": [0.0, 0.0, 1.0], "thumb": "thumb",
            "joints": joints, "fingertips": tips}


# the thumb sits at the palm's -y edge, rolled so it flexes across the palm
THUMB = ("thumb", (0.02, -0.04, -0.01), (-np.pi / 3, 0.0, np.pi / 4), (0.04, 0.03, 0.025),
         (1.0, 0.0, 0.0), (-0.5, 1.2))


def shadow_like_document():
    """Five digits, four actuated joints each (20 DoF)."""
    return _hand("shadow_like", [
        THUMB,
        ("index", (0.095, -0.025, 0.0), (0, 0, 0), (0.045, 0.025, 0.022)),
        ("middle", (0.099, -0.003, 0.0), (0, 0, 0), (0.045, 0.027, 0.022)),
        ("ring", (0.095, 0.019, 0.0), (0, 0, 0), (0.045, 0.025, 0.022)),
        ("little", (0.086, 0.040, 0.0), (0, 0, 0), (0.038, 0.022, 0.020)),
    ])


def allegro_like_document():
    """Three fingers and a thumb, four actuated joints each (16 DoF)."""
    return _hand("allegro_like", [
        ("index", (0.095, -0.045, 0.0), (0, 0, 0), (0.054, 0.038, 0.045)),
        ("middle", (0.095, 0.0, 0.0), (0, 0, 0), (0.054, 0.038, 0.045)),
        ("ring", (0.095, 0.045, 0.0), (0, 0, 0), (0.054, 0.038, 0.045)),
        ("thumb", (0.0, -0.05, -0.01), (-np.pi / 3, 0.0, np.pi / 4), (0.055, 0.05, 0.06),
         (1.0, 0.0, 0.0), (-0.5, 1.4)),
    ])


def planar_finger_document(l1=0.04, l2=0.03, limits=(-np.pi, np.pi)):
    """Two revolute joints about +z; the tip sits at (l1 + l2, 0, 0) at zero."""
    return {
        "name": "planar_finger", "root": "palm", "palm_normal": [0.0, 0.0, 1.0],
        "joints": [
            {"name": "joint1", "parent": "palm", "child": "link1",
             "origin": {"xyz": [0, 0, 0], "rpy": [0, 0, 0]}, "axis": [0, 0, 1], "limits": list(limits)},
            {"name": "joint2", "parent": "link1", "child": "link2",
             "origin": {"xyz": [l1, 0, 0], "rpy": [0, 0, 0]}, "axis": [0, 0, 1], "limits": list(limits)},
            {"name": "tip", "parent": "link2", "child": "tip_link",
             "origin": {"xyz": [l2, 0, 0], "rpy": [0, 0, 0]}, "axis": [0, 0, 1], "limits": [0, 0],
             "type": "fixed"},
        ],
        "fingertips": [{"finger": "finger", "frame": "tip_link"}],
    }


BUILTIN = {
    "shadow_like": shadow_like_document,
    "allegro_like": allegro_like_document,
    "planar_finger": planar_finger_document,
}


def builtin_chain(name) -> KinematicChain:
    if name not in BUILTIN:
        raise ValueError(f"unknown hand {name!r}; choose from {sorted(BUILTIN)}")
    return KinematicChain.from_document(BUILTIN[name]())
