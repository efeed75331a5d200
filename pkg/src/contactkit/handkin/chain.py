"""Kinematic hand chains with a free 6-DoF wrist.

Chain document::

    {"name": "...", "root": "palm", "palm_normal": [0, 0, 1], "thumb": "thumb",
     "joints": [{"name": "j", "parent": "palm", "child": "link",
                 "origin": {"xyz": [..], "rpy": [..]}, "axis": [..],
                 "limits": [lo, hi], "type": "revolute"}],
     "fingertips": [{"finger": "index", "frame": "index_tip"}]}

``rpy`` is fixed-axis roll-pitch-yaw (x, then y, then z). ``type`` defaults
to revolute; fixed joints carry no degree of freedom. The wrist pose
``(w, phi)`` maps the root frame to the world, with ``phi`` an axis-angle
vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

from ..errors import DimensionError


@dataclass(frozen=True)
class Joint:
    name: str
    parent: str
    child: str
    xyz: tuple = (0.0, 0.0, 0.0)
    rpy: tuple = (0.0, 0.0, 0.0)
    axis: tuple = (0.0, 0.0, 1.0)
    limits: tuple = (-np.pi, np.pi)
    type: str = "revolute"


@dataclass(frozen=True, eq=False)
class KinematicChain:
    name: str
    root: str
    joints: tuple
    fingertips: tuple  # ((finger, frame), ...)
    palm_normal: tuple = (0.0, 0.0, 1.0)
    thumb: str | None = None
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        children = [j.child for j in self.joints]
        if len(set(children)) != len(children):
            raise ValueError("a link has more than one parent joint")
        if self.root in children:
            raise ValueError(f"root link {self.root!r} has a parent joint")
        # topological order from the root; anything unreached is a cycle or a second root
        by_parent = {}
        for j in self.joints:
            by_parent.setdefault(j.parent, []).append(j)
        order, stack = [], [self.root]
        while stack:
            link = stack.pop()
            for j in reversed(by_parent.get(link, [])):
                order.append(j)
                stack.append(j.child)
        if len(order) != len(self.joints):
            raise ValueError("joints do not form a single tree under the root")
        for j in order:
            if j.type not in ("revolute", "fixed"):
                raise ValueError(f"joint {j.name}: unsupported type {j.type!r}")
            if j.limits[0] > j.limits[1]:
                raise ValueError(f"joint {j.name}: lower limit above upper limit")
        links = {self.root} | set(children)
        for finger, frame in self.fingertips:
            if frame not in links:
                raise ValueError(f"fingertip frame {frame!r} of {finger!r} is not a link")
        if self.thumb is not None and self.thumb not in self.fingers:
            raise ValueError(f"thumb {self.thumb!r} is not a declared finger")

        actuated = [j for j in order if j.type == "revolute"]
        parent_joint = {j.child: j for j in order}
        # ancestor actuated joints of every fingertip frame
        chains = []
        for _, frame in self.fingertips:
            anc, link = [], frame
            while link != self.root:
                j = parent_joint[link]
                if j.type == "revolute":
                    anc.append(j.name)
                link = j.parent
            chains.append(frozenset(anc))
        index = {
            "order": tuple(order),
            "actuated": tuple(j.name for j in actuated),
            "col": {j.name: k for k, j in enumerate(actuated)},
            "lo": np.array([j.limits[0] for j in actuated], float),
            "hi": np.array([j.limits[1] for j in actuated], float),
            "tip_ancestors": tuple(chains),
            "origin_R": {j.name: Rotation.from_euler("xyz", j.rpy).as_matrix() for j in order},
            "axis": {j.name: np.asarray(j.axis, float) / np.linalg.norm(j.axis) for j in order},
        }
        object.__setattr__(self, "_index", index)

    @property
    def dof(self) -> int:
        """Actuated joint count d_theta."""
        return len(self._index["actuated"])

    @property
    def fingers(self):
        return [f for f, _ in self.fingertips]

    @property
    def joint_names(self):
        return list(self._index["actuated"])

    @property
    def lower(self):
        return self._index["lo"].copy()

    @property
    def upper(self):
        return self._index["hi"].copy()

    @property
    def thumb_finger(self):
        """Declared thumb, else a finger named ``thumb``, else the first finger."""
        if self.thumb is not None:
            return self.thumb
        return "thumb" if "thumb" in self.fingers else self.fingers[0]

    @classmethod
    def from_document(cls, doc):
        joints = []
        for j in doc["joints"]:
            origin = j.get("origin", {})
            joints.append(Joint(
                name=j["name"], parent=j["parent"], child=j["child"],
                xyz=tuple(float(x) for x in origin.get("xyz", (0, 0, 0))),
                rpy=tuple(float(x) for x in origin.get("rpy", (0, 0, 0))),
                axis=tuple(float(x) for x in j.get("axis", (0, 0, 1))),
                limits=tuple(float(x) for x in j.get("limits", (-np.pi, np.pi))),
                type=j.get("type", "revolute"),
            ))
        parents = {j.parent for j in joints}
        children = {j.child for j in joints}
        root = doc.get("root")
        if root is None:
            roots = sorted(parents - children)
            if len(roots) != 1:
                raise ValueError(f"chain must have exactly one root link, found {roots}")
            root = roots[0]
        return cls(doc.get("name", ""), root, tuple(joints),
                   tuple((f["finger"], f["frame"]) for f in doc["fingertips"]),
                   tuple(float(x) for x in doc.get("palm_normal", (0, 0, 1))), doc.get("thumb"))

    def to_document(self):
        return {
            "name": self.name, "root": self.root, "palm_normal": list(self.palm_normal),
            "thumb": self.thumb,
            "joints": [{"name": j.name, "parent": j.parent, "child": j.child,
                        "origin": {"xyz": list(j.xyz), "rpy": list(j.rpy)}, "axis": list(j.axis),
                        "limits": list(j.limits), "type": j.type} for j in self.joints],
            "fingertips": [{"finger": f, "frame": fr} for f, fr in self.fingertips],
        }


@dataclass(frozen=True, eq=False)
class HandConfiguration:
    w: np.ndarray
    phi: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        for name in ("w", "phi", "theta"):
            arr = np.array(getattr(self, name), float).reshape(-1)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.w.shape != (3,) or self.phi.shape != (3,):
            raise DimensionError("wrist position and orientation must be 3-vectors")

    @property
    def vector(self):
        return np.concatenate([self.w, self.phi, self.theta])

    @classmethod
    def from_vector(cls, h):
        h = np.asarray(h, float)
        return cls(h[:3], h[3:6], h[6:])

    @property
    def rotation(self):
        return Rotation.from_rotvec(np.array(self.phi)).as_matrix()

    def to_dict(self):
        return {"w": self.w.tolist(), "phi": self.phi.tolist(), "theta": self.theta.tolist()}


def _check(chain, h):
    if len(h.theta) != chain.dof:
        raise DimensionError(f"theta has {len(h.theta)} entries, chain has {chain.dof} joints")


def _rot_axis(axis, angle):
    return Rotation.from_rotvec(axis * angle).as_matrix()


def link_frames(chain, h):
    """World rotation and position of every link, plus world joint data.

    Returns ``(frames, joints)`` where ``frames[link] = (R, p)`` and
    ``joints[name] = (origin, axis)`` in world coordinates.
    """
    _check(chain, h)
    idx = chain._index
    frames = {chain.root: (h.rotation, h.w.copy())}
    joints = {}
    for j in idx["order"]:
        R_p, p_p = frames[j.parent]
        R_o = R_p @ idx["origin_R"][j.name]
        p_o = p_p + R_p @ np.asarray(j.xyz, float)
        axis = idx["axis"][j.name]
        if j.type == "revolute":
            R_c = R_o @ _rot_axis(axis, h.theta[idx["col"][j.name]])
            joints[j.name] = (p_o, R_o @ axis)
        else:
            R_c = R_o
        frames[j.child] = (R_c, p_o)
    return frames, joints


def forward_kinematics(chain, h) -> np.ndarray:
    """Fingertip positions, one row per finger in declared order."""
    frames, _ = link_frames(chain, h)
    return np.array([frames[frame][1] for _, frame in chain.fingertips])


def so3_left_jacobian(phi):
    """d(exp(phi)) in the world frame: exp(phi + d) ~ exp(J d) exp(phi)."""
    phi = np.asarray(phi, float)
    t = np.linalg.norm(phi)
    K = np.array([[0, -phi[2], phi[1]], [phi[2], 0, -phi[0]], [-phi[1], phi[0], 0]])
    if t < 1e-6:
        return np.eye(3) + 0.5 * K + K @ K / 6.0
    return np.eye(3) + (1 - np.cos(t)) / t**2 * K + (t - np.sin(t)) / t**3 * K @ K


def fingertip_jacobian(chain, h) -> np.ndarray:
    """Analytic d(tips)/d(w, phi, theta), shape (3 * fingers, 6 + dof).

    Revolute columns are ``axis x (tip - joint origin)``; orientation columns
    use the SO(3) left Jacobian so they are exact partials in ``phi``.
    """
    frames, joints = link_frames(chain, h)
    idx = chain._index
    nf = len(chain.fingertips)
    J = np.zeros((3 * nf, 6 + chain.dof))
    Jl = so3_left_jacobian(h.phi)
    for f, (_, frame) in enumerate(chain.fingertips):
        tip = frames[frame][1]
        r = slice(3 * f, 3 * f + 3)
        J[r, 0:3] = np.eye(3)
        J[r, 3:6] = np.cross(Jl.T, tip - h.w).T
        for name in idx["tip_ancestors"][f]:
            origin, axis = joints[name]
            J[r, 6 + idx["col"][name]] = np.cross(axis, tip - origin)
    return J


def clamp_joints(chain, theta) -> np.ndarray:
    return np.clip(np.asarray(theta, float), chain._index["lo"], chain._index["hi"])


def mid_range(chain) -> np.ndarray:
    return 0.5 * (chain._index["lo"] + chain._index["hi"])


def world_palm_normal(chain, h) -> np.ndarray:
    return h.rotation @ np.asarray(chain.palm_normal, float)
