"""Triangle meshes and the analytic test shapes used throughout the suite."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import TopologyError


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    vertices: np.ndarray
    triangles: np.ndarray
    watertight: bool = field(init=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float).reshape(-1, 3)
        f = np.array(self.triangles, dtype=np.int64).reshape(-1, 3)
        if f.size and (f.min() < 0 or f.max() >= len(v)):
            raise ValueError("triangle index out of range")
        v.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", f)
        object.__setattr__(self, "watertight", _is_watertight(f))
        object.__setattr__(self, "_cache", {})

    def __len__(self):
        return len(self.triangles)

    @property
    def corners(self):
        """``(a, b, c)`` arrays of shape (m, 3)."""
        v, f = self.vertices, self.triangles
        return v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]

    @property
    def face_normals(self):
        a, b, c = self.corners
        n = np.cross(b - a, c - a)
        length = np.linalg.norm(n, axis=1, keepdims=True)
        return np.divide(n, length, out=np.zeros_like(n), where=length > 0)

    @property
    def areas(self):
        a, b, c = self.corners
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)

    @property
    def volume(self):
        """Signed enclosed volume; positive for outward-oriented meshes."""
        a, b, c = self.corners
        return float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0)

    @property
    def bounds(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    @property
    def diagonal(self):
        lo, hi = self.bounds
        return float(np.linalg.norm(hi - lo))

    def require_watertight(self):
        if not self.watertight:
            raise TopologyError("mesh is not watertight")

    def flipped(self):
        return TriangleMesh(self.vertices, self.triangles[:, ::-1])


def _is_watertight(f):
    if len(f) == 0:
        return False
    directed = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
    # every directed edge once, and its reverse present: closed, consistently oriented, 2 faces per edge
    keys = directed[:, 0] * (f.max() + 1) + directed[:, 1]
    if len(np.unique(keys)) != len(keys):
        return False
    rev = directed[:, 1] * (f.max() + 1) + directed[:, 0]
    return bool(np.isin(rev, keys).all())


def _weld(points, faces, decimals=12):
    """Merge coincident vertices and drop faces that collapse."""
    key = np.round(points, decimals) + 0.0  # folds -0.0 into 0.0
    uniq, inv = np.unique(key, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    faces = inv[faces]
    keep = (faces[:, 0] != faces[:, 1]) & (faces[:, 1] != faces[:, 2]) & (faces[:, 0] != faces[:, 2])
    # representative vertex: first occurrence, not the rounded key
    first = np.zeros(len(uniq), dtype=np.int64)
    first[inv[::-1]] = np.arange(len(inv))[::-1]
    return points[first], faces[keep]


def _orient_outward(mesh):
    return mesh.flipped() if mesh.volume < 0 else mesh


def _subdivided_triangle(A, B, C, n):
    """Regular grid of points on triangle ABC with ``n`` segments per edge."""
    pts, index = [], {}
    for i in range(n + 1):
        for j in range(n + 1 - i):
            index[i, j] = len(pts)
            pts.append((i * B + j * C + (n - i - j) * A) / n)
    faces = []
    for i in range(n):
        for j in range(n - i):
            faces.append((index[i, j], index[i + 1, j], index[i, j + 1]))
            if i + j < n - 1:
                faces.append((index[i + 1, j], index[i + 1, j + 1], index[i, j + 1]))
    return np.array(pts), np.array(faces)


def sphere(radius=1.0, center=(0.0, 0.0, 0.0), level=16):
    """Octahedron-based sphere; has vertices exactly on the six axis poles."""
    axes = np.eye(3)
    pts, faces = [], []
    for sx in (1, -1):
        for sy in (1, -1):
            for sz in (1, -1):
                A, B, C = sx * axes[0], sy * axes[1], sz * axes[2]
                p, f = _subdivided_triangle(A, B, C, level)
                faces.append(f + sum(len(q) for q in pts))
                pts.append(p)
    p = np.concatenate(pts)
    p /= np.linalg.norm(p, axis=1, keepdims=True)
    p, f = _weld(p, np.concatenate(faces))
    mesh = TriangleMesh(p * radius + np.asarray(center, float), f)
    return _orient_each_face(mesh, np.asarray(center, float))


def _orient_each_face(mesh, center):
    """Flip faces whose normal points toward ``center`` (star-shaped bodies only)."""
    a, b, c = mesh.corners
    n = np.cross(b - a, c - a)
    inward = np.einsum("ij,ij->i", n, (a + b + c) / 3 - center) < 0
    f = mesh.triangles.copy()
    f[inward] = f[inward][:, ::-1]
    return TriangleMesh(mesh.vertices, f)


def box(size=(1.0, 1.0, 1.0), center=(0.0, 0.0, 0.0), level=1):
    size = np.broadcast_to(np.asarray(size, float), (3,))
    pts, faces = [], []
    for axis in range(3):
        for sign in (1.0, -1.0):
            u, v = [k for k in range(3) if k != axis]
            for quad in ((0, 1, 2), (0, 2, 3)):
                corners = np.zeros((4, 3))
                corners[:, axis] = sign
                corners[:, u] = [-1, 1, 1, -1]
                corners[:, v] = [-1, -1, 1, 1]
                A, B, C = corners[list(quad)]
                p, f = _subdivided_triangle(A, B, C, level)
                faces.append(f + sum(len(q) for q in pts))
                pts.append(p)
    p, f = _weld(np.concatenate(pts), np.concatenate(faces))
    mesh = TriangleMesh(p * size / 2 + np.asarray(center, float), f)
    return _orient_each_face(mesh, np.asarray(center, float))


def torus(major=1.0, minor=0.3, n_major=64, n_minor=32, center=(0.0, 0.0, 0.0)):
    """Torus around the z axis."""
    i, j = np.meshgrid(np.arange(n_major), np.arange(n_minor), indexing="ij")
    u = 2 * np.pi * i / n_major
    v = 2 * np.pi * j / n_minor
    pts = np.stack([(major + minor * np.cos(v)) * np.cos(u),
                    (major + minor * np.cos(v)) * np.sin(u),
                    minor * np.sin(v)], axis=-1).reshape(-1, 3)
    idx = lambda a, b: (a % n_major) * n_minor + (b % n_minor)
    i, j = i.ravel(), j.ravel()
    faces = np.concatenate([np.stack([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)], 1),
                            np.stack([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)], 1)])
    return _orient_outward(TriangleMesh(pts + np.asarray(center, float), faces))


def dumbbell_field(points, lobe_radius, separation, neck_radius, neck_offset):
    """Signed-distance-like field of two spheres on the x axis joined by a
    capsule displaced along +y (negative inside)."""
    p = np.asarray(points, float)
    half = separation / 2
    s1 = np.linalg.norm(p - [-half, 0, 0], axis=-1) - lobe_radius
    s2 = np.linalg.norm(p - [half, 0, 0], axis=-1) - lobe_radius
    a = np.array([-half, neck_offset, 0.0])
    b = np.array([half, neck_offset, 0.0])
    t = np.clip(((p - a) @ (b - a)) / ((b - a) @ (b - a)), 0, 1)
    neck = np.linalg.norm(p - (a + t[..., None] * (b - a)), axis=-1) - neck_radius
    return np.minimum(np.minimum(s1, s2), neck)


def dumbbell(lobe_radius=0.03, separation=0.1, neck_radius=0.008, neck_offset=0.02, spacing=0.002):
    """Two lobes joined by a thin neck that runs beside (not through) the
    line joining the lobe tips, so the tip-to-tip segment leaves the volume."""
    from skimage.measure import marching_cubes

    half = separation / 2
    pad = 2 * spacing
    lo = np.array([-half - lobe_radius - pad, -lobe_radius - pad, -lobe_radius - pad])
    hi = np.array([half + lobe_radius + pad, max(lobe_radius, neck_offset + neck_radius) + pad, lobe_radius + pad])
    n = np.ceil((hi - lo) / spacing).astype(int) + 1
    axes = [lo[k] + spacing * np.arange(n[k]) for k in range(3)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    field_ = dumbbell_field(grid, lobe_radius, separation, neck_radius, neck_offset)
    field_[field_ == 0] = 1e-12  # keep the level set off grid nodes
    verts, faces, _, _ = marching_cubes(field_, level=0.0, spacing=(spacing,) * 3)
    verts, faces = _weld(verts.astype(float) + lo, faces.astype(np.int64))
    mesh = _orient_outward(TriangleMesh(verts, faces))
    if not mesh.watertight:
        raise TopologyError("marching cubes produced a non-watertight dumbbell")
    return mesh


def dumbbell_tips(lobe_radius=0.03, separation=0.1):
    half = separation / 2
    return np.array([-half - lobe_radius, 0.0, 0.0]), np.array([half + lobe_radius, 0.0, 0.0])


def single_triangle(a=(0, 0, 0), b=(1, 0, 0), c=(0, 1, 0)):
    return TriangleMesh(np.array([a, b, c], float), np.array([[0, 1, 2]]))
