"""Pinhole cameras, depth maps, back-projection and reprojection.

Convention: camera looks down +Z, image x grows right and y grows down, and
pixel ``(col, row)`` has its centre at continuous coordinate ``(col, row)``.
A pixel coordinate is inside the image when ``-0.5 <= u < width - 0.5``.
Depth maps are ``(height, width)`` float arrays holding camera-frame z; NaN
marks background (no hit).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import BehindCameraError, BoundsError, InvalidDepthError, ShapeError

MISS = float("inf")


@dataclass(frozen=True)
class CameraIntrinsics:
    focal_x: float
    focal_y: float
    center_x: float
    center_y: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.focal_x > 0 and self.focal_y > 0):
            raise ValueError("focal lengths must be positive")
        if self.width < 1 or self.height < 1:
            raise ValueError("image must be at least 1x1")
        if not (-0.5 <= self.center_x <= self.width - 0.5 and -0.5 <= self.center_y <= self.height - 0.5):
            raise ValueError("principal point outside the image")

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.focal_x, 0.0, self.center_x],
                         [0.0, self.focal_y, self.center_y],
                         [0.0, 0.0, 1.0]])

    @classmethod
    def from_fov(cls, width, height, fov_x_deg):
        f = 0.5 * width / np.tan(np.radians(fov_x_deg) / 2)
        return cls(f, f, (width - 1) / 2, (height - 1) / 2, width, height)


@dataclass(frozen=True)
class CameraPose:
    """World-to-camera transform: ``x_cam = rotation @ x_world + translation``."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = np.array(self.rotation, dtype=float).reshape(3, 3)
        t = np.array(self.translation, dtype=float).reshape(3)
        if np.abs(R.T @ R - np.eye(3)).max() > 1e-9 or abs(np.linalg.det(R) - 1.0) > 1e-9:
            raise ValueError("rotation must be orthonormal with det +1")
        R.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @property
    def center(self) -> np.ndarray:
        """Camera centre in world coordinates."""
        return -self.rotation.T @ self.translation

    @classmethod
    def identity(cls):
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def look_at(cls, eye, target, up=(0.0, 0.0, 1.0)):
        eye = np.asarray(eye, dtype=float)
        z = np.asarray(target, dtype=float) - eye
        z /= np.linalg.norm(z)
        x = np.cross(z, np.asarray(up, dtype=float))
        if np.linalg.norm(x) < 1e-12:
            raise ValueError("up vector parallel to viewing direction")
        x /= np.linalg.norm(x)
        y = np.cross(z, x)
        R = np.stack([x, y, z])
        # re-orthonormalise to keep the 1e-9 invariant after float noise
        u, _, vt = np.linalg.svd(R)
        R = u @ vt
        return cls(R, -R @ eye)


@dataclass(frozen=True, eq=False)
class CameraView:
    intrinsics: CameraIntrinsics
    pose: CameraPose
    depth: np.ndarray | None = None
    view_id: int = 1
    name: str = field(default="")

    def __post_init__(self):
        if self.depth is not None:
            d = np.array(self.depth, dtype=float)
            if d.shape != (self.intrinsics.height, self.intrinsics.width):
                raise ShapeError(
                    f"depth shape {d.shape} does not match intrinsics "
                    f"{(self.intrinsics.height, self.intrinsics.width)}")
            d[~(d > 0)] = np.nan  # zero, negative, inf and NaN all mean "absent"
            d[~np.isfinite(d)] = np.nan
            d.setflags(write=False)
            object.__setattr__(self, "depth", d)

    @property
    def shape(self):
        return (self.intrinsics.height, self.intrinsics.width)

    def with_depth(self, depth):
        return CameraView(self.intrinsics, self.pose, depth, self.view_id, self.name)

    @property
    def valid(self) -> np.ndarray:
        if self.depth is None:
            raise InvalidDepthError(f"view {self.view_id} has no depth map")
        return np.isfinite(self.depth)


def _in_bounds(intr, u, v):
    return (u >= -0.5) & (u < intr.width - 0.5) & (v >= -0.5) & (v < intr.height - 0.5)


def pixel_index(u, v):
    """Nearest integer pixel ``(col, row)`` for continuous coordinates."""
    return np.floor(np.asarray(u) + 0.5).astype(int), np.floor(np.asarray(v) + 0.5).astype(int)


def back_project_many(view, u, v, depth):
    """Vectorised back-projection without validation; returns (n, 3) world points."""
    intr = view.intrinsics
    u, v, depth = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float), np.asarray(depth, float))
    cam = np.stack([(u - intr.center_x) / intr.focal_x * depth,
                    (v - intr.center_y) / intr.focal_y * depth,
                    depth], axis=-1)
    return (cam - view.pose.translation) @ view.pose.rotation


def project_many(view, points):
    """Vectorised projection; returns ``(u, v, z)`` arrays. No validation."""
    cam = np.asarray(points, float) @ view.pose.rotation.T + view.pose.translation
    z = cam[..., 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        u = view.intrinsics.focal_x * cam[..., 0] / z + view.intrinsics.center_x
        v = view.intrinsics.focal_y * cam[..., 1] / z + view.intrinsics.center_y
    return u, v, z


def back_project(view: CameraView, pixel, depth: float) -> np.ndarray:
    """World point seen at ``pixel`` with camera-frame depth ``depth``."""
    if not (np.isfinite(depth) and depth > 0):
        raise InvalidDepthError(f"depth must be positive, got {depth}")
    u, v = float(pixel[0]), float(pixel[1])
    if not _in_bounds(view.intrinsics, u, v):
        raise BoundsError(f"pixel ({u}, {v}) outside {view.intrinsics.width}x{view.intrinsics.height} image")
    return back_project_many(view, u, v, depth)


def reproject(point, view: CameraView):
    """Project a world point; returns ``(pixel, z)`` with z the camera-frame depth."""
    u, v, z = project_many(view, np.asarray(point, float))
    if not z > 0:
        raise BehindCameraError(f"point has camera depth {float(z)}")
    return np.array([float(u), float(v)]), float(z)


def lookup_depth(view, u, v):
    """Depth at the nearest pixel to ``(u, v)``; NaN when outside or background."""
    intr = view.intrinsics
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    inside = _in_bounds(intr, u, v) & np.isfinite(u) & np.isfinite(v)
    out = np.full(u.shape, np.nan)
    col, row = pixel_index(np.where(inside, u, 0), np.where(inside, v, 0))
    out[inside] = view.depth[row[inside], col[inside]]
    return out


def depth_consistency_many(src, dst, cols, rows):
    """Vectorised depth discrepancy for integer source pixels.

    Returns ``(delta, dst_col, dst_row, hit)``; ``delta`` is ``MISS`` where the
    reprojected point falls behind ``dst``, outside its image, or on background.
    """
    cols = np.asarray(cols, int)
    rows = np.asarray(rows, int)
    d = src.depth[rows, cols]
    pts = back_project_many(src, cols, rows, d)
    u, v, z = project_many(dst, pts)
    hit = (z > 0) & _in_bounds(dst.intrinsics, u, v)
    dcol, drow = pixel_index(np.where(hit, u, 0), np.where(hit, v, 0))
    dcol = np.where(hit, dcol, 0)
    drow = np.where(hit, drow, 0)
    D = np.where(hit, dst.depth[drow, dcol], np.nan)
    hit &= np.isfinite(D)
    delta = np.where(hit, np.abs(D - z), MISS)
    return delta, dcol, drow, hit


def _same_camera(a, b):
    if a is b:
        return True
    return (a.intrinsics == b.intrinsics
            and np.array_equal(a.pose.rotation, b.pose.rotation)
            and np.array_equal(a.pose.translation, b.pose.translation)
            and np.array_equal(a.depth, b.depth, equal_nan=True))


def depth_consistency(pixel, src: CameraView, dst: CameraView) -> float:
    """Absolute difference between the depth ``dst`` rendered at the reprojected
    pixel and the reprojected point's own depth; ``MISS`` (inf) when ``dst``
    has no valid depth there."""
    if src.depth is None or dst.depth is None:
        raise InvalidDepthError("both views need depth maps")
    u, v = float(pixel[0]), float(pixel[1])
    if not _in_bounds(src.intrinsics, u, v):
        raise BoundsError(f"pixel ({u}, {v}) outside source image")
    col, row = pixel_index(u, v)
    if not np.isfinite(src.depth[row, col]):
        raise InvalidDepthError(f"source pixel ({col}, {row}) has no valid depth")
    if _same_camera(src, dst):
        return 0.0
    delta, *_ = depth_consistency_many(src, dst, np.array([col]), np.array([row]))
    return float(delta[0])
