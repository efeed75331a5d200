"""Software depth rasterizer: nearest ray-triangle hit per pixel centre."""

from __future__ import annotations

import numpy as np

from .camera import CameraView

_NEAR = 1e-9


def _pixel_rays(intr, cols, rows):
    return ((cols - intr.center_x) / intr.focal_x, (rows - intr.center_y) / intr.focal_y)


def render_depth(mesh, view: CameraView) -> np.ndarray:
    """Depth map (camera-frame z) of ``mesh`` seen from ``view``; NaN where no triangle is hit.

    Each pixel's value is the exact intersection of its centre ray with the
    nearest triangle plane, so results do not depend on triangle order.
    """
    intr = view.intrinsics
    H, W = intr.height, intr.width
    zbuf = np.full((H, W), np.inf)
    if len(mesh) == 0:
        return np.full((H, W), np.nan)

    R, t = view.pose.rotation, view.pose.translation
    cam = mesh.vertices @ R.T + t
    tri = cam[mesh.triangles]  # (m, 3, 3)
    z = tri[:, :, 2]
    front = (z > _NEAR).all(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = intr.focal_x * tri[:, :, 0] / z + intr.center_x
        v = intr.focal_y * tri[:, :, 1] / z + intr.center_y
    normals = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    offset = np.einsum("ij,ij->i", normals, tri[:, 0])

    for k in np.flatnonzero(front):
        umin, umax = u[k].min(), u[k].max()
        vmin, vmax = v[k].min(), v[k].max()
        c0, c1 = max(int(np.ceil(umin - 1e-9)), 0), min(int(np.floor(umax + 1e-9)), W - 1)
        r0, r1 = max(int(np.ceil(vmin - 1e-9)), 0), min(int(np.floor(vmax + 1e-9)), H - 1)
        if c0 > c1 or r0 > r1:
            continue
        cols = np.arange(c0, c1 + 1, dtype=float)[None, :]
        rows = np.arange(r0, r1 + 1, dtype=float)[:, None]
        (ua, ub, uc), (va, vb, vc) = u[k], v[k]
        area = (ub - ua) * (vc - va) - (uc - ua) * (vb - va)
        if area == 0:
            continue
        w0 = ((ub - cols) * (vc - rows) - (uc - cols) * (vb - rows)) / area
        w1 = ((uc - cols) * (va - rows) - (ua - cols) * (vc - rows)) / area
        w2 = 1.0 - w0 - w1
        inside = (w0 >= -1e-9) & (w1 >= -1e-9) & (w2 >= -1e-9)
        if not inside.any():
            continue
        rx, ry = _pixel_rays(intr, cols, rows)
        denom = normals[k, 0] * rx + normals[k, 1] * ry + normals[k, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            depth = offset[k] / denom
        depth = np.where(inside & (depth > 0), depth, np.inf)
        block = zbuf[r0:r1 + 1, c0:c1 + 1]
        np.minimum(block, depth, out=block)

    # triangles crossing the camera plane: test every pixel ray directly
    partial = ~front & (z > _NEAR).any(axis=1)
    if partial.any():
        cols, rows = np.meshgrid(np.arange(W, dtype=float), np.arange(H, dtype=float))
        rx, ry = _pixel_rays(intr, cols, rows)
        dirs = np.stack([rx, ry, np.ones_like(rx)], axis=-1).reshape(-1, 3)
        for k in np.flatnonzero(partial):
            hit = _ray_triangle_z(dirs, tri[k])
            np.minimum(zbuf.reshape(-1), hit, out=zbuf.reshape(-1))

    zbuf[~np.isfinite(zbuf)] = np.nan
    return zbuf


def _ray_triangle_z(dirs, tri):
    """Moller-Trumbore from the camera origin; returns hit z (inf for misses)."""
    a, b, c = tri
    e1, e2 = b - a, c - a
    p = np.cross(dirs, e2)
    det = p @ e1
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / det
        s = -a
        uu = (p @ s) * inv
        q = np.cross(s, e1)
        vv = (dirs @ q) * inv
        tt = (q @ e2) * inv
    ok = (np.abs(det) > 1e-300) & (uu >= 0) & (vv >= 0) & (uu + vv <= 1) & (tt > 0)
    return np.where(ok, tt * dirs[:, 2], np.inf)
