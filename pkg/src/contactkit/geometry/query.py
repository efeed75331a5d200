"""Inside/outside, distance and sampling queries on watertight triangle meshes.

Inside tests cast a ray along a fixed pseudo-random direction and count
crossings. Triangles are binned on the plane orthogonal to that direction so
each query only touches the triangles its ray can hit. A ray that grazes an
edge or vertex is re-cast along the next direction in a fixed list, and the
generalized winding number is the last resort.

Distances are exact: a KD-tree over triangle centroids bounds the candidate
set, then exact point-triangle distances are taken over the candidates.
"""

from __future__ import annotations

import logging

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from ..errors import EmptyInputError

log = logging.getLogger(__name__)

_BARY_EPS = 1e-9
_N_DIRECTIONS = 8
_CHUNK = 1 << 18


def _directions():
    rng = np.random.default_rng(20240611)
    d = rng.normal(size=(_N_DIRECTIONS, 3))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


_RAY_DIRS = _directions()


def _cache(mesh):
    return mesh._cache


# ---------------------------------------------------------------- ray parity


class _ParityGrid:
    """Triangles binned on the plane orthogonal to one ray direction."""

    def __init__(self, mesh, direction):
        d = np.asarray(direction, float)
        e1 = np.cross(d, [1.0, 0.0, 0.0])
        if np.linalg.norm(e1) < 0.1:
            e1 = np.cross(d, [0.0, 1.0, 0.0])
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(d, e1)
        self.basis = np.stack([e1, e2])
        self.direction = d

        a, b, c = mesh.corners
        A, B, C = a @ self.basis.T, b @ self.basis.T, c @ self.basis.T
        self.A = A
        self.depth = np.stack([a @ d, b @ d, c @ d], axis=1)
        m = np.stack([B - A, C - A], axis=2)  # columns: B-A, C-A
        det = m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]
        scale = max(mesh.diagonal, 1e-300)
        self.edge_on = np.abs(det) <= 1e-14 * scale * scale
        safe = np.where(self.edge_on, 1.0, det)
        self.inv = np.stack([np.stack([m[:, 1, 1], -m[:, 0, 1]], 1),
                             np.stack([-m[:, 1, 0], m[:, 0, 0]], 1)], 1) / safe[:, None, None]

        lo2 = np.minimum(np.minimum(A, B), C)
        hi2 = np.maximum(np.maximum(A, B), C)
        self.lo2, self.hi2 = lo2, hi2
        self.lo = lo2.min(axis=0) - 1e-9 * scale
        span = hi2.max(axis=0) + 1e-9 * scale - self.lo
        n = max(1, int(2 * np.sqrt(len(A))))
        self.n = n
        self.cell = np.maximum(span / n, 1e-300)
        pad = 1e-9 * scale
        i0 = np.clip(((lo2 - pad - self.lo) // self.cell).astype(int), 0, n - 1)
        i1 = np.clip(((hi2 + pad - self.lo) // self.cell).astype(int), 0, n - 1)
        cells, tris = [], []
        for t in range(len(A)):
            xs = np.arange(i0[t, 0], i1[t, 0] + 1)
            ys = np.arange(i0[t, 1], i1[t, 1] + 1)
            ids = (xs[:, None] * n + ys[None, :]).ravel()
            cells.append(ids)
            tris.append(np.full(len(ids), t))
        cells = np.concatenate(cells)
        tris = np.concatenate(tris)
        order = np.argsort(cells, kind="stable")
        self.tris = tris[order]
        self.start = np.searchsorted(cells[order], np.arange(n * n + 1))
        self.scale = scale

    def crossings(self, points):
        """Return ``(count, ambiguous, on_surface)`` for each point."""
        P2 = points @ self.basis.T
        s0 = points @ self.direction
        n = len(points)
        idx = np.floor((P2 - self.lo) / self.cell).astype(int)
        outside = (idx < 0).any(1) | (idx >= self.n).any(1)
        cell = np.where(outside, 0, idx[:, 0] * self.n + idx[:, 1])
        counts = np.where(outside, 0, self.start[cell + 1] - self.start[cell])
        total = int(counts.sum())
        pid = np.repeat(np.arange(n), counts)
        offs = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        tid = self.tris[np.repeat(self.start[cell], counts) + offs]

        rel = P2[pid] - self.A[tid]
        inv = self.inv[tid]
        l1 = inv[:, 0, 0] * rel[:, 0] + inv[:, 0, 1] * rel[:, 1]
        l2 = inv[:, 1, 0] * rel[:, 0] + inv[:, 1, 1] * rel[:, 1]
        l0 = 1.0 - l1 - l2
        lmin = np.minimum(np.minimum(l0, l1), l2)
        inside = lmin > _BARY_EPS
        touching = (lmin >= -_BARY_EPS) & ~inside
        dep = self.depth[tid]
        s = dep[:, 0] * l0 + dep[:, 1] * l1 + dep[:, 2] * l2 - s0[pid]
        tol = 1e-12 * self.scale
        edge_on = self.edge_on[tid]
        on = (lmin >= -_BARY_EPS) & (np.abs(s) <= tol) & ~edge_on
        hit = inside & (s > tol) & ~edge_on
        amb = (touching & (s > -tol)) | (inside & (np.abs(s) <= tol))
        if edge_on.any():
            # a ray parallel to a triangle can only meet its boundary
            amb |= edge_on & self._near_edge_on(P2[pid], tid)
        count = np.bincount(pid, weights=hit, minlength=n).astype(int)
        ambiguous = np.bincount(pid, weights=amb, minlength=n) > 0
        on_surface = np.bincount(pid, weights=on, minlength=n) > 0
        return count, ambiguous & ~on_surface, on_surface

    def _near_edge_on(self, P2, tid):
        pad = 1e-9 * self.scale
        return ((P2 >= self.lo2[tid] - pad) & (P2 <= self.hi2[tid] + pad)).all(1)


def _parity_grid(mesh, k):
    key = ("parity", k)
    c = _cache(mesh)
    if key not in c:
        c[key] = _ParityGrid(mesh, _RAY_DIRS[k])
    return c[key]


def _inside_parity(mesh, points):
    inside = np.zeros(len(points), bool)
    todo = np.arange(len(points))
    for k in range(_N_DIRECTIONS):
        if not len(todo):
            break
        count, amb, on = _parity_grid(mesh, k).crossings(points[todo])
        done = ~amb
        inside[todo[done]] = on[done] | (count[done] % 2 == 1)
        todo = todo[amb]
    if len(todo):
        log.debug("parity ambiguous after %d directions for %d points; using winding number",
                  _N_DIRECTIONS, len(todo))
        inside[todo] = winding_number(mesh, points[todo]) > 0.5
    return inside


def winding_number(mesh, points):
    """Generalized winding number via per-triangle solid angles."""
    points = np.atleast_2d(np.asarray(points, float))
    a, b, c = mesh.corners
    out = np.empty(len(points))
    step = max(1, _CHUNK // max(len(a), 1))
    for s in range(0, len(points), step):
        p = points[s:s + step, None, :]
        A, B, C = a[None] - p, b[None] - p, c[None] - p
        la, lb, lc = (np.linalg.norm(X, axis=2) for X in (A, B, C))
        num = np.einsum("ijk,ijk->ij", A, np.cross(B, C))
        den = (la * lb * lc + np.einsum("ijk,ijk->ij", A, B) * lc
               + np.einsum("ijk,ijk->ij", A, C) * lb + np.einsum("ijk,ijk->ij", B, C) * la)
        out[s:s + step] = 2 * np.arctan2(num, den).sum(axis=1) / (4 * np.pi)
    return out


def contains_points(mesh, points, method="parity"):
    """Vectorised membership in the enclosed volume (surface counts as inside)."""
    mesh.require_watertight()
    points = np.atleast_2d(np.asarray(points, float))
    if method == "winding":
        return winding_number(mesh, points) > 0.5
    if method != "parity":
        raise ValueError(f"unknown inside-test method {method!r}")
    out = np.empty(len(points), bool)
    for s in range(0, len(points), 1 << 16):
        out[s:s + (1 << 16)] = _inside_parity(mesh, points[s:s + (1 << 16)])
    return out


def contains_point(mesh, point, method="parity") -> bool:
    return bool(contains_points(mesh, np.asarray(point, float)[None], method)[0])


# ------------------------------------------------------------- distances


def _closest_on_triangles(p, a, b, c):
    """Closest points on triangles (a, b, c) to p, row-wise (Ericson, RTCD 5.1.5)."""
    ab, ac, ap = b - a, c - a, p - a
    d1 = np.einsum("ij,ij->i", ab, ap)
    d2 = np.einsum("ij,ij->i", ac, ap)
    bp = p - b
    d3 = np.einsum("ij,ij->i", ab, bp)
    d4 = np.einsum("ij,ij->i", ac, bp)
    cp = p - c
    d5 = np.einsum("ij,ij->i", ab, cp)
    d6 = np.einsum("ij,ij->i", ac, cp)
    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2

    with np.errstate(divide="ignore", invalid="ignore"):
        denom = va + vb + vc
        v = vb / denom
        w = vc / denom
        out = a + ab * v[:, None] + ac * w[:, None]

        # edge regions, checked so later assignments take precedence as in the scalar code
        cond_bc = (va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0)
        wbc = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        out = np.where(cond_bc[:, None], b + (c - b) * wbc[:, None], out)
        cond_ac = (vb <= 0) & (d2 >= 0) & (d6 <= 0)
        wac = d2 / (d2 - d6)
        out = np.where(cond_ac[:, None], a + ac * wac[:, None], out)
        cond_ab = (vc <= 0) & (d1 >= 0) & (d3 <= 0)
        vab = d1 / (d1 - d3)
        out = np.where(cond_ab[:, None], a + ab * vab[:, None], out)
    out = np.where(((d6 >= 0) & (d5 <= d6))[:, None], c, out)
    out = np.where(((d3 >= 0) & (d4 <= d3))[:, None], b, out)
    out = np.where(((d1 <= 0) & (d2 <= 0))[:, None], a, out)
    return out


def _centroid_tree(mesh):
    c = _cache(mesh)
    if "ctree" not in c:
        a, b, cc = mesh.corners
        cent = (a + b + cc) / 3
        radius = np.max(np.stack([np.linalg.norm(x - cent, axis=1) for x in (a, b, cc)]), axis=0)
        c["ctree"] = (cKDTree(cent), float(radius.max()))
    return c["ctree"]


def closest_points(mesh, points):
    """Exact nearest surface point for each query.

    Returns ``(distance, triangle_index, closest_point)``.
    """
    if len(mesh) == 0:
        raise EmptyInputError("mesh has no triangles")
    points = np.atleast_2d(np.asarray(points, float))
    a, b, c = mesh.corners
    tree, rmax = _centroid_tree(mesh)
    dist = np.empty(len(points))
    tri = np.empty(len(points), dtype=np.int64)
    close = np.empty_like(points)
    _, nearest = tree.query(points)
    first = _closest_on_triangles(points, a[nearest], b[nearest], c[nearest])
    upper = np.linalg.norm(first - points, axis=1)
    # any triangle closer than `upper` has its centroid within upper + rmax
    bound = upper + rmax + 1e-12
    block = 2048
    for s in range(0, len(points), block):
        e = min(s + block, len(points))
        lists = tree.query_ball_point(points[s:e], bound[s:e])
        counts = np.array([len(x) for x in lists])
        pid = np.repeat(np.arange(s, e), counts)
        tid = np.concatenate([np.asarray(x, dtype=np.int64) for x in lists])
        q = _closest_on_triangles(points[pid], a[tid], b[tid], c[tid])
        d = np.linalg.norm(q - points[pid], axis=1)
        # pick the minimum per point; ties go to the lowest triangle index
        order = np.lexsort((tid, d, pid))
        starts = np.searchsorted(pid[order], np.arange(s, e))
        sel = order[starts]
        dist[s:e] = d[sel]
        tri[s:e] = tid[sel]
        close[s:e] = q[sel]
    return dist, tri, close


def unsigned_distance(mesh, points):
    return closest_points(mesh, points)[0]


def signed_distances(mesh, points, method="parity"):
    mesh.require_watertight()
    d = unsigned_distance(mesh, points)
    inside = contains_points(mesh, points, method)
    return np.where(d == 0, 0.0, np.where(inside, -d, d))


def signed_distance(mesh, point, method="parity") -> float:
    """Negative inside, positive outside; magnitude is the distance to the nearest triangle."""
    return float(signed_distances(mesh, np.asarray(point, float)[None], method)[0])


# ------------------------------------------------------------- segments


class _VoxelClassifier:
    """Cells untouched by any (dilated) triangle box lie wholly on one side
    of the surface and at least ``margin`` away from it."""

    OUT, IN, NEAR = 0, 1, 2

    def __init__(self, mesh, margin, resolution=48):
        lo, hi = mesh.bounds
        extent = float((hi - lo).max())
        self.h = extent / resolution
        pad = margin + 2 * self.h
        self.lo = lo - pad
        shape = np.ceil((hi + pad - self.lo) / self.h).astype(int)
        self.shape = shape
        near = np.zeros(shape, bool)
        a, b, c = mesh.corners
        tlo = np.minimum(np.minimum(a, b), c) - margin
        thi = np.maximum(np.maximum(a, b), c) + margin
        i0 = np.clip(np.floor((tlo - self.lo) / self.h).astype(int), 0, shape - 1)
        i1 = np.clip(np.floor((thi - self.lo) / self.h).astype(int), 0, shape - 1)
        for t in range(len(a)):
            near[i0[t, 0]:i1[t, 0] + 1, i0[t, 1]:i1[t, 1] + 1, i0[t, 2]:i1[t, 2] + 1] = True
        labels, nlab = ndimage.label(~near)
        status = np.full(shape, self.NEAR, dtype=np.int8)
        if nlab:
            # one representative cell per connected free region
            reps = ndimage.find_objects(labels)
            centers, ids = [], []
            for lab, sl in enumerate(reps, start=1):
                sub = labels[sl] == lab
                first = np.argwhere(sub)[0] + [s.start for s in sl]
                centers.append(self.lo + (first + 0.5) * self.h)
                ids.append(lab)
            inside = contains_points(mesh, np.array(centers))
            lut = np.zeros(nlab + 1, dtype=np.int8)
            lut[np.array(ids)] = np.where(inside, self.IN, self.OUT)
            free = labels > 0
            status[free] = lut[labels[free]]
        self.status = status

    def classify(self, points):
        idx = np.floor((points - self.lo) / self.h).astype(int)
        ok = ((idx >= 0) & (idx < self.shape)).all(1)
        out = np.full(len(points), self.OUT, dtype=np.int8)
        i = idx[ok]
        out[ok] = self.status[i[:, 0], i[:, 1], i[:, 2]]
        return out


def _voxels(mesh, margin):
    key = ("voxels", round(float(margin), 12))
    c = _cache(mesh)
    if key not in c:
        c[key] = _VoxelClassifier(mesh, margin)
    return c[key]


def points_inside_or_near(mesh, points, surface_tol):
    """True where a point is inside the volume or within ``surface_tol`` of the surface."""
    points = np.atleast_2d(np.asarray(points, float))
    vox = _voxels(mesh, surface_tol)
    status = vox.classify(points)
    ok = status == vox.IN
    near = np.flatnonzero(status == vox.NEAR)
    if len(near):
        ins = contains_points(mesh, points[near])
        ok[near[ins]] = True
        rest = near[~ins]
        if len(rest):
            ok[rest] = unsigned_distance(mesh, points[rest]) <= surface_tol
    return ok


def lambda_grid(samples):
    """``samples`` interior parameters of a uniform grid on (0, 1)."""
    return np.arange(1, samples + 1) / (samples + 1)


def _coarse_to_fine(samples):
    """Sample indices ordered so early rounds spread over the whole segment."""
    order, seen = [], set()
    level = 1
    while len(order) < samples:
        for k in range(1, 2 ** level, 2):
            i = min(samples - 1, int(k * samples / 2 ** level))
            if i not in seen:
                seen.add(i)
                order.append(i)
        level += 1
        if 2 ** level > 4 * samples:
            order.extend(i for i in range(samples) if i not in seen)
            break
    return np.array(order)


def segments_inside(mesh, q1, q2, samples=16, surface_tol=1e-3):
    """Vectorised segment test over row-paired endpoints.

    Every pair is judged on the full ``samples`` grid; samples are visited
    coarse-to-fine and a pair stops being evaluated at its first failure.
    """
    mesh.require_watertight()
    if samples < 2:
        raise ValueError("samples must be >= 2")
    q1 = np.atleast_2d(np.asarray(q1, float))
    q2 = np.atleast_2d(np.asarray(q2, float))
    lam = lambda_grid(samples)
    alive = np.ones(len(q1), bool)
    order = _coarse_to_fine(samples)
    done = 0
    width = 1
    while done < samples and alive.any():
        cols = order[done:done + width]
        idx = np.flatnonzero(alive)
        for s in range(0, len(idx), max(1, _CHUNK // len(cols))):
            sub = idx[s:s + _CHUNK // len(cols)]
            l = lam[cols]
            pts = q1[sub, None, :] * (1 - l)[None, :, None] + q2[sub, None, :] * l[None, :, None]
            ok = points_inside_or_near(mesh, pts.reshape(-1, 3), surface_tol)
            alive[sub] = ok.reshape(len(sub), len(cols)).all(axis=1)
        done += len(cols)
        width *= 2
    return alive


def segment_inside(mesh, q1, q2, samples=16, surface_tol=1e-3) -> bool:
    """Whether the segment q1-q2 stays in the volume, judged on ``samples``
    evenly spaced interior points with a ``surface_tol`` band around the surface."""
    return bool(segments_inside(mesh, np.asarray(q1, float)[None], np.asarray(q2, float)[None],
                                samples, surface_tol)[0])


# ------------------------------------------------------------- sampling


def surface_sample(mesh, n, seed=0):
    """Area-weighted uniform samples on the surface; deterministic for a seed."""
    if len(mesh) == 0:
        raise EmptyInputError("cannot sample an empty mesh")
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    areas = mesh.areas
    tri = rng.choice(len(areas), size=n, p=areas / areas.sum())
    r1 = np.sqrt(rng.random(n))
    r2 = rng.random(n)
    a, b, c = mesh.corners
    return (a[tri] * (1 - r1)[:, None] + b[tri] * (r1 * (1 - r2))[:, None]
            + c[tri] * (r1 * r2)[:, None])
