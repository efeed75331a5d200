"""File formats: OBJ meshes, PFM depth maps, PGM masks, camera sidecars, PLY clouds."""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .geometry.camera import CameraIntrinsics, CameraPose, CameraView
from .geometry.mesh import TriangleMesh


def read_obj(path) -> TriangleMesh:
    """Read the ``v``/``f`` subset of Wavefront OBJ; polygons are fan-triangulated."""
    verts, faces = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                idx = []
                for tok in parts[1:]:
                    i = int(tok.split("/")[0])
                    idx.append(i - 1 if i > 0 else len(verts) + i)
                if len(idx) < 3:
                    raise ValueError(f"{path}:{lineno}: face with fewer than 3 vertices")
                for j in range(1, len(idx) - 1):
                    faces.append([idx[0], idx[j], idx[j + 1]])
    return TriangleMesh(np.array(verts, float).reshape(-1, 3), np.array(faces, np.int64).reshape(-1, 3))


def write_obj(path, mesh: TriangleMesh):
    with open(path, "w") as fh:
        for v in mesh.vertices:
            fh.write("v %r %r %r\n" % tuple(float(x) for x in v))
        for f in mesh.triangles + 1:
            fh.write(f"f {f[0]} {f[1]} {f[2]}\n")


def write_pfm(path, depth):
    """Little-endian grayscale PFM. Background (NaN) is stored as 0."""
    d = np.nan_to_num(np.asarray(depth, dtype=np.float32), nan=0.0, posinf=0.0, neginf=0.0)
    h, w = d.shape
    with open(path, "wb") as fh:
        fh.write(b"Pf\n%d %d\n-1.0\n" % (w, h))
        # PFM rows run bottom to top
        fh.write(np.ascontiguousarray(d[::-1]).astype("<f4").tobytes())


def read_pfm(path) -> np.ndarray:
    """Read a grayscale PFM; zero or non-finite values come back as NaN."""
    with open(path, "rb") as fh:
        header = fh.readline().strip()
        if header != b"Pf":
            raise ValueError(f"{path}: expected grayscale PFM, got header {header!r}")
        w, h = (int(x) for x in fh.readline().split())
        scale = float(fh.readline())
        dtype = "<f4" if scale < 0 else ">f4"
        data = np.frombuffer(fh.read(w * h * 4), dtype=dtype)
    if data.size != w * h:
        raise ValueError(f"{path}: truncated PFM data")
    d = data.reshape(h, w)[::-1].astype(float)
    d[~(np.isfinite(d) & (d > 0))] = np.nan
    return d


def write_pgm(path, mask):
    m = np.where(np.asarray(mask, bool), 255, 0).astype(np.uint8)
    h, w = m.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(m.tobytes())


def read_pgm(path) -> np.ndarray:
    """Binary (P5) or ASCII (P2) PGM; nonzero pixels are mask members."""
    raw = Path(path).read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            pos = raw.index(b"\n", pos) + 1
            continue
        end = pos
        while end < len(raw) and not raw[end:end + 1].isspace():
            end += 1
        tokens.append(raw[pos:end])
        pos = end
    magic, w, h, maxval = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
    pos += 1
    if magic == b"P5":
        dtype = np.uint8 if maxval < 256 else ">u2"
        data = np.frombuffer(raw[pos:], dtype=dtype, count=w * h)
    elif magic == b"P2":
        data = np.array(raw[pos:].split()[: w * h], dtype=int)
    else:
        raise ValueError(f"{path}: unsupported PGM magic {magic!r}")
    if data.size != w * h:
        raise ValueError(f"{path}: truncated PGM data")
    return data.reshape(h, w) > 0


def camera_to_dict(view: CameraView) -> dict:
    i = view.intrinsics
    return {
        "view_id": view.view_id,
        "name": view.name,
        "intrinsics": {"focal_x": i.focal_x, "focal_y": i.focal_y, "center_x": i.center_x,
                       "center_y": i.center_y, "width": i.width, "height": i.height},
        "pose": {"rotation": view.pose.rotation.tolist(), "translation": view.pose.translation.tolist()},
    }


def camera_from_dict(doc: dict, depth=None) -> CameraView:
    i = doc["intrinsics"]
    intr = CameraIntrinsics(float(i["focal_x"]), float(i["focal_y"]), float(i["center_x"]),
                            float(i["center_y"]), int(i["width"]), int(i["height"]))
    pose = CameraPose(np.array(doc["pose"]["rotation"], float), np.array(doc["pose"]["translation"], float))
    return CameraView(intr, pose, depth, int(doc["view_id"]), doc.get("name", ""))


def write_ply(path, points, scores):
    """ASCII PLY point cloud with a per-vertex ``confidence`` property."""
    points = np.asarray(points, float).reshape(-1, 3)
    with open(path, "w") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write(f"element vertex {len(points)}\n")
        fh.write("property double x\nproperty double y\nproperty double z\nproperty double confidence\n")
        fh.write("end_header\n")
        for p, s in zip(points, scores):
            fh.write("%r %r %r %r\n" % (float(p[0]), float(p[1]), float(p[2]), float(s)))


def dump_json(path, doc):
    """Deterministic JSON: sorted keys, shortest round-trip float repr."""
    text = json.dumps(doc, indent=1, sort_keys=True, allow_nan=False) + "\n"
    Path(path).write_text(text)


def atomic_write_dir(files: dict, out_dir):
    """Write ``{name: writer(path)}`` into a staging directory, then move every
    file into ``out_dir``. Nothing lands in ``out_dir`` if any writer fails."""
    import shutil
    import tempfile

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=".staging-", dir=out_dir))
    try:
        for name, writer in files.items():
            writer(stage / name)
        for name in files:
            os.replace(stage / name, out_dir / name)
    finally:
        shutil.rmtree(stage, ignore_errors=True)
