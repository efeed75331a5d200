"""Scene bundles: the on-disk inputs of one object.

Layout::

    bundle.json               manifest (below)
    mesh.obj                  watertight object mesh
    proposals.json            proposal document
    views/view_<i>.json       camera sidecar (intrinsics + world-to-camera pose)
    views/view_<i>.pfm        rendered depth, metres, 0 = background
    masks/mask_<i>_<k>.pgm    binary mask of intent k in view i (255 = member)

Manifest::

    {"object_id": "...", "mesh": "mesh.obj", "proposals": "proposals.json",
     "views": [{"view_id": 1, "camera": "views/view_1.json", "depth": "views/view_1.pfm"}],
     "masks": "masks/mask_{view}_{intent}.pgm"}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .geometry.camera import CameraIntrinsics, CameraPose, CameraView
from .geometry import mesh as shapes
from .geometry.render import render_depth
from .ingest import load_proposals

MANIFEST = "bundle.json"
MASK_PATTERN = "masks/mask_{view}_{intent}.pgm"

# cyclic azimuth order, so view ids i and i+1 are 90 degrees apart
VIEW_NAMES = ("front", "right", "back", "left")


@dataclass(eq=False)
class SceneBundle:
    mesh: shapes.TriangleMesh
    views: list
    proposals: list
    masks: dict = field(default_factory=dict)  # (view_id, intent_id) -> bool image
    object_id: str = ""
    root: Path | None = None

    def without_view(self, view_id):
        return SceneBundle(self.mesh, [v for v in self.views if v.view_id != view_id], self.proposals,
                           {k: m for k, m in self.masks.items() if k[0] != view_id}, self.object_id, self.root)


def _read_manifest(root):
    return json.loads((Path(root) / MANIFEST).read_text())


def load_bundle(path) -> SceneBundle:
    root = Path(path)
    man = _read_manifest(root)
    mesh = io.read_obj(root / man["mesh"])
    views = []
    for entry in sorted(man["views"], key=lambda e: e["view_id"]):
        cam = json.loads((root / entry["camera"]).read_text())
        depth = io.read_pfm(root / entry["depth"])
        views.append(io.camera_from_dict(cam, depth))
    proposals = load_proposals(root / man["proposals"])
    pattern = man.get("masks", MASK_PATTERN)
    masks = {}
    for p in proposals:
        for v in views:
            f = root / pattern.format(view=v.view_id, intent=p.intent_id)
            if f.exists():
                masks[v.view_id, p.intent_id] = io.read_pgm(f)
    return SceneBundle(mesh, views, proposals, masks, man.get("object_id", ""), root)


def validate_bundle(path) -> list[str]:
    """Every missing or inconsistent artifact, one finding per line; empty when clean."""
    root = Path(path)
    findings = []
    if not (root / MANIFEST).exists():
        return [f"missing manifest {MANIFEST}"]
    try:
        man = _read_manifest(root)
    except json.JSONDecodeError as exc:
        return [f"manifest is not valid JSON: {exc}"]
    for key in ("mesh", "proposals", "views"):
        if key not in man:
            findings.append(f"manifest lacks {key!r}")
    if findings:
        return findings

    mesh_path = root / man["mesh"]
    if not mesh_path.exists():
        findings.append(f"missing mesh {man['mesh']}")
    else:
        try:
            if not io.read_obj(mesh_path).watertight:
                findings.append(f"mesh {man['mesh']} is not watertight")
        except (ValueError, IndexError) as exc:
            findings.append(f"mesh {man['mesh']} unreadable: {exc}")

    shapes_by_view = {}
    ids = [e.get("view_id") for e in man["views"]]
    if len(set(ids)) != len(ids):
        findings.append(f"duplicate view ids {ids}")
    for entry in man["views"]:
        vid = entry.get("view_id")
        cam_path, depth_path = root / entry.get("camera", ""), root / entry.get("depth", "")
        cam = None
        if not cam_path.is_file():
            findings.append(f"view {vid}: missing camera {entry.get('camera')}")
        else:
            try:
                cam = io.camera_from_dict(json.loads(cam_path.read_text()))
                if cam.view_id != vid:
                    findings.append(f"view {vid}: camera document says view_id {cam.view_id}")
            except (ValueError, KeyError, TypeError) as exc:
                findings.append(f"view {vid}: invalid camera document: {exc}")
        if not depth_path.is_file():
            findings.append(f"view {vid}: missing depth {entry.get('depth')}")
        else:
            try:
                depth = io.read_pfm(depth_path)
                if cam is not None and depth.shape != cam.shape:
                    findings.append(f"view {vid}: depth shape {depth.shape} does not match camera {cam.shape}")
                shapes_by_view[vid] = cam.shape if cam is not None else depth.shape
            except ValueError as exc:
                findings.append(f"view {vid}: unreadable depth: {exc}")

    prop_path = root / man["proposals"]
    if not prop_path.exists():
        findings.append(f"missing proposals {man['proposals']}")
        return findings
    try:
        proposals = load_proposals(prop_path)
    except Exception as exc:
        findings.append(f"proposals: {exc}")
        return findings
    pattern = man.get("masks", MASK_PATTERN)
    for p in proposals:
        for vp in p.views:
            if vp.view_id not in ids:
                findings.append(f"intent {p.intent_id}: unknown view {vp.view_id}")
                continue
            if not vp.visible:
                continue
            rel = pattern.format(view=vp.view_id, intent=p.intent_id)
            f = root / rel
            if not f.exists():
                findings.append(f"intent {p.intent_id}: missing mask {rel}")
                continue
            try:
                m = io.read_pgm(f)
            except ValueError as exc:
                findings.append(f"intent {p.intent_id}: unreadable mask {rel}: {exc}")
                continue
            want = shapes_by_view.get(vp.view_id)
            if want is not None and m.shape != want:
                findings.append(f"intent {p.intent_id}: mask {rel} shape {m.shape} does not match view {want}")
    return findings


# ------------------------------------------------------------------ synthesis

SHAPES = ("sphere", "cube", "dumbbell", "torus")


def make_shape(name):
    if name == "sphere":
        return shapes.sphere(0.05)
    if name == "cube":
        return shapes.box(0.08, level=4)
    if name == "torus":
        return shapes.torus(0.045, 0.015, 48, 24)
    if name == "dumbbell":
        return shapes.dumbbell()
    raise ValueError(f"unknown shape {name!r}; choose from {SHAPES}")


def ring_views(resolution=64, distance=0.3, fov_deg=40.0, elevation_deg=0.0):
    """Four cameras at 90 degree azimuth spacing looking at the origin."""
    intr = CameraIntrinsics.from_fov(resolution, resolution, fov_deg)
    el = np.radians(elevation_deg)
    views = []
    for k, name in enumerate(VIEW_NAMES):
        az = -np.pi / 2 + k * np.pi / 2  # front camera sits on -y
        eye = distance * np.array([np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)])
        views.append(CameraView(intr, CameraPose.look_at(eye, np.zeros(3)), None, k + 1, name))
    return views


def silhouette_bbox(mask):
    rows, cols = np.nonzero(mask)
    return [int(cols.min()), int(rows.min()), int(cols.max()) + 1, int(rows.max()) + 1]


def synthesize(shape, resolution=64, seed=0, n_intents=1, confidences=None):
    """In-memory synthetic bundle: rendered depths, silhouette masks and a
    proposal document with per-view confidences.

    ``confidences`` is a list of per-view values (one list per intent);
    missing values are drawn from U(0.6, 0.95) with ``seed``.
    """
    mesh = make_shape(shape)
    views = [v.with_depth(render_depth(mesh, v)) for v in ring_views(resolution)]
    rng = np.random.default_rng(seed)
    intents, masks = [], {}
    for k in range(n_intents):
        conf = confidences[k] if confidences is not None else np.round(rng.uniform(0.6, 0.95, len(views)), 3)
        entries = []
        for v, c in zip(views, conf):
            sil = np.isfinite(v.depth)
            visible = bool(sil.any())
            entries.append({"view_id": v.view_id, "visible": visible,
                            "bbox": silhouette_bbox(sil) if visible else None, "confidence": float(c)})
            masks[v.view_id, k] = sil
        intents.append({"intent_id": k, "part_name": "body" if n_intents == 1 else f"part_{k}",
                        "description": f"synthetic {shape} region {k}", "views": entries})
    doc = {"object_id": shape, "intents": intents}
    return SceneBundle(mesh, views, load_proposals(doc), masks, shape), doc


def write_bundle(bundle: SceneBundle, doc: dict, out_dir):
    out = Path(out_dir)
    (out / "views").mkdir(parents=True, exist_ok=True)
    (out / "masks").mkdir(parents=True, exist_ok=True)
    io.write_obj(out / "mesh.obj", bundle.mesh)
    io.dump_json(out / "proposals.json", doc)
    entries = []
    for v in bundle.views:
        cam, dep = f"views/view_{v.view_id}.json", f"views/view_{v.view_id}.pfm"
        io.dump_json(out / cam, io.camera_to_dict(v))
        io.write_pfm(out / dep, v.depth)
        entries.append({"view_id": v.view_id, "camera": cam, "depth": dep})
    for (vid, k), m in sorted(bundle.masks.items()):
        io.write_pgm(out / MASK_PATTERN.format(view=vid, intent=k), m)
    io.dump_json(out / MANIFEST, {"object_id": bundle.object_id, "mesh": "mesh.obj",
                                  "proposals": "proposals.json", "views": entries, "masks": MASK_PATTERN})
    return out
