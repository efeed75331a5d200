"""Cameras, depth maps and triangle-mesh queries."""

from .camera import (
    MISS,
    CameraIntrinsics,
    CameraPose,
    CameraView,
    back_project,
    back_project_many,
    depth_consistency,
    depth_consistency_many,
    lookup_depth,
    pixel_index,
    project_many,
    reproject,
)
from .mesh import TriangleMesh, box, dumbbell, dumbbell_tips, single_triangle, sphere, torus
from .query import (
    closest_points,
    contains_point,
    contains_points,
    segment_inside,
    segments_inside,
    signed_distance,
    signed_distances,
    surface_sample,
    unsigned_distance,
    winding_number,
)
from .render import render_depth

__all__ = [
    "MISS", "CameraIntrinsics", "CameraPose", "CameraView", "TriangleMesh",
    "back_project", "back_project_many", "box", "closest_points", "contains_point",
    "contains_points", "depth_consistency", "depth_consistency_many", "dumbbell",
    "dumbbell_tips", "lookup_depth", "pixel_index", "project_many", "render_depth",
    "reproject", "segment_inside", "segments_inside", "signed_distance",
    "signed_distances", "single_triangle", "sphere", "surface_sample", "torus",
    "unsigned_distance", "winding_number",
]
