"""Synthetic single-view depth sensing."""

from .camera import CameraIntrinsics, CameraPose, sample_camera, scene_camera
from .cloud import (
    AFFORDANCE_POINTS,
    TWIN_POINTS,
    NoiseConfig,
    PointCloud,
    Provenance,
    crop_bbox,
    denormalize,
    downsample,
    estimate_normals,
    normalize_center,
)
from .ply import read_ply, write_ply
from .render import (
    HitId,
    RenderedFrame,
    dump_hit_ids,
    render_frame,
    render_point_cloud,
    scene_crop_box,
)

__all__ = [
    "AFFORDANCE_POINTS",
    "TWIN_POINTS",
    "CameraIntrinsics",
    "CameraPose",
    "HitId",
    "NoiseConfig",
    "PointCloud",
    "Provenance",
    "RenderedFrame",
    "crop_bbox",
    "denormalize",
    "downsample",
    "dump_hit_ids",
    "estimate_normals",
    "normalize_center",
    "read_ply",
    "render_frame",
    "render_point_cloud",
    "sample_camera",
    "scene_camera",
    "scene_crop_box",
    "write_ply",
]
