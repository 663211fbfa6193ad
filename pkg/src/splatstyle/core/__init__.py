from .cameras import CameraModel, look_at_camera, ring_cameras
from .gaussians import (
    SH_C0,
    GaussianPrimitive,
    GaussianScene,
    concat_scenes,
    covariance_of,
    quat_to_rotmat,
    scene_covariances,
    sh_coeff_count,
    validate_scene,
)
from .images import encode_png, load_png, save_png, to_uint8, validate_image

__all__ = [
    "SH_C0",
    "CameraModel",
    "GaussianPrimitive",
    "GaussianScene",
    "concat_scenes",
    "covariance_of",
    "encode_png",
    "load_png",
    "look_at_camera",
    "quat_to_rotmat",
    "ring_cameras",
    "save_png",
    "scene_covariances",
    "sh_coeff_count",
    "to_uint8",
    "validate_image",
    "validate_scene",
]
