"""Feed-forward 3D Gaussian splat reconstruction with multimodal stylization."""

from .backbone import Backbone, BackboneConfig, voxel_merge
from .core import CameraModel, GaussianPrimitive, GaussianScene
from .model import DualBranchModel, load_model, render_views, save_model
from .renderer import RenderOutput, render

__all__ = [
    "Backbone",
    "BackboneConfig",
    "CameraModel",
    "DualBranchModel",
    "GaussianPrimitive",
    "GaussianScene",
    "RenderOutput",
    "load_model",
    "render",
    "render_views",
    "save_model",
    "voxel_merge",
]

__version__ = "0.1.0"
