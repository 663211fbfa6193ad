from .config import BackboneConfig
from .network import (
    Aggregator,
    AggregatorOutput,
    Backbone,
    CameraHead,
    DepthHead,
    GaussianHead,
    PatchFeatures,
    seeded_init_,
)
from .voxel import voxel_merge

__all__ = [
    "Aggregator",
    "AggregatorOutput",
    "Backbone",
    "BackboneConfig",
    "CameraHead",
    "DepthHead",
    "GaussianHead",
    "PatchFeatures",
    "seeded_init_",
    "voxel_merge",
]
