from .consistency import (
    ConsistencyReport,
    MetricRegistry,
    PairScore,
    consistency_metric,
    default_registry,
    masked_rmse,
)
from .timing import measure_latency_shape
from .warping import warp_by_depth

__all__ = [
    "ConsistencyReport",
    "MetricRegistry",
    "PairScore",
    "consistency_metric",
    "default_registry",
    "masked_rmse",
    "measure_latency_shape",
    "warp_by_depth",
]
