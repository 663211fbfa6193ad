from .data import (
    SceneDataset,
    SceneSample,
    StyleItem,
    StyleLibrary,
    load_scene_dir,
    make_dataset,
    make_style_library,
    make_synthetic_scene,
)
from .trainer import (
    TOY_WEIGHTS,
    PretrainConfig,
    TrainConfig,
    TrainResult,
    TrainingDiverged,
    pretrain_geometry,
    train_style,
)

__all__ = [
    "TOY_WEIGHTS",
    "PretrainConfig",
    "SceneDataset",
    "SceneSample",
    "StyleItem",
    "StyleLibrary",
    "TrainConfig",
    "TrainResult",
    "TrainingDiverged",
    "load_scene_dir",
    "make_dataset",
    "make_style_library",
    "make_synthetic_scene",
    "pretrain_geometry",
    "train_style",
]
