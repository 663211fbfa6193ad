"""YAML job configs for the training CLI.

Two modes share one file shape::

    mode: pretrain | style
    seed: 0
    out_dir: runs/example
    data:
      scenes_dir: data/scenes
      styles_dir: data/styles        # style mode only
    backbone:                        # pretrain mode (or style-mode fallback)
      num_layers: 6
      token_dim: 128
      patch_size: 16
      image_size: 64
      retained_layers: [2, 4]
    pretrain:
      steps: 500
      lr: 1.0e-3
    model:                           # style mode
      backbone_checkpoint: runs/pretrain/backbone
      variant: full                  # or head_only
      style_dim: 64
      head_sites: null               # null = every retained layer
      agg_sites: null                # null = pre-layer-0 + retained layers
    style:                           # TrainConfig fields
      steps: 300
      lr: 1.0e-2
      n_patch: 4
      crop_size: 16
      weights: {style: 1.0, content: 0.05, clip_global: 0.02,
                clip_patch: 0.04, depth: 0.1}
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import yaml

from ..backbone.config import BackboneConfig
from ..losses import LossWeights
from .trainer import PretrainConfig, TrainConfig


@dataclass
class TrainJob:
    mode: str
    seed: int
    out_dir: Path
    scenes_dir: Path
    styles_dir: Path | None
    backbone: BackboneConfig | None
    backbone_checkpoint: Path | None
    variant: str
    style_dim: int
    head_sites: tuple[int, ...] | None
    agg_sites: tuple[int, ...] | None
    pretrain: PretrainConfig
    style: TrainConfig


def _backbone_from(raw: dict | None, seed: int) -> BackboneConfig | None:
    if raw is None:
        return None
    raw = dict(raw)
    if "retained_layers" in raw:
        raw["retained_layers"] = tuple(raw["retained_layers"])
    raw.setdefault("seed", seed)
    return BackboneConfig(**raw)


def load_train_job(path: str | Path) -> TrainJob:
    path = Path(path)
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    mode = raw.get("mode")
    if mode not in ("pretrain", "style"):
        raise ValueError(f"config mode must be 'pretrain' or 'style', got {mode!r}")
    seed = int(raw.get("seed", 0))
    data = raw.get("data", {})
    if "scenes_dir" not in data:
        raise ValueError("config needs data.scenes_dir")
    if mode == "style" and "styles_dir" not in data:
        raise ValueError("style mode needs data.styles_dir")

    pre_raw = dict(raw.get("pretrain", {}))
    pre_raw.setdefault("seed", seed)
    pretrain = PretrainConfig(**pre_raw)

    style_raw = dict(raw.get("style", {}))
    if "weights" in style_raw:
        style_raw["weights"] = LossWeights(**style_raw["weights"])
    style_raw.setdefault("seed", seed)
    style = TrainConfig(**style_raw)

    model_raw = raw.get("model", {})
    sites = {k: tuple(model_raw[k]) if model_raw.get(k) is not None else None
             for k in ("head_sites", "agg_sites")}

    base = path.parent
    def resolve(p):
        p = Path(p)
        return p if p.is_absolute() else base / p

    return TrainJob(
        mode=mode,
        seed=seed,
        out_dir=resolve(raw.get("out_dir", "runs/job")),
        scenes_dir=resolve(data["scenes_dir"]),
        styles_dir=resolve(data["styles_dir"]) if "styles_dir" in data else None,
        backbone=_backbone_from(raw.get("backbone"), seed),
        backbone_checkpoint=resolve(model_raw["backbone_checkpoint"])
        if model_raw.get("backbone_checkpoint") else None,
        variant=model_raw.get("variant", "full"),
        style_dim=int(model_raw.get("style_dim", 64)),
        head_sites=sites["head_sites"],
        agg_sites=sites["agg_sites"],
        pretrain=pretrain,
        style=style,
    )
