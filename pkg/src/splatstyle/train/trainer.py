"""Training loops: geometry pretraining and stylization fine-tuning.

Geometry pretraining fits the toy backbone to synthetic scenes with a
photometric loss plus masked depth supervision; the result stands in for a
pretrained reconstruction checkpoint. Stylization fine-tuning then updates
only the copied head, the injectors and (full variant) the copied
aggregator, alternating text- and image-conditioned batches; the frozen
branch is hashed before and after to prove it never moved.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

import torch

from ..backbone.network import Backbone
from ..losses import (
    LossWeights,
    clip_directional_loss,
    clip_patch_loss,
    content_loss,
    depth_consistency_loss,
    style_loss,
    total_loss,
)
from ..model import DualBranchModel, frozen_param_digest, render_views, save_model
from ..style.embedding import StyleSignal, embed, neutral_embedding
from .data import SceneDataset, StyleLibrary


class TrainingDiverged(RuntimeError):
    def __init__(self, step: int, message: str):
        super().__init__(f"training diverged at step {step}: {message}")
        self.step = step


# Desk-scale loss balance. The canonical weights on LossWeights (1.0 style,
# 0.05 content, 2.0/4.0 directional, 0.1 depth) assume full-size perceptual
# networks whose style term is orders of magnitude larger than this package's
# toy extractor produces; at toy scale those numbers let the directional
# terms drag renders past the target statistics. This calibration keeps the
# published 1:2 ratio between global and patch directional terms while
# restoring the style term's dominance.
TOY_WEIGHTS = LossWeights(style=1.0, content=0.05, clip_global=0.02,
                          clip_patch=0.04, depth=0.1)


@dataclass
class PretrainConfig:
    steps: int = 500
    lr: float = 1e-3
    depth_weight: float = 0.1
    grad_clip: float = 1.0
    seed: int = 0
    log_every: int = 50


def pretrain_geometry(backbone: Backbone, dataset: SceneDataset,
                      cfg: PretrainConfig | None = None,
                      out_dir: str | Path | None = None) -> list[dict]:
    """Photometric + depth overfit of the toy backbone; returns the metric log."""
    cfg = cfg or PretrainConfig()
    params = backbone.trainable_parameters()
    optimizer = torch.optim.Adam(params, lr=cfg.lr)
    gen = torch.Generator().manual_seed(cfg.seed)
    metrics: list[dict] = []

    for step in range(cfg.steps):
        sample = dataset[int(torch.randint(len(dataset), (1,), generator=gen))]
        feats = backbone.extract_features(sample.images)
        agg = backbone.aggregate(feats)
        cams = backbone.cameras_for(agg, sample.cams)
        points, conf = backbone.depth_head(agg, cams)
        scene = backbone.gaussian_head(agg, points, conf)

        photometric = scene.means.new_zeros(())
        depth_term = scene.means.new_zeros(())
        for i, cam in enumerate(cams):
            out = render_views(scene, [cam])[0]
            photometric = photometric + ((out.color - sample.images[i]) ** 2).mean()
            if sample.gt_depth is not None:
                mask = sample.gt_alpha[i] > 0.5
                depth_term = depth_term + depth_consistency_loss(
                    out.depth, sample.gt_depth[i], mask)
        photometric = photometric / len(cams)
        depth_term = depth_term / len(cams)
        loss = photometric + cfg.depth_weight * depth_term

        if not torch.isfinite(loss):
            raise TrainingDiverged(step, f"loss={float(loss)}, lr={cfg.lr}")
        optimizer.zero_grad()
        loss.backward()
        torch.nn.utils.clip_grad_norm_(params, cfg.grad_clip)
        optimizer.step()
        metrics.append({"step": step, "photometric": float(photometric.detach()),
                        "depth": float(depth_term.detach()), "total": float(loss.detach())})

    if out_dir is not None:
        from ..core.checkpoint import save_fields
        save_fields(out_dir, dict(backbone.state_dict()),
                    meta={"kind": "backbone", "steps": cfg.steps})
    return metrics


@dataclass
class TrainConfig:
    """Stylization fine-tuning settings.

    Full-scale runs use 90k steps over a large scene corpus; desk-scale
    defaults keep the same structure at a few hundred steps. The base
    learning rate covers the copied head and the injectors; the copied
    aggregator trains at ``aggregator_lr_mult`` times that, both under
    cosine annealing.
    """

    steps: int = 300
    lr: float = 1e-4
    aggregator_lr_mult: float = 0.3
    grad_clip: float = 1.0
    seed: int = 0
    # every other batch flips modality; period n flips every n batches
    modality_period: int = 1
    weights: LossWeights = field(default_factory=lambda: TOY_WEIGHTS)
    n_patch: int = 16
    crop_size: int = 64
    views_per_step: int = 2
    render_voxel_size: float | None = None
    freeze_check_every: int = 50
    # ablation arms
    no_clip_losses: bool = False
    no_style_loss: bool = False
    all_geom_features: bool = False
    no_text: bool = False
    text_drops_style_loss: bool = False

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.modality_period < 1:
            raise ValueError("modality_period must be >= 1")


@dataclass
class TrainResult:
    metrics: list[dict]
    frozen_digest: str
    halted_at: int | None
    geometry_checks: list[dict]
    checkpoint_dir: Path | None


def _batch_modality(step: int, cfg: TrainConfig) -> str:
    if cfg.no_text:
        return "image"
    return "image" if (step // cfg.modality_period) % 2 == 0 else "text"


def train_style(model: DualBranchModel, scenes: SceneDataset, styles: StyleLibrary,
                provider, cfg: TrainConfig | None = None,
                out_dir: str | Path | None = None) -> TrainResult:
    cfg = cfg or TrainConfig()
    digest_before = frozen_param_digest(model)
    gen = torch.Generator().manual_seed(cfg.seed)
    z_neutral = neutral_embedding(provider)
    optimizer = torch.optim.Adam(
        model.trainable_parameter_groups(cfg.lr, cfg.aggregator_lr_mult))
    scheduler = torch.optim.lr_scheduler.CosineAnnealingLR(optimizer, T_max=max(cfg.steps, 1))
    trainable = [p for g in optimizer.param_groups for p in g["params"]]

    metrics: list[dict] = []
    geometry_checks: list[dict] = []
    halted_at: int | None = None
    last_good = None
    check_steps = {0, cfg.steps // 2, cfg.steps - 1} if cfg.steps > 0 else set()

    out_dir = Path(out_dir) if out_dir is not None else None
    metrics_fh = None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        metrics_fh = open(out_dir / "metrics.jsonl", "w")

    try:
        for step in range(cfg.steps):
            scene_idx = int(torch.randint(len(scenes), (1,), generator=gen))
            style_idx = int(torch.randint(len(styles), (1,), generator=gen))
            sample = scenes[scene_idx]
            style = styles[style_idx]
            modality = _batch_modality(step, cfg)
            if modality == "text":
                z = embed(StyleSignal(text=style.caption), provider)
            else:
                z = embed(StyleSignal(image=style.image), provider)

            cache = model.reconstruct(sample.images, sample.cams)
            if "frozen_renders" not in cache.extras:
                with torch.no_grad():
                    cache.extras["frozen_renders"] = render_views(
                        cache.frozen_scene, cache.cams,
                        voxel_size=cfg.render_voxel_size)
            frozen_renders = cache.extras["frozen_renders"]

            styled = model.stylize(cache, z, all_geom_features=cfg.all_geom_features)
            if step in check_steps:
                geometry_checks.append(_geometry_check(step, styled, cache.frozen_scene,
                                                       cfg.all_geom_features))

            n_views = min(cfg.views_per_step, len(cache.cams))
            view_ids = torch.randperm(len(cache.cams), generator=gen)[:n_views].tolist()
            zero = styled.sh_coeffs.new_zeros(())
            c_term, s_term, g_term, p_term, d_term = zero, zero, zero, zero, zero
            drop_style = cfg.no_style_loss or (
                cfg.text_drops_style_loss and modality == "text")
            for vid in view_ids:
                out = render_views(styled, [cache.cams[vid]],
                                   voxel_size=cfg.render_voxel_size)[0]
                ref = frozen_renders[vid]
                c_term = c_term + content_loss(out.color, ref.color, _extractor(model))
                if not drop_style:
                    # text batches still match statistics of the paired image
                    s_term = s_term + style_loss(out.color, style.image, _extractor(model))
                if not cfg.no_clip_losses:
                    g_term = g_term + clip_directional_loss(
                        ref.color, out.color, z, z_neutral, provider)
                    p_term = p_term + clip_patch_loss(
                        ref.color, out.color, z, z_neutral, provider,
                        n_patch=cfg.n_patch,
                        crop_size=min(cfg.crop_size, out.color.shape[0], out.color.shape[1]),
                        generator=gen)
                if cfg.weights.depth > 0:
                    d_term = d_term + depth_consistency_loss(
                        out.depth, ref.depth, ref.alpha > 0.5)
            bundle = total_loss(c_term / n_views, s_term / n_views, g_term / n_views,
                                p_term / n_views, d_term / n_views, weights=cfg.weights)

            if not torch.isfinite(bundle.total):
                halted_at = step
                if last_good is not None:
                    _restore_trainable(model, last_good)
                break

            optimizer.zero_grad()
            bundle.total.backward()
            torch.nn.utils.clip_grad_norm_(trainable, cfg.grad_clip)
            optimizer.step()
            scheduler.step()

            record = {"step": step, **bundle.scalars(), "modality": modality,
                      "lr": optimizer.param_groups[0]["lr"]}
            metrics.append(record)
            if metrics_fh is not None:
                metrics_fh.write(json.dumps(record, sort_keys=True) + "\n")

            if step % cfg.freeze_check_every == 0:
                if frozen_param_digest(model) != digest_before:
                    raise AssertionError("frozen branch changed during training")
                last_good = _snapshot_trainable(model)
    finally:
        if metrics_fh is not None:
            metrics_fh.close()

    if frozen_param_digest(model) != digest_before:
        raise AssertionError("frozen branch changed during training")

    ckpt_dir = None
    if out_dir is not None:
        ckpt_dir = out_dir / "checkpoint"
        save_model(ckpt_dir, model)
    return TrainResult(metrics=metrics, frozen_digest=digest_before,
                       halted_at=halted_at, geometry_checks=geometry_checks,
                       checkpoint_dir=ckpt_dir)


def _geometry_check(step, styled, frozen_scene, all_geom_features: bool) -> dict:
    mu_equal = torch.equal(styled.means, frozen_scene.means)
    s_equal = torch.equal(styled.scales.detach(), frozen_scene.scales)
    o_equal = torch.equal(styled.opacities.detach(), frozen_scene.opacities)
    check = {"step": step, "mu_equal": mu_equal, "scale_equal": s_equal,
             "opacity_equal": o_equal}
    if not all_geom_features and not (mu_equal and s_equal and o_equal):
        raise AssertionError(f"geometry drifted from the frozen branch at step {step}: {check}")
    return check


_EXTRACTOR_CACHE: dict[int, object] = {}


def _extractor(model: DualBranchModel):
    from ..losses import FeatureExtractor

    size = model.cfg.image_size
    if size not in _EXTRACTOR_CACHE:
        _EXTRACTOR_CACHE[size] = FeatureExtractor(seed=0, input_size=size)
    return _EXTRACTOR_CACHE[size]


def _snapshot_trainable(model: DualBranchModel) -> dict:
    snap = {"head": copy.deepcopy(model.styled_head.state_dict()),
            "plan": copy.deepcopy(model.plan.state_dict())}
    if model.variant == "full":
        snap["aggregator"] = copy.deepcopy(model.styled_aggregator.state_dict())
    return snap


def _restore_trainable(model: DualBranchModel, snap: dict) -> None:
    model.styled_head.load_state_dict(snap["head"])
    model.plan.load_state_dict(snap["plan"])
    if model.variant == "full" and "aggregator" in snap:
        model.styled_aggregator.load_state_dict(snap["aggregator"])
