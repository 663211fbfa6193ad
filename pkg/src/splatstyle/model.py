"""Dual-branch assembly: frozen reconstruction, style-conditioned appearance.

The frozen backbone owns geometry (centers, scales, opacities, cameras,
depth); a copied aggregator and Gaussian head, conditioned through
zero-initialized injectors, own appearance (rotations, SH colors). The
adapter fuses the two by construction, so geometry is bit-identical to the
frozen branch no matter what the style branch does. Reconstruction results
are cached per input so one scene can be restylized repeatedly without
re-running the frozen branch.
"""

from __future__ import annotations

import copy
import hashlib
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

import torch
import torch.nn as nn

from .backbone.config import BackboneConfig
from .backbone.network import Aggregator, AggregatorOutput, Backbone, GaussianHead, PatchFeatures
from .backbone.voxel import voxel_merge
from .core.cameras import CameraModel
from .core.checkpoint import load_fields, save_fields
from .core.gaussians import GaussianScene
from .renderer import RenderOutput, render
from .style.embedding import StyleEmbedding, interpolate
from .style.injector import InjectionPlan

VARIANTS = ("full", "head_only")


@dataclass
class ReconstructionCache:
    key: str
    features: PatchFeatures
    agg: AggregatorOutput
    cams: list[CameraModel]
    depth_points: torch.Tensor  # (V, H, W, 3)
    depth_conf: torch.Tensor    # (V, H, W)
    frozen_scene: GaussianScene
    extras: dict = field(default_factory=dict)  # e.g. frozen renders


def _scene_key(images: list[torch.Tensor], cams: list[CameraModel] | None) -> str:
    h = hashlib.sha256()
    for img in images:
        h.update(img.detach().cpu().numpy().astype("float32").tobytes())
    if cams is not None:
        for cam in cams:
            h.update(cam.world_to_camera.cpu().numpy().astype("float32").tobytes())
            h.update(json.dumps([cam.fx, cam.fy, cam.cx, cam.cy, cam.width, cam.height]).encode())
    return h.hexdigest()[:16]


class DualBranchModel(nn.Module):
    def __init__(self, frozen: Backbone, plan: InjectionPlan, variant: str = "full"):
        super().__init__()
        if variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
        if variant == "head_only" and plan.aggregator_sites:
            raise ValueError("head_only variant requires an empty aggregator site set")
        self.variant = variant
        self.frozen = frozen
        for p in self.frozen.parameters():
            p.requires_grad_(False)
        self.styled_head: GaussianHead = copy.deepcopy(frozen.gaussian_head)
        if variant == "full":
            self.styled_aggregator: Aggregator = copy.deepcopy(frozen.aggregator)
        else:
            # aliased, never tuned: the lightweight setting reuses frozen tokens
            self.styled_aggregator = frozen.aggregator
        for p in self.styled_head.parameters():
            p.requires_grad_(True)
        if variant == "full":
            for p in self.styled_aggregator.parameters():
                p.requires_grad_(True)
        self.plan = plan
        self.counters = {"feature_runs": 0, "aggregator_runs": 0, "head_runs": 0,
                         "cache_hits": 0}
        self._cache: dict[str, ReconstructionCache] = {}
        self._cache_lock = threading.Lock()

    @property
    def cfg(self) -> BackboneConfig:
        return self.frozen.cfg

    def reconstruct(self, images: list[torch.Tensor],
                    cams: list[CameraModel] | None = None) -> ReconstructionCache:
        """Frozen-branch forward; results are cached by input content."""
        key = _scene_key(images, cams)
        with self._cache_lock:
            hit = self._cache.get(key)
        if hit is not None:
            self.counters["cache_hits"] += 1
            return hit
        with torch.no_grad():
            feats = self.frozen.extract_features(images)
            self.counters["feature_runs"] += 1
            agg = self.frozen.aggregate(feats)
            self.counters["aggregator_runs"] += 1
            out_cams = self.frozen.cameras_for(agg, cams)
            depth_points, depth_conf = self.frozen.depth_head(agg, out_cams)
            frozen_scene = self.frozen.gaussian_head(agg, depth_points, depth_conf)
            self.counters["head_runs"] += 1
        cache = ReconstructionCache(key=key, features=feats, agg=agg, cams=out_cams,
                                    depth_points=depth_points, depth_conf=depth_conf,
                                    frozen_scene=frozen_scene)
        with self._cache_lock:
            self._cache[key] = cache
        return cache

    def stylize(self, cache: ReconstructionCache, z: StyleEmbedding,
                all_geom_features: bool = False) -> GaussianScene:
        """Style-branch forward fused through the adapter.

        The returned scene has exactly the frozen branch's means / scales /
        opacities tensors (unless ``all_geom_features`` hands scale and
        opacity to the style branch as in the ablation arm) and the style
        branch's rotations and SH coefficients.
        """
        if cache.key not in self._cache:
            raise ValueError("cache does not belong to this model (call reconstruct first)")
        if self.variant == "full":
            styled_agg = self.styled_aggregator(
                cache.features, injection_hook=self.plan.aggregator_hook(z))
            self.counters["aggregator_runs"] += 1
            tokens = styled_agg.tokens
        else:
            tokens = cache.agg.tokens
        head_tokens = self.plan.inject_head_tokens(tokens, z)
        head_input = AggregatorOutput(tokens=head_tokens,
                                      retained_layers=cache.agg.retained_layers,
                                      final_layer=cache.agg.final_layer,
                                      grid=cache.agg.grid)
        styled = self.styled_head(head_input, cache.depth_points, cache.depth_conf)
        self.counters["head_runs"] += 1

        frozen_scene = cache.frozen_scene
        return GaussianScene(
            means=frozen_scene.means,
            rotations=styled.rotations,
            scales=styled.scales if all_geom_features else frozen_scene.scales,
            opacities=styled.opacities if all_geom_features else frozen_scene.opacities,
            sh_coeffs=styled.sh_coeffs,
            source_view=frozen_scene.source_view,
            confidence=frozen_scene.confidence,
        )

    def stylize_interpolated(self, cache: ReconstructionCache, a: StyleEmbedding,
                             b: StyleEmbedding, alpha: float,
                             all_geom_features: bool = False) -> GaussianScene:
        return self.stylize(cache, interpolate(a, b, alpha),
                            all_geom_features=all_geom_features)

    def trainable_parameter_groups(self, base_lr: float,
                                   aggregator_lr_mult: float = 0.3) -> list[dict]:
        groups = [
            {"params": list(self.styled_head.parameters()), "lr": base_lr},
            {"params": list(self.plan.parameters()), "lr": base_lr},
        ]
        if self.variant == "full":
            groups.append({"params": list(self.styled_aggregator.parameters()),
                           "lr": base_lr * aggregator_lr_mult})
        return groups

    def clear_cache(self) -> None:
        with self._cache_lock:
            self._cache.clear()


def render_views(scene: GaussianScene, cams: list[CameraModel],
                 background: torch.Tensor | None = None,
                 voxel_size: float | None = None) -> list[RenderOutput]:
    """Optionally merge, then render the scene from every camera."""
    if voxel_size:
        scene = voxel_merge(scene, voxel_size)
    return [render(scene, cam, background) for cam in cams]


def frozen_param_digest(model: DualBranchModel) -> str:
    """Hash of every frozen-branch tensor; training must never change it."""
    h = hashlib.sha256()
    for name, p in sorted(model.frozen.state_dict().items()):
        h.update(name.encode())
        h.update(p.detach().cpu().numpy().tobytes())
    return h.hexdigest()


def save_model(directory: str | Path, model: DualBranchModel) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    cfg = model.cfg
    meta = {
        "variant": model.variant,
        "backbone_config": {
            "num_layers": cfg.num_layers, "token_dim": cfg.token_dim,
            "patch_size": cfg.patch_size, "image_size": cfg.image_size,
            "retained_layers": list(cfg.retained_layers), "num_heads": cfg.num_heads,
            "mlp_ratio": cfg.mlp_ratio, "sh_degree": cfg.sh_degree,
            "max_views": cfg.max_views, "use_gt_cameras": cfg.use_gt_cameras,
            "init_depth": cfg.init_depth, "init_scale": cfg.init_scale, "seed": cfg.seed,
        },
        "plan": {
            "head_sites": list(model.plan.head_sites),
            "aggregator_sites": list(model.plan.aggregator_sites),
            "style_dim": next(iter(model.plan.injectors.values())).style_dim
            if len(model.plan.injectors) else 0,
        },
        "frozen_ref": "frozen",
    }
    with open(directory / "model.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
    save_fields(directory / "frozen", dict(model.frozen.state_dict()))
    save_fields(directory / "styled_head", dict(model.styled_head.state_dict()))
    if model.variant == "full":
        save_fields(directory / "styled_aggregator", dict(model.styled_aggregator.state_dict()))
    for safe_name, injector in model.plan.injectors.items():
        save_fields(directory / "style_injectors" / safe_name,
                    dict(injector.state_dict()))


def load_model(directory: str | Path) -> DualBranchModel:
    directory = Path(directory)
    with open(directory / "model.json") as fh:
        meta = json.load(fh)
    cfg_raw = dict(meta["backbone_config"])
    cfg_raw["retained_layers"] = tuple(cfg_raw["retained_layers"])
    cfg = BackboneConfig(**cfg_raw)
    frozen = Backbone(cfg)
    fields, _ = load_fields(directory / meta["frozen_ref"])
    frozen.load_state_dict(fields)
    plan = InjectionPlan(cfg, meta["plan"]["head_sites"], meta["plan"]["aggregator_sites"],
                         style_dim=meta["plan"]["style_dim"])
    model = DualBranchModel(frozen, plan, variant=meta["variant"])
    head_fields, _ = load_fields(directory / "styled_head")
    model.styled_head.load_state_dict(head_fields)
    if meta["variant"] == "full":
        agg_fields, _ = load_fields(directory / "styled_aggregator")
        model.styled_aggregator.load_state_dict(agg_fields)
    for safe_name, injector in model.plan.injectors.items():
        inj_fields, _ = load_fields(directory / "style_injectors" / safe_name)
        injector.load_state_dict(inj_fields)
    return model
