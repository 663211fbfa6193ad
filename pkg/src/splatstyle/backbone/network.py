"""Toy feed-forward reconstructor: patch embedder, aggregator, heads.

The frozen patch embedder stands in for a pretrained feature extractor; the
aggregator is a small transformer alternating per-view and all-view
self-attention; heads decode retained-layer tokens into cameras, per-pixel
depth (unprojected to Gaussian centers) and the remaining Gaussian
attributes. All weights are initialized from an explicit seeded generator so
forward passes are bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import torch
import torch.nn as nn
import torch.nn.functional as F

from ..core.cameras import CameraModel
from ..core.gaussians import GaussianScene
from .config import BackboneConfig

InjectionHook = Callable[[int, torch.Tensor], torch.Tensor]


@dataclass
class PatchFeatures:
    tokens: torch.Tensor  # (V, N, d_f)
    grid: tuple[int, int]  # patches per (row, col)
    patch_size: int


@dataclass
class AggregatorOutput:
    tokens: dict[int, torch.Tensor]  # retained layer index -> (V, N, d_f)
    retained_layers: tuple[int, ...]
    final_layer: int
    grid: tuple[int, int]


def seeded_init_(module: nn.Module, seed: int) -> None:
    """Reproducible init: 0.02-std normals for matrices, zeros for biases."""
    gen = torch.Generator().manual_seed(seed)
    for name, p in sorted(module.named_parameters(), key=lambda kv: kv[0]):
        with torch.no_grad():
            if "norm" in name or name.endswith("ln.weight"):
                p.fill_(1.0 if name.endswith("weight") else 0.0)
            elif p.ndim >= 2:
                p.copy_(torch.randn(p.shape, generator=gen) * 0.02)
            else:
                p.zero_()


class TransformerBlock(nn.Module):
    def __init__(self, dim: int, heads: int, mlp_ratio: float, mode: str):
        super().__init__()
        if mode not in ("local", "global"):
            raise ValueError(f"unknown attention mode {mode!r}")
        self.mode = mode
        self.norm1 = nn.LayerNorm(dim)
        self.attn = nn.MultiheadAttention(dim, heads, batch_first=True)
        self.norm2 = nn.LayerNorm(dim)
        hidden = int(dim * mlp_ratio)
        self.mlp = nn.Sequential(nn.Linear(dim, hidden), nn.GELU(), nn.Linear(hidden, dim))

    def forward(self, tokens: torch.Tensor) -> torch.Tensor:
        """tokens: (V, N, d). Local attends within each view, global across all."""
        v, n, d = tokens.shape
        if self.mode == "local":
            x = tokens
            h = self.norm1(x)
            attn_out, _ = self.attn(h, h, h, need_weights=False)
            x = x + attn_out
        else:
            x = tokens.reshape(1, v * n, d)
            h = self.norm1(x)
            attn_out, _ = self.attn(h, h, h, need_weights=False)
            x = (x + attn_out).reshape(v, n, d)
        return x + self.mlp(self.norm2(x))


class Aggregator(nn.Module):
    """Self-attention trunk producing per-layer token sets.

    An optional injection hook runs on the tokens entering layer ``l``; the
    hook must preserve shape (this is the seam where style conditioning is
    added without touching attention internals).
    """

    def __init__(self, cfg: BackboneConfig):
        super().__init__()
        self.cfg = cfg
        self.blocks = nn.ModuleList(
            TransformerBlock(cfg.token_dim, cfg.num_heads, cfg.mlp_ratio, mode)
            for mode in cfg.schedule)
        self.pos_embed = nn.Parameter(torch.zeros(cfg.tokens_per_view, cfg.token_dim))
        self.view_embed = nn.Parameter(torch.zeros(cfg.max_views, cfg.token_dim))

    def forward(self, feats: PatchFeatures, injection_hook: InjectionHook | None = None,
                keep_all_layers: bool = False) -> AggregatorOutput:
        v, n, d = feats.tokens.shape
        if n != self.pos_embed.shape[0]:
            raise ValueError(f"got {n} tokens per view, config expects {self.pos_embed.shape[0]}")
        if v > self.view_embed.shape[0]:
            raise ValueError(f"{v} views exceed max_views {self.view_embed.shape[0]}")
        x = feats.tokens + self.pos_embed[None] + self.view_embed[:v, None, :]

        retained = set(self.cfg.head_layers)
        out: dict[int, torch.Tensor] = {}
        for l, block in enumerate(self.blocks):
            if injection_hook is not None:
                injected = injection_hook(l, x)
                if injected.shape != x.shape:
                    raise ValueError(
                        f"injection hook changed token shape at layer {l}: "
                        f"{tuple(x.shape)} -> {tuple(injected.shape)}")
                x = injected
            x = block(x)
            if keep_all_layers or l in retained:
                out[l] = x
        return AggregatorOutput(tokens=out, retained_layers=self.cfg.head_layers,
                                final_layer=self.cfg.final_layer, grid=feats.grid)


def _stack_retained(agg: AggregatorOutput) -> torch.Tensor:
    """Concatenate retained-layer tokens per spatial location: (V, N, R*d)."""
    return torch.cat([agg.tokens[l] for l in agg.retained_layers], dim=-1)


class DepthHead(nn.Module):
    """Per-patch depth and confidence decoded from retained tokens."""

    def __init__(self, cfg: BackboneConfig):
        super().__init__()
        in_dim = len(cfg.head_layers) * cfg.token_dim
        self.cfg = cfg
        self.net = nn.Sequential(
            nn.Linear(in_dim, cfg.token_dim), nn.GELU(), nn.Linear(cfg.token_dim, 2))
        self.depth_bias = math.log(math.expm1(cfg.init_depth))

    def forward(self, agg: AggregatorOutput, cams: list[CameraModel]
                ) -> tuple[torch.Tensor, torch.Tensor]:
        """Returns (points (V, H, W, 3) world coords, confidence (V, H, W))."""
        tokens = _stack_retained(agg)
        v = tokens.shape[0]
        if len(cams) != v:
            raise ValueError(f"{len(cams)} cameras for {v} views")
        raw = self.net(tokens)  # (V, N, 2)
        gh, gw = agg.grid
        p = self.cfg.patch_size
        depth = F.softplus(raw[..., 0] + self.depth_bias).reshape(v, gh, gw)
        conf = F.softplus(raw[..., 1]).reshape(v, gh, gw)
        # nearest-within-patch upsample to pixel resolution
        depth = depth.repeat_interleave(p, dim=1).repeat_interleave(p, dim=2)
        conf = conf.repeat_interleave(p, dim=1).repeat_interleave(p, dim=2)

        h, w = gh * p, gw * p
        points = []
        for i, cam in enumerate(cams):
            vv, uu = torch.meshgrid(
                torch.arange(h, dtype=depth.dtype), torch.arange(w, dtype=depth.dtype),
                indexing="ij")
            uv = torch.stack([uu.reshape(-1), vv.reshape(-1)], dim=-1)
            pts = cam.unproject(uv, depth[i].reshape(-1))
            points.append(pts.reshape(h, w, 3))
        return torch.stack(points), conf


class GaussianHead(nn.Module):
    """Remaining Gaussian attributes (rotation, scale, opacity, SH color)."""

    # Bounded outputs keep every Gaussian in the renderer's live range: SH
    # coefficients stay where the color clamp has gradient (full [0, 1] gamut
    # still reachable), log-scales stay within +/-3 of the init scale.
    SH_BOUND = 0.6 / 0.28209479177
    LOG_SCALE_SPAN = 3.0

    def __init__(self, cfg: BackboneConfig):
        super().__init__()
        in_dim = len(cfg.head_layers) * cfg.token_dim
        self.cfg = cfg
        self.out_dim = 4 + 3 + 1 + cfg.sh_coeff_count * 3
        self.net = nn.Sequential(
            nn.Linear(in_dim, cfg.token_dim), nn.GELU(), nn.Linear(cfg.token_dim, self.out_dim))
        self.log_scale_bias = math.log(cfg.init_scale)
        self.opacity_bias = 0.5

    def forward(self, agg: AggregatorOutput, depth_points: torch.Tensor,
                confidence: torch.Tensor | None = None) -> GaussianScene:
        """depth_points: (V, H, W, 3) Gaussian centers; one Gaussian per pixel."""
        tokens = _stack_retained(agg)
        v = tokens.shape[0]
        gh, gw = agg.grid
        p = self.cfg.patch_size
        h, w = gh * p, gw * p
        if tuple(depth_points.shape) != (v, h, w, 3):
            raise ValueError(f"depth_points shape {tuple(depth_points.shape)} does not match "
                             f"{v} views of {h}x{w} pixels")

        raw = self.net(tokens).reshape(v, gh, gw, self.out_dim)
        raw = raw.repeat_interleave(p, dim=1).repeat_interleave(p, dim=2)
        raw = raw.reshape(v * h * w, self.out_dim)

        quat = raw[:, 0:4] + torch.tensor([1.0, 0.0, 0.0, 0.0], dtype=raw.dtype)
        quat = quat / quat.norm(dim=-1, keepdim=True).clamp(min=1e-12)
        log_scale = self.log_scale_bias + self.LOG_SCALE_SPAN * torch.tanh(raw[:, 4:7])
        opacity = torch.sigmoid(raw[:, 7] + self.opacity_bias)
        sh = (self.SH_BOUND * torch.tanh(raw[:, 8:])).reshape(-1, self.cfg.sh_coeff_count, 3)

        if confidence is None:
            conf = torch.ones(v * h * w, dtype=raw.dtype)
        else:
            conf = confidence.reshape(v * h * w)
        source = torch.arange(v).repeat_interleave(h * w)
        return GaussianScene(
            means=depth_points.reshape(-1, 3), rotations=quat,
            scales=torch.exp(log_scale), opacities=opacity, sh_coeffs=sh,
            source_view=source, confidence=conf)


class CameraHead(nn.Module):
    """Per-view camera from mean-pooled final tokens, 6D rotation param."""

    def __init__(self, cfg: BackboneConfig):
        super().__init__()
        self.cfg = cfg
        self.net = nn.Sequential(
            nn.Linear(cfg.token_dim, cfg.token_dim), nn.GELU(),
            nn.Linear(cfg.token_dim, 6 + 3 + 1))
        self.focal_bias = math.log(math.expm1(float(cfg.image_size)))

    def forward(self, agg: AggregatorOutput) -> list[CameraModel]:
        pooled = agg.tokens[agg.final_layer].mean(dim=1)  # (V, d)
        raw = self.net(pooled)
        size = self.cfg.image_size
        cams = []
        for i in range(raw.shape[0]):
            a, b = raw[i, 0:3], raw[i, 3:6]
            # Gram-Schmidt on the 6D parameterization; z completes the frame.
            x = a + torch.tensor([1.0, 0.0, 0.0], dtype=raw.dtype)
            x = x / x.norm().clamp(min=1e-12)
            y = b + torch.tensor([0.0, 1.0, 0.0], dtype=raw.dtype)
            y = y - (x * y).sum() * x
            y = y / y.norm().clamp(min=1e-12)
            z = torch.cross(x, y, dim=0)
            r = torch.stack([x, y, z], dim=0)
            t = raw[i, 6:9]
            w2c = torch.eye(4, dtype=raw.dtype)
            w2c[:3, :3] = r
            w2c[:3, 3] = t
            focal = F.softplus(raw[i, 9] + self.focal_bias).detach()
            cams.append(CameraModel(
                fx=float(focal), fy=float(focal),
                cx=(size - 1) / 2.0, cy=(size - 1) / 2.0,
                world_to_camera=w2c.detach(), width=size, height=size))
        return cams


class Backbone(nn.Module):
    """Frozen-embedder trunk plus heads; the reconstruction workhorse."""

    def __init__(self, cfg: BackboneConfig):
        super().__init__()
        self.cfg = cfg
        self.patch_embed = nn.Conv2d(3, cfg.token_dim, kernel_size=cfg.patch_size,
                                     stride=cfg.patch_size)
        self.aggregator = Aggregator(cfg)
        self.depth_head = DepthHead(cfg)
        self.gaussian_head = GaussianHead(cfg)
        self.camera_head = CameraHead(cfg)
        seeded_init_(self, cfg.seed)
        # The embedder mimics a pretrained frozen feature extractor: its
        # weights never train. Re-draw them at a larger magnitude so patch
        # features carry usable contrast.
        gen = torch.Generator().manual_seed(cfg.seed + 101)
        with torch.no_grad():
            self.patch_embed.weight.copy_(
                torch.randn(self.patch_embed.weight.shape, generator=gen) * 0.5)
            self.patch_embed.bias.zero_()
        self.patch_embed.weight.requires_grad_(False)
        self.patch_embed.bias.requires_grad_(False)

    def extract_features(self, images: list[torch.Tensor]) -> PatchFeatures:
        """images: list of (H, W, 3) tensors, all the same size, H,W % p == 0."""
        if not images:
            raise ValueError("need at least one view")
        h, w = images[0].shape[:2]
        p = self.cfg.patch_size
        for i, img in enumerate(images):
            if img.shape[:2] != (h, w):
                raise ValueError(f"view {i} has size {tuple(img.shape[:2])}, expected {(h, w)}")
        if h % p or w % p:
            raise ValueError(f"image size {h}x{w} not divisible by patch size {p}")
        batch = torch.stack(images).permute(0, 3, 1, 2)  # (V, 3, H, W)
        grid = self.patch_embed(batch)  # (V, d, h/p, w/p)
        gh, gw = grid.shape[2], grid.shape[3]
        tokens = grid.flatten(2).transpose(1, 2)  # (V, N, d)
        return PatchFeatures(tokens=tokens, grid=(gh, gw), patch_size=p)

    def aggregate(self, feats: PatchFeatures, injection_hook: InjectionHook | None = None,
                  keep_all_layers: bool = False) -> AggregatorOutput:
        return self.aggregator(feats, injection_hook, keep_all_layers)

    def cameras_for(self, agg: AggregatorOutput,
                    gt_cams: list[CameraModel] | None = None) -> list[CameraModel]:
        if self.cfg.use_gt_cameras and gt_cams is not None:
            return gt_cams
        return self.camera_head(agg)

    def trainable_parameters(self):
        return [p for p in self.parameters() if p.requires_grad]
