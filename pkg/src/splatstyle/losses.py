"""Training objective: content, style-statistics, directional and patch
directional embedding losses, plus an optional depth-consistency term.

The perceptual network is a small frozen multi-scale conv net whose taps
keep the familiar relu*_1 naming (activations are softplus so every loss
stays smooth enough for finite-difference checks). Content compares deep
taps; style matches channel-wise mean/std across all taps. The directional
losses compare the embedding-space movement of the render against the
movement from the neutral prompt to the target style.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn as nn
import torch.nn.functional as F

from .style.embedding import StyleEmbedding, StyleSignal, embed

CONTENT_TAPS = ("relu3_1", "relu4_1")
STYLE_TAPS = ("relu1_1", "relu2_1", "relu3_1", "relu4_1")
EPS = 1e-8


class FeatureExtractor(nn.Module):
    """Frozen 4-stage conv net with named taps at strictly shrinking scales."""

    taps = STYLE_TAPS

    def __init__(self, seed: int = 0, input_size: int = 64,
                 channels: tuple[int, ...] = (8, 12, 16, 16)):
        super().__init__()
        self.input_size = input_size
        dims = (3, *channels)
        self.convs = nn.ModuleList(
            nn.Conv2d(dims[i], dims[i + 1], kernel_size=3, padding=1) for i in range(4))
        gen = torch.Generator().manual_seed(seed)
        with torch.no_grad():
            for conv in self.convs:
                fan_in = conv.weight.shape[1] * 9
                conv.weight.copy_(torch.randn(conv.weight.shape, generator=gen)
                                  * (2.0 / fan_in) ** 0.5)
                conv.bias.copy_(torch.randn(conv.bias.shape, generator=gen) * 0.1)
        for p in self.parameters():
            p.requires_grad_(False)

    def features(self, image: torch.Tensor) -> dict[str, torch.Tensor]:
        """image: (H, W, 3) -> tap name -> (C, h, w) activations.

        Runs in the input's dtype (weights are cast), so float64 callers get
        float64 activations for finite-difference checks.
        """
        if image.ndim != 3 or image.shape[2] != 3:
            raise ValueError(f"expected (H, W, 3) image, got {tuple(image.shape)}")
        x = image.permute(2, 0, 1)[None]
        out = {}
        for i, conv in enumerate(self.convs):
            x = F.softplus(F.conv2d(x, conv.weight.to(x.dtype), conv.bias.to(x.dtype), padding=1))
            out[self.taps[i]] = x[0]
            if i < 3:
                x = F.avg_pool2d(x, kernel_size=2)
        return out

    def resized(self, image: torch.Tensor) -> torch.Tensor:
        if image.shape[0] == self.input_size and image.shape[1] == self.input_size:
            return image
        x = image.permute(2, 0, 1)[None]
        x = F.interpolate(x, size=(self.input_size, self.input_size),
                          mode="bilinear", align_corners=False)
        return x[0].permute(1, 2, 0)


def channel_stats(act: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    """(C, h, w) -> per-channel mean and (biased) std over spatial dims."""
    flat = act.reshape(act.shape[0], -1)
    mean = flat.mean(dim=1)
    var = ((flat - mean[:, None]) ** 2).mean(dim=1)
    return mean, torch.sqrt(var + EPS)


def content_loss(rendered: torch.Tensor, original: torch.Tensor,
                 extractor: FeatureExtractor) -> torch.Tensor:
    if rendered.shape != original.shape:
        raise ValueError("content loss inputs must share a shape")
    fr = extractor.features(rendered)
    fo = extractor.features(original)
    total = rendered.new_zeros(())
    for tap in CONTENT_TAPS:
        total = total + ((fr[tap] - fo[tap]) ** 2).mean()
    return total


def style_loss(rendered: torch.Tensor, style_img: torch.Tensor,
               extractor: FeatureExtractor) -> torch.Tensor:
    fr = extractor.features(extractor.resized(rendered))
    fs = extractor.features(extractor.resized(style_img))
    total = rendered.new_zeros(())
    for tap in STYLE_TAPS:
        mr, sr = channel_stats(fr[tap])
        ms, ss = channel_stats(fs[tap])
        total = total + ((mr - ms) ** 2).mean() + ((sr - ss) ** 2).mean()
    return total


def directional_loss(image_dir: torch.Tensor, style_dir: torch.Tensor) -> torch.Tensor:
    """1 - cos(image direction, style direction), norms epsilon-guarded.

    A zero image direction (stylized == original) yields exactly 1, the
    orthogonality convention.
    """
    num = (image_dir * style_dir).sum()
    denom = (image_dir.norm() + EPS) * (style_dir.norm() + EPS)
    return 1.0 - num / denom


def clip_directional_loss(original: torch.Tensor, stylized: torch.Tensor,
                          z_style: StyleEmbedding, z_neutral: StyleEmbedding,
                          provider) -> torch.Tensor:
    z_orig = embed(StyleSignal(image=original), provider).vec
    z_sty = embed(StyleSignal(image=stylized), provider).vec
    return directional_loss(z_sty - z_orig, z_style.vec - z_neutral.vec)


def _perspective_grid(crop: int, jitter: float, generator: torch.Generator,
                      dtype: torch.dtype) -> torch.Tensor:
    """Sampling grid (1, crop, crop, 2) for a random perspective warp.

    Output corners map to input corners jittered by up to ``jitter * crop``.
    """
    corners_out = torch.tensor(
        [[0.0, 0.0], [crop - 1.0, 0.0], [crop - 1.0, crop - 1.0], [0.0, crop - 1.0]],
        dtype=torch.float64)
    offsets = (torch.rand(4, 2, generator=generator, dtype=torch.float64) * 2 - 1) * jitter * crop
    corners_in = corners_out + offsets

    # direct linear transform for the 3x3 homography (h22 = 1)
    rows = []
    rhs = []
    for (xo, yo), (xi, yi) in zip(corners_out.tolist(), corners_in.tolist()):
        rows.append([xo, yo, 1, 0, 0, 0, -xi * xo, -xi * yo])
        rhs.append(xi)
        rows.append([0, 0, 0, xo, yo, 1, -yi * xo, -yi * yo])
        rhs.append(yi)
    a = torch.tensor(rows, dtype=torch.float64)
    b = torch.tensor(rhs, dtype=torch.float64)
    h = torch.cat([torch.linalg.solve(a, b), torch.ones(1, dtype=torch.float64)]).reshape(3, 3)

    ys, xs = torch.meshgrid(torch.arange(crop, dtype=torch.float64),
                            torch.arange(crop, dtype=torch.float64), indexing="ij")
    ones = torch.ones_like(xs)
    pts = torch.stack([xs, ys, ones], dim=-1) @ h.T
    sample = pts[..., :2] / pts[..., 2:3]
    # to grid_sample's normalized [-1, 1] coordinates (align_corners=True)
    grid = sample / (crop - 1.0) * 2.0 - 1.0
    return grid[None].to(dtype)


def clip_patch_loss(original: torch.Tensor, stylized: torch.Tensor,
                    z_style: StyleEmbedding, z_neutral: StyleEmbedding, provider,
                    n_patch: int = 16, crop_size: int = 64,
                    generator: torch.Generator | None = None,
                    jitter: float = 0.15, warp: bool = True) -> torch.Tensor:
    h, w = stylized.shape[:2]
    if crop_size > h or crop_size > w:
        raise ValueError(f"crop size {crop_size} exceeds image size {h}x{w}")
    if generator is None:
        generator = torch.Generator().manual_seed(0)
    z_orig = embed(StyleSignal(image=original), provider).vec
    style_dir = z_style.vec - z_neutral.vec

    total = stylized.new_zeros(())
    for _ in range(n_patch):
        top = int(torch.randint(0, h - crop_size + 1, (1,), generator=generator))
        left = int(torch.randint(0, w - crop_size + 1, (1,), generator=generator))
        patch = stylized[top:top + crop_size, left:left + crop_size]
        if warp:
            grid = _perspective_grid(crop_size, jitter, generator, stylized.dtype)
            warped = F.grid_sample(patch.permute(2, 0, 1)[None], grid, mode="bilinear",
                                   padding_mode="border", align_corners=True)
            patch = warped[0].permute(1, 2, 0)
        z_patch = embed(StyleSignal(image=patch), provider).vec
        total = total + directional_loss(z_patch - z_orig, style_dir)
    return total / n_patch


def depth_consistency_loss(stylized_depth: torch.Tensor, frozen_depth: torch.Tensor,
                           mask: torch.Tensor | None = None) -> torch.Tensor:
    """Mean absolute depth difference over the valid mask (empty mask -> 0)."""
    if stylized_depth.shape != frozen_depth.shape:
        raise ValueError("depth maps must share a shape")
    diff = (stylized_depth - frozen_depth).abs()
    if mask is None:
        return diff.mean()
    if int(mask.sum()) == 0:
        return stylized_depth.new_zeros(())
    return diff[mask].mean()


@dataclass(frozen=True)
class LossWeights:
    style: float = 1.0
    content: float = 0.05
    clip_global: float = 2.0
    clip_patch: float = 4.0
    depth: float = 0.1

    def __post_init__(self):
        for name in ("style", "content", "clip_global", "clip_patch", "depth"):
            if getattr(self, name) < 0:
                raise ValueError(f"negative loss weight {name}={getattr(self, name)}")


@dataclass
class LossBundle:
    content: torch.Tensor
    style: torch.Tensor
    clip_global: torch.Tensor
    clip_patch: torch.Tensor
    depth_consistency: torch.Tensor
    weights: LossWeights
    total: torch.Tensor

    def scalars(self) -> dict[str, float]:
        return {
            "content": float(self.content.detach()), "style": float(self.style.detach()),
            "clip_global": float(self.clip_global.detach()),
            "clip_patch": float(self.clip_patch.detach()),
            "depth_consistency": float(self.depth_consistency.detach()),
            "total": float(self.total.detach()),
        }


def total_loss(content: torch.Tensor, style: torch.Tensor, clip_global: torch.Tensor,
               clip_patch: torch.Tensor, depth_consistency: torch.Tensor | None = None,
               weights: LossWeights | None = None) -> LossBundle:
    weights = weights or LossWeights()
    if depth_consistency is None:
        depth_consistency = content.new_zeros(()) if isinstance(content, torch.Tensor) \
            else torch.zeros(())
    terms = [content, style, clip_global, clip_patch, depth_consistency]
    terms = [t if isinstance(t, torch.Tensor) else torch.as_tensor(float(t)) for t in terms]
    content, style, clip_global, clip_patch, depth_consistency = terms
    total = (weights.content * content + weights.style * style
             + weights.clip_global * clip_global + weights.clip_patch * clip_patch
             + weights.depth * depth_consistency)
    return LossBundle(content=content, style=style, clip_global=clip_global,
                      clip_patch=clip_patch, depth_consistency=depth_consistency,
                      weights=weights, total=total)
