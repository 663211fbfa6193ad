"""Voxel merge: collapse nearby Gaussians by confidence-weighted averaging.

Gaussians are bucketed by floor(mu / voxel_size); each bucket becomes one
Gaussian whose fields are confidence-weighted means. Quaternions are
sign-aligned to the bucket's highest-confidence member before averaging and
renormalized after. Buckets keep first-occurrence order, so a merge that
changes nothing is the identity.
"""

from __future__ import annotations

import torch

from ..core.gaussians import GaussianScene


def voxel_merge(scene: GaussianScene, voxel_size: float) -> GaussianScene:
    if voxel_size <= 0:
        raise ValueError(f"voxel_size must be positive, got {voxel_size}")
    n = len(scene)
    if n == 0:
        return scene

    cells = torch.floor(scene.means.detach() / voxel_size).to(torch.int64)
    uniq, inverse = torch.unique(cells, dim=0, return_inverse=True)
    nb = uniq.shape[0]

    first = torch.full((nb,), n, dtype=torch.long)
    first.scatter_reduce_(0, inverse, torch.arange(n), reduce="amin", include_self=True)
    rank = torch.empty(nb, dtype=torch.long)
    rank[torch.argsort(first)] = torch.arange(nb)
    bucket = rank[inverse]

    conf = scene.confidence
    total = torch.zeros(nb, dtype=conf.dtype).index_add_(0, bucket, conf)
    # Degenerate buckets (zero total confidence) fall back to unweighted mean.
    weight = torch.where(total[bucket] > 0, conf, torch.ones_like(conf))
    denom = torch.zeros(nb, dtype=conf.dtype).index_add_(0, bucket, weight)

    def wmean(values: torch.Tensor) -> torch.Tensor:
        flat = values.reshape(n, -1)
        acc = torch.zeros(nb, flat.shape[1], dtype=flat.dtype)
        acc.index_add_(0, bucket, flat * weight[:, None])
        return (acc / denom[:, None]).reshape(nb, *values.shape[1:])

    # Highest-confidence member per bucket (first index wins ties).
    maxconf = torch.full((nb,), float("-inf"), dtype=conf.dtype)
    maxconf.scatter_reduce_(0, bucket, conf, reduce="amax", include_self=True)
    candidate = torch.where(conf >= maxconf[bucket], torch.arange(n), torch.full((n,), n))
    ref = torch.full((nb,), n, dtype=torch.long)
    ref.scatter_reduce_(0, bucket, candidate, reduce="amin", include_self=True)

    quats = scene.rotations
    dots = (quats * quats[ref][bucket]).sum(dim=-1)
    sign = torch.where(dots < 0, -1.0, 1.0).to(quats.dtype).detach()
    mean_quat = wmean(quats * sign[:, None])
    mean_quat = mean_quat / mean_quat.norm(dim=-1, keepdim=True).clamp(min=1e-12)

    return GaussianScene(
        means=wmean(scene.means),
        rotations=mean_quat,
        scales=wmean(scene.scales),
        opacities=wmean(scene.opacities),
        sh_coeffs=wmean(scene.sh_coeffs),
        source_view=scene.source_view[ref],
        confidence=total,
    )
