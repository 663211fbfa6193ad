"""Cross-view warping from rendered depth and known poses.

Forward warping: every sufficiently opaque source pixel is unprojected with
its rendered depth, reprojected into the destination camera and splatted to
the nearest pixel with z-buffer resolution. Destination pixels nothing maps
to are masked invalid. Because depth and poses are exact here, this replaces
flow-based warping without its estimation error.
"""

from __future__ import annotations

import torch

from ..core.cameras import CameraModel
from ..renderer import RenderOutput

ALPHA_VALID = 0.5
ZBUF_TOL = 1e-4


def warp_by_depth(src: RenderOutput, src_cam: CameraModel,
                  dst_cam: CameraModel) -> tuple[torch.Tensor, torch.Tensor]:
    """Returns (warped (H, W, 3) image in the destination frame, valid mask)."""
    h, w = dst_cam.height, dst_cam.width
    warped = torch.zeros(h, w, 3, dtype=src.color.dtype)
    valid = torch.zeros(h, w, dtype=torch.bool)

    src_mask = src.alpha > ALPHA_VALID
    if not bool(src_mask.any()):
        return warped, valid

    ys, xs = torch.nonzero(src_mask, as_tuple=True)
    uv = torch.stack([xs.to(src.depth.dtype), ys.to(src.depth.dtype)], dim=-1)
    depth = src.depth[ys, xs]
    world = src_cam.unproject(uv, depth)
    duv, dz = dst_cam.project(world)

    u = torch.round(duv[:, 0]).to(torch.long)
    v = torch.round(duv[:, 1]).to(torch.long)
    in_frame = (dz > 0) & (u >= 0) & (u < w) & (v >= 0) & (v < h)
    if not bool(in_frame.any()):
        return warped, valid
    u, v, dz = u[in_frame], v[in_frame], dz[in_frame]
    colors = src.color[ys[in_frame], xs[in_frame]]

    # z-buffer: nearest depth wins; depths within the tolerance bucket of the
    # winner resolve to the earliest source pixel for determinism.
    pixel = v * w + u
    qz = torch.floor(dz / ZBUF_TOL).to(torch.long)
    order = torch.argsort(qz, stable=True)
    order2 = torch.argsort(pixel[order], stable=True)
    final = order[order2]
    pix_f = pixel[final]
    first_of_pixel = torch.ones_like(pix_f, dtype=torch.bool)
    first_of_pixel[1:] = pix_f[1:] != pix_f[:-1]
    winners = final[first_of_pixel]

    warped[v[winners], u[winners]] = colors[winners]
    valid[v[winners], u[winners]] = True
    return warped, valid
