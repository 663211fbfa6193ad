import math

import pytest
import torch

from splatstyle.core import CameraModel, GaussianScene


def random_unit_quats(n: int, gen: torch.Generator) -> torch.Tensor:
    q = torch.randn(n, 4, generator=gen, dtype=torch.float64)
    return (q / q.norm(dim=-1, keepdim=True)).to(torch.float32)


def random_scene(n: int, seed: int = 0, sh_degree: int = 0,
                 dtype: torch.dtype = torch.float32,
                 spread: float = 0.6, z_center: float = 4.0) -> GaussianScene:
    """Valid random scene in front of a z-forward camera at the origin."""
    gen = torch.Generator().manual_seed(seed)
    k = (sh_degree + 1) ** 2
    means = torch.randn(n, 3, generator=gen) * spread
    means[:, 2] += z_center
    scales = 0.05 + 0.3 * torch.rand(n, 3, generator=gen)
    opac = 0.2 + 0.75 * torch.rand(n, generator=gen)
    sh = torch.randn(n, k, 3, generator=gen) * 0.3
    scene = GaussianScene(
        means=means, rotations=random_unit_quats(n, gen), scales=scales,
        opacities=opac, sh_coeffs=sh,
        confidence=torch.rand(n, generator=gen) + 0.1,
    )
    return scene.to(dtype)


def identity_camera(width: int = 32, height: int = 32, focal: float = 40.0) -> CameraModel:
    return CameraModel(fx=focal, fy=focal, cx=(width - 1) / 2.0, cy=(height - 1) / 2.0,
                       world_to_camera=torch.eye(4), width=width, height=height)


@pytest.fixture
def small_camera():
    return identity_camera()
