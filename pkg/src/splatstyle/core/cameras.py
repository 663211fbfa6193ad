"""Pinhole camera model: intrinsics plus a rigid world-to-camera transform.

Convention: camera looks along +z in camera space (OpenCV style), pixel
coordinates u = fx * x / z + cx, v = fy * y / z + cy, and the pixel at row i,
column j has continuous coordinates (u, v) = (j, i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch

ROT_ORTHO_TOL = 1e-5


@dataclass(frozen=True)
class CameraModel:
    fx: float
    fy: float
    cx: float
    cy: float
    world_to_camera: torch.Tensor  # (4, 4) rigid, row-major
    width: int
    height: int

    def validate(self) -> list[str]:
        problems = []
        if self.fx <= 0 or self.fy <= 0:
            problems.append(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        if self.width <= 0 or self.height <= 0:
            problems.append(f"image size must be positive, got {self.width}x{self.height}")
        if tuple(self.world_to_camera.shape) != (4, 4):
            problems.append(f"world_to_camera has shape {tuple(self.world_to_camera.shape)}, expected (4, 4)")
            return problems
        r = self.world_to_camera[:3, :3]
        err = (r @ r.T - torch.eye(3, dtype=r.dtype)).abs().max()
        if float(err) > ROT_ORTHO_TOL:
            problems.append(f"rotation block deviates from orthonormal by {float(err):.3e}")
        bottom = self.world_to_camera[3]
        if not torch.allclose(bottom, torch.tensor([0.0, 0.0, 0.0, 1.0], dtype=bottom.dtype)):
            problems.append("bottom row of world_to_camera is not (0, 0, 0, 1)")
        return problems

    @property
    def intrinsics(self) -> torch.Tensor:
        return torch.tensor(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]],
            dtype=self.world_to_camera.dtype,
        )

    def to_world(self) -> torch.Tensor:
        """Inverse transform (camera to world)."""
        r = self.world_to_camera[:3, :3]
        t = self.world_to_camera[:3, 3]
        inv = torch.eye(4, dtype=self.world_to_camera.dtype)
        inv[:3, :3] = r.T
        inv[:3, 3] = -r.T @ t
        return inv

    def world_points_to_camera(self, points: torch.Tensor) -> torch.Tensor:
        """(N, 3) world -> (N, 3) camera coordinates."""
        w2c = self.world_to_camera.to(points.dtype)
        return points @ w2c[:3, :3].T + w2c[:3, 3]

    def project(self, points: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """(N, 3) world points -> ((N, 2) pixel coords, (N,) camera z)."""
        cam = self.world_points_to_camera(points)
        z = cam[:, 2]
        u = self.fx * cam[:, 0] / z + self.cx
        v = self.fy * cam[:, 1] / z + self.cy
        return torch.stack([u, v], dim=-1), z

    def unproject(self, uv: torch.Tensor, depth: torch.Tensor) -> torch.Tensor:
        """Pixel coords (N, 2) + camera-z depth (N,) -> (N, 3) world points."""
        x = (uv[:, 0] - self.cx) / self.fx * depth
        y = (uv[:, 1] - self.cy) / self.fy * depth
        cam = torch.stack([x, y, depth], dim=-1)
        c2w = self.to_world().to(uv.dtype)
        return cam @ c2w[:3, :3].T + c2w[:3, 3]

    def with_transform(self, world_to_camera: torch.Tensor) -> "CameraModel":
        return CameraModel(self.fx, self.fy, self.cx, self.cy, world_to_camera, self.width, self.height)


def look_at_camera(
    eye: torch.Tensor,
    target: torch.Tensor,
    up: torch.Tensor | None = None,
    fx: float = 50.0,
    fy: float = 50.0,
    width: int = 32,
    height: int = 32,
) -> CameraModel:
    """Camera at ``eye`` whose +z axis points toward ``target``."""
    eye = eye.to(torch.float64)
    target = target.to(torch.float64)
    up = torch.tensor([0.0, 1.0, 0.0], dtype=torch.float64) if up is None else up.to(torch.float64)
    fwd = target - eye
    fwd = fwd / fwd.norm()
    if float(torch.cross(fwd, up, dim=0).norm()) < 1e-8:
        up = torch.tensor([0.0, 0.0, 1.0], dtype=torch.float64)
    right = torch.cross(up, fwd, dim=0)
    # Left-handed flip guard: keep a right-handed (right, down, forward) frame.
    right = right / right.norm()
    down = torch.cross(fwd, right, dim=0)
    r = torch.stack([right, down, fwd], dim=0)
    w2c = torch.eye(4, dtype=torch.float64)
    w2c[:3, :3] = r
    w2c[:3, 3] = -r @ eye
    return CameraModel(fx, fy, (width - 1) / 2.0, (height - 1) / 2.0,
                       w2c.to(torch.float32), width, height)


def ring_cameras(
    n_views: int,
    radius: float,
    height_z: float = 0.0,
    fx: float = 50.0,
    width: int = 32,
    height: int = 32,
) -> list[CameraModel]:
    """n cameras on a circle of given radius, all looking at the origin."""
    cams = []
    for k in range(n_views):
        ang = 2.0 * math.pi * k / n_views
        eye = torch.tensor([radius * math.cos(ang), height_z, radius * math.sin(ang)])
        cams.append(look_at_camera(eye, torch.zeros(3), fx=fx, fy=fx, width=width, height=height))
    return cams
