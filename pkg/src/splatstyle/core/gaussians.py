"""Explicit 3D Gaussian scene representation.

A scene is a flat collection of anisotropic Gaussians, each carrying a
center, a unit quaternion, per-axis scales, an opacity and spherical-harmonic
color coefficients. Quaternions use the (w, x, y, z) Hamilton convention;
scales are stored in linear space (networks predict log-scale and
exponentiate at the boundary).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import torch

# Real SH basis constant for degree 0, shared with common splatting codebases
# so degree-0 renders are comparable across implementations.
SH_C0 = 0.28209479177

QUAT_NORM_TOL = 1e-6
ROT_ORTHO_TOL = 1e-5


def sh_coeff_count(degree: int) -> int:
    return (degree + 1) ** 2


@dataclass(frozen=True)
class GaussianPrimitive:
    """One Gaussian: center, rotation, per-axis scale, opacity, SH color."""

    mu: torch.Tensor        # (3,)
    rot: torch.Tensor       # (4,) unit quaternion (w, x, y, z)
    scale: torch.Tensor     # (3,) strictly positive
    opacity: torch.Tensor   # scalar in [0, 1]
    sh_coeffs: torch.Tensor  # ((degree+1)^2, 3)

    @property
    def sh_degree(self) -> int:
        return int(round(self.sh_coeffs.shape[0] ** 0.5)) - 1

    def validate(self) -> list[str]:
        problems = []
        if self.mu.shape != (3,):
            problems.append(f"mu has shape {tuple(self.mu.shape)}, expected (3,)")
        if self.rot.shape != (4,):
            problems.append(f"rot has shape {tuple(self.rot.shape)}, expected (4,)")
        elif abs(float(self.rot.norm()) - 1.0) > QUAT_NORM_TOL:
            problems.append(f"rot norm {float(self.rot.norm()):.8f} not unit within {QUAT_NORM_TOL}")
        if self.scale.shape != (3,):
            problems.append(f"scale has shape {tuple(self.scale.shape)}, expected (3,)")
        elif not bool((self.scale > 0).all()):
            problems.append("scale has non-positive components")
        op = float(self.opacity)
        if not (0.0 <= op <= 1.0):
            problems.append(f"opacity {op} outside [0, 1]")
        if self.sh_coeffs.ndim != 2 or self.sh_coeffs.shape[1] != 3:
            problems.append(f"sh_coeffs has shape {tuple(self.sh_coeffs.shape)}, expected (K, 3)")
        else:
            k = self.sh_coeffs.shape[0]
            deg = int(round(k ** 0.5)) - 1
            if sh_coeff_count(deg) != k:
                problems.append(f"sh_coeffs count {k} is not a perfect square (degree+1)^2")
        for name in ("mu", "rot", "scale", "opacity", "sh_coeffs"):
            t = getattr(self, name)
            if not bool(torch.isfinite(t).all()):
                problems.append(f"{name} contains non-finite values")
        return problems


def quat_to_rotmat(q: torch.Tensor) -> torch.Tensor:
    """(..., 4) quaternions (w, x, y, z) -> (..., 3, 3) rotation matrices.

    Inputs are normalized first, so mildly off-unit quaternions still map to
    proper rotations (callers enforce the unit invariant separately).
    """
    q = q / q.norm(dim=-1, keepdim=True)
    w, x, y, z = q.unbind(-1)
    row0 = torch.stack([1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)], dim=-1)
    row1 = torch.stack([2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)], dim=-1)
    row2 = torch.stack([2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)], dim=-1)
    return torch.stack([row0, row1, row2], dim=-2)


def covariance_of(g: GaussianPrimitive) -> torch.Tensor:
    """3x3 covariance Sigma = R diag(s)^2 R^T of one Gaussian."""
    if abs(float(g.rot.norm()) - 1.0) > QUAT_NORM_TOL:
        raise ValueError(f"quaternion norm {float(g.rot.norm()):.8f} exceeds unit tolerance {QUAT_NORM_TOL}")
    return scene_covariances(g.rot[None], g.scale[None])[0]


def scene_covariances(rotations: torch.Tensor, scales: torch.Tensor) -> torch.Tensor:
    """Batched covariances: (N, 4), (N, 3) -> (N, 3, 3)."""
    r = quat_to_rotmat(rotations)
    rs = r * scales[:, None, :]
    return rs @ rs.transpose(-1, -2)


@dataclass
class GaussianScene:
    """Renderable collection of Gaussians with per-Gaussian bookkeeping.

    ``source_view`` records which input view produced each Gaussian;
    ``confidence`` is a non-negative weight consumed by voxel merging.
    All tensors share the leading N dimension.
    """

    means: torch.Tensor        # (N, 3)
    rotations: torch.Tensor    # (N, 4)
    scales: torch.Tensor       # (N, 3)
    opacities: torch.Tensor    # (N,)
    sh_coeffs: torch.Tensor    # (N, K, 3)
    source_view: torch.Tensor = field(default=None)  # (N,) long
    confidence: torch.Tensor = field(default=None)   # (N,) float >= 0

    def __post_init__(self):
        n = self.means.shape[0]
        if self.source_view is None:
            self.source_view = torch.zeros(n, dtype=torch.long)
        if self.confidence is None:
            self.confidence = torch.ones(n, dtype=self.means.dtype)

    def __len__(self) -> int:
        return self.means.shape[0]

    @property
    def sh_degree(self) -> int:
        return int(round(self.sh_coeffs.shape[1] ** 0.5)) - 1

    def primitive(self, i: int) -> GaussianPrimitive:
        return GaussianPrimitive(
            mu=self.means[i], rot=self.rotations[i], scale=self.scales[i],
            opacity=self.opacities[i], sh_coeffs=self.sh_coeffs[i],
        )

    def detach(self) -> "GaussianScene":
        return GaussianScene(
            means=self.means.detach(), rotations=self.rotations.detach(),
            scales=self.scales.detach(), opacities=self.opacities.detach(),
            sh_coeffs=self.sh_coeffs.detach(), source_view=self.source_view,
            confidence=self.confidence.detach(),
        )

    def to(self, dtype: torch.dtype) -> "GaussianScene":
        return GaussianScene(
            means=self.means.to(dtype), rotations=self.rotations.to(dtype),
            scales=self.scales.to(dtype), opacities=self.opacities.to(dtype),
            sh_coeffs=self.sh_coeffs.to(dtype), source_view=self.source_view,
            confidence=self.confidence.to(dtype),
        )


def validate_scene(scene: GaussianScene) -> list[str]:
    """Report every invariant violation; empty list means the scene is valid."""
    scene = scene.detach()
    problems: list[str] = []
    n = len(scene)
    named = {
        "means": (scene.means, (n, 3)),
        "rotations": (scene.rotations, (n, 4)),
        "scales": (scene.scales, (n, 3)),
        "opacities": (scene.opacities, (n,)),
        "source_view": (scene.source_view, (n,)),
        "confidence": (scene.confidence, (n,)),
    }
    for name, (t, shape) in named.items():
        if tuple(t.shape) != shape:
            problems.append(f"{name} has shape {tuple(t.shape)}, expected {shape}")
    if scene.sh_coeffs.ndim != 3 or scene.sh_coeffs.shape[0] != n or scene.sh_coeffs.shape[2] != 3:
        problems.append(f"sh_coeffs has shape {tuple(scene.sh_coeffs.shape)}, expected ({n}, K, 3)")
    else:
        k = scene.sh_coeffs.shape[1]
        deg = int(round(k ** 0.5)) - 1
        if sh_coeff_count(deg) != k:
            problems.append(f"sh_coeffs per-Gaussian count {k} is not (degree+1)^2")
    if problems:
        return problems
    if n == 0:
        return problems
    for name in ("means", "rotations", "scales", "opacities", "sh_coeffs", "confidence"):
        t = getattr(scene, name)
        if not bool(torch.isfinite(t).all()):
            problems.append(f"{name} contains non-finite values")
    norm_err = (scene.rotations.norm(dim=-1) - 1.0).abs()
    if float(norm_err.max()) > QUAT_NORM_TOL:
        bad = int(norm_err.argmax())
        problems.append(f"rotations[{bad}] norm deviates from 1 by {float(norm_err.max()):.3e}")
    if not bool((scene.scales > 0).all()):
        bad = int((scene.scales <= 0).any(dim=-1).nonzero()[0])
        problems.append(f"scales[{bad}] has non-positive components")
    if not bool(((scene.opacities >= 0) & (scene.opacities <= 1)).all()):
        bad = int(((scene.opacities < 0) | (scene.opacities > 1)).nonzero()[0])
        problems.append(f"opacities[{bad}] = {float(scene.opacities[bad])} outside [0, 1]")
    if not bool((scene.confidence >= 0).all()):
        bad = int((scene.confidence < 0).nonzero()[0])
        problems.append(f"confidence[{bad}] = {float(scene.confidence[bad])} is negative")
    return problems


def concat_scenes(scenes: list[GaussianScene]) -> GaussianScene:
    return GaussianScene(
        means=torch.cat([s.means for s in scenes]),
        rotations=torch.cat([s.rotations for s in scenes]),
        scales=torch.cat([s.scales for s in scenes]),
        opacities=torch.cat([s.opacities for s in scenes]),
        sh_coeffs=torch.cat([s.sh_coeffs for s in scenes]),
        source_view=torch.cat([s.source_view for s in scenes]),
        confidence=torch.cat([s.confidence for s in scenes]),
    )
