import math

import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from splatstyle.core import (
    CameraModel,
    GaussianPrimitive,
    GaussianScene,
    covariance_of,
    validate_scene,
)
from splatstyle.core.checkpoint import load_scene, save_scene

from conftest import random_scene


def make_primitive(rot=(1.0, 0.0, 0.0, 0.0), scale=(1.0, 1.0, 1.0), opacity=0.5):
    return GaussianPrimitive(
        mu=torch.zeros(3),
        rot=torch.tensor(rot, dtype=torch.float64),
        scale=torch.tensor(scale, dtype=torch.float64),
        opacity=torch.tensor(opacity),
        sh_coeffs=torch.zeros(1, 3),
    )


class TestCovariance:
    def test_identity(self):
        cov = covariance_of(make_primitive())
        assert torch.allclose(cov, torch.eye(3, dtype=torch.float64))

    def test_axis_aligned(self):
        cov = covariance_of(make_primitive(scale=(2.0, 1.0, 1.0)))
        assert torch.allclose(cov, torch.diag(torch.tensor([4.0, 1.0, 1.0], dtype=torch.float64)))

    def test_rotated_90_about_z(self):
        # Oracle: compose R diag(s^2) R^T numerically from the rotation matrix.
        half = math.pi / 4.0
        quat = (math.cos(half), 0.0, 0.0, math.sin(half))
        cov = covariance_of(make_primitive(rot=quat, scale=(2.0, 1.0, 1.0)))
        r = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        expected = r @ np.diag([4.0, 1.0, 1.0]) @ r.T
        assert np.allclose(cov.numpy(), expected, atol=1e-9)
        assert torch.allclose(cov, torch.diag(torch.tensor([1.0, 4.0, 1.0], dtype=torch.float64)), atol=1e-9)

    def test_rejects_non_unit_quaternion(self):
        bad = make_primitive(rot=(1.0, 0.2, 0.0, 0.0))
        with pytest.raises(ValueError):
            covariance_of(bad)

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=40, deadline=None)
    def test_symmetric_with_squared_scale_eigenvalues(self, seed):
        gen = torch.Generator().manual_seed(seed)
        q = torch.randn(4, generator=gen, dtype=torch.float64)
        q = q / q.norm()
        scale = 0.2 + torch.rand(3, generator=gen, dtype=torch.float64)
        cov = covariance_of(GaussianPrimitive(
            mu=torch.zeros(3), rot=q, scale=scale,
            opacity=torch.tensor(0.5), sh_coeffs=torch.zeros(1, 3)))
        assert float((cov - cov.T).abs().max()) < 1e-9
        eig = torch.linalg.eigvalsh(cov)
        expected = torch.sort(scale ** 2).values
        assert torch.allclose(eig, expected, atol=1e-6)


class TestValidateScene:
    def test_empty_scene_valid(self):
        scene = GaussianScene(
            means=torch.zeros(0, 3), rotations=torch.zeros(0, 4),
            scales=torch.zeros(0, 3), opacities=torch.zeros(0),
            sh_coeffs=torch.zeros(0, 1, 3))
        assert validate_scene(scene) == []

    def test_opacity_violation_names_field(self):
        scene = random_scene(1, seed=3)
        scene.opacities[0] = 1.2
        problems = validate_scene(scene)
        assert len(problems) == 1
        assert "opacities" in problems[0]

    def test_random_valid_scene(self):
        assert validate_scene(random_scene(100, seed=7)) == []

    def test_shape_mismatch_reported(self):
        scene = random_scene(4, seed=1)
        scene.confidence = torch.ones(3)
        assert any("confidence" in p for p in validate_scene(scene))


class TestSceneCheckpoint:
    def test_round_trip_bit_exact(self, tmp_path):
        scene = random_scene(37, seed=11)
        save_scene(tmp_path / "ckpt", scene)
        loaded = load_scene(tmp_path / "ckpt")
        for field in ("means", "rotations", "scales", "opacities", "sh_coeffs", "confidence"):
            original = getattr(scene, field)
            restored = getattr(loaded, field)
            assert torch.equal(original, restored), field
        assert torch.equal(scene.source_view, loaded.source_view)


class TestCameraModel:
    def test_validation_catches_bad_rotation(self):
        w2c = torch.eye(4)
        w2c[0, 0] = 1.5
        cam = CameraModel(fx=10, fy=10, cx=5, cy=5, world_to_camera=w2c, width=10, height=10)
        assert any("orthonormal" in p for p in cam.validate())

    def test_project_unproject_round_trip(self):
        gen = torch.Generator().manual_seed(5)
        angle = torch.tensor(0.3)
        w2c = torch.eye(4)
        w2c[0, 0] = w2c[2, 2] = torch.cos(angle)
        w2c[0, 2] = torch.sin(angle)
        w2c[2, 0] = -torch.sin(angle)
        w2c[1, 3] = 0.2
        cam = CameraModel(fx=40, fy=42, cx=15.5, cy=15.5, world_to_camera=w2c, width=32, height=32)
        assert cam.validate() == []
        uv = torch.rand(50, 2, generator=gen) * 31
        depth = 1.0 + torch.rand(50, generator=gen) * 5
        world = cam.unproject(uv, depth)
        uv2, z2 = cam.project(world)
        assert float((uv - uv2).abs().max()) < 1e-5
        assert torch.allclose(depth, z2, atol=1e-5)
