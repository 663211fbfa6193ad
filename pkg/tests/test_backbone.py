import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from splatstyle.backbone import Backbone, BackboneConfig, voxel_merge
from splatstyle.core import GaussianScene, ring_cameras, validate_scene

from conftest import random_scene

TINY = BackboneConfig(num_layers=4, token_dim=32, patch_size=8, image_size=16,
                      retained_layers=(1,), num_heads=2, seed=0)


def make_views(n_views=2, size=16, seed=0):
    gen = torch.Generator().manual_seed(seed)
    return [torch.rand(size, size, 3, generator=gen) for _ in range(n_views)]


@pytest.fixture(scope="module")
def tiny_backbone():
    return Backbone(TINY)


class TestExtractFeatures:
    def test_shapes(self):
        cfg = BackboneConfig(num_layers=6, token_dim=128, patch_size=16, image_size=64,
                             retained_layers=(2, 4))
        bb = Backbone(cfg)
        feats = bb.extract_features(make_views(2, 64))
        assert tuple(feats.tokens.shape) == (2, 16, 128)

    def test_frozen_determinism(self, tiny_backbone):
        views = make_views(2)
        a = tiny_backbone.extract_features(views).tokens
        b = tiny_backbone.extract_features(views).tokens
        assert torch.equal(a, b)
        rebuilt = Backbone(TINY)
        c = rebuilt.extract_features(views).tokens
        assert torch.equal(a, c)

    def test_view_permutation_permutes_axis_only(self, tiny_backbone):
        v0, v1 = make_views(2)
        fwd = tiny_backbone.extract_features([v0, v1]).tokens
        rev = tiny_backbone.extract_features([v1, v0]).tokens
        assert torch.equal(fwd[0], rev[1])
        assert torch.equal(fwd[1], rev[0])

    def test_rejects_non_divisible_size(self, tiny_backbone):
        with pytest.raises(ValueError, match="divisible"):
            tiny_backbone.extract_features([torch.rand(10, 10, 3)])


class TestAggregate:
    def test_identity_hook_matches_no_hook(self, tiny_backbone):
        feats = tiny_backbone.extract_features(make_views(2))
        plain = tiny_backbone.aggregate(feats)
        hooked = tiny_backbone.aggregate(feats, injection_hook=lambda l, t: t)
        for l in plain.tokens:
            assert torch.equal(plain.tokens[l], hooked.tokens[l])

    def test_zero_adding_hook_is_identity(self, tiny_backbone):
        feats = tiny_backbone.extract_features(make_views(2))
        plain = tiny_backbone.aggregate(feats)
        hooked = tiny_backbone.aggregate(feats, injection_hook=lambda l, t: t + torch.zeros_like(t))
        for l in plain.tokens:
            assert torch.equal(plain.tokens[l], hooked.tokens[l])

    def test_constant_hook_at_layer0_changes_every_retained_layer(self, tiny_backbone):
        feats = tiny_backbone.extract_features(make_views(2))
        plain = tiny_backbone.aggregate(feats)
        hooked = tiny_backbone.aggregate(
            feats, injection_hook=lambda l, t: t + 0.5 if l == 0 else t)
        for l in plain.tokens:
            assert float((plain.tokens[l] - hooked.tokens[l]).detach().abs().max()) > 0

    def test_shape_changing_hook_rejected(self, tiny_backbone):
        feats = tiny_backbone.extract_features(make_views(2))
        with pytest.raises(ValueError, match="shape"):
            tiny_backbone.aggregate(feats, injection_hook=lambda l, t: t[:, :1, :])

    def test_local_layers_do_not_mix_views_but_global_do(self, tiny_backbone):
        # schedule = local, global, local, global
        views = make_views(2, seed=3)
        feats = tiny_backbone.extract_features(views)
        zeroed = feats.tokens.clone()
        zeroed[1] = 0.0
        from splatstyle.backbone.network import PatchFeatures
        feats_zeroed = PatchFeatures(tokens=zeroed, grid=feats.grid, patch_size=feats.patch_size)
        full = tiny_backbone.aggregate(feats, keep_all_layers=True)
        part = tiny_backbone.aggregate(feats_zeroed, keep_all_layers=True)
        # after the first (local) layer view 0 is untouched by view 1's features
        assert torch.allclose(full.tokens[0][0], part.tokens[0][0], atol=1e-6)
        # after the second (global) layer view 0 has mixed in view 1
        assert float((full.tokens[1][0] - part.tokens[1][0]).detach().abs().max()) > 1e-4


class TestHeads:
    def test_scene_count_and_invariants(self, tiny_backbone):
        views = make_views(2)
        cams = ring_cameras(2, radius=4.0, width=16, height=16)
        feats = tiny_backbone.extract_features(views)
        agg = tiny_backbone.aggregate(feats)
        points, conf = tiny_backbone.depth_head(agg, cams)
        scene = tiny_backbone.gaussian_head(agg, points, conf)
        assert len(scene) == 2 * 16 * 16
        assert validate_scene(scene) == []

    @given(st.integers(min_value=0, max_value=500))
    @settings(max_examples=15, deadline=None)
    def test_gaussian_head_invariants_random_weights(self, seed):
        cfg = BackboneConfig(num_layers=2, token_dim=16, patch_size=8, image_size=8,
                             retained_layers=(0,), num_heads=2, seed=seed)
        bb = Backbone(cfg)
        views = make_views(2, size=8, seed=seed)
        cams = ring_cameras(2, radius=4.0, width=8, height=8)
        agg = bb.aggregate(bb.extract_features(views))
        points, conf = bb.depth_head(agg, cams)
        scene = bb.gaussian_head(agg, points, conf)
        assert validate_scene(scene) == []

    def test_zero_tokens_give_uniform_bias_output(self, tiny_backbone):
        from splatstyle.backbone.network import AggregatorOutput
        zero = {l: torch.zeros(1, 4, 32) for l in TINY.head_layers}
        agg = AggregatorOutput(tokens=zero, retained_layers=TINY.head_layers,
                               final_layer=TINY.final_layer, grid=(2, 2))
        cams = ring_cameras(1, radius=4.0, width=16, height=16)
        points, conf = tiny_backbone.depth_head(agg, cams)
        scene = tiny_backbone.gaussian_head(agg, points, conf)
        assert torch.allclose(scene.rotations, scene.rotations[0].expand_as(scene.rotations))
        assert torch.allclose(scene.opacities, scene.opacities[0].expand_as(scene.opacities))
        assert torch.allclose(scene.sh_coeffs, scene.sh_coeffs[0].expand_as(scene.sh_coeffs))

    def test_depth_head_identity_pose_principal_point(self, tiny_backbone):
        # constant depth at the principal point unprojects to (0, 0, depth)
        from splatstyle.core import CameraModel
        cam = CameraModel(fx=20.0, fy=20.0, cx=7.0, cy=7.0,
                          world_to_camera=torch.eye(4), width=16, height=16)
        uv = torch.tensor([[7.0, 7.0]])
        pt = cam.unproject(uv, torch.tensor([2.0]))
        assert torch.allclose(pt, torch.tensor([[0.0, 0.0, 2.0]]), atol=1e-6)

    def test_depth_unproject_project_round_trip(self, tiny_backbone):
        views = make_views(2)
        cams = ring_cameras(2, radius=4.0, width=16, height=16)
        with torch.no_grad():
            agg = tiny_backbone.aggregate(tiny_backbone.extract_features(views))
            points, _ = tiny_backbone.depth_head(agg, cams)
        for i, cam in enumerate(cams):
            vv, uu = torch.meshgrid(torch.arange(16.0), torch.arange(16.0), indexing="ij")
            uv = torch.stack([uu.reshape(-1), vv.reshape(-1)], dim=-1)
            uv2, z = cam.project(points[i].reshape(-1, 3))
            assert float((uv - uv2).abs().max()) < 1e-4
            assert bool((z > 0).all())

    def test_two_poses_related_by_relative_transform(self):
        # identical depth maps under two poses give points differing by the
        # relative transform
        from splatstyle.core import CameraModel
        w2c_a = torch.eye(4)
        w2c_b = torch.eye(4)
        w2c_b[0, 3] = 1.0  # camera B shifted one unit along x
        cam_a = CameraModel(fx=20, fy=20, cx=7.5, cy=7.5, world_to_camera=w2c_a, width=16, height=16)
        cam_b = CameraModel(fx=20, fy=20, cx=7.5, cy=7.5, world_to_camera=w2c_b, width=16, height=16)
        uv = torch.rand(20, 2) * 15
        depth = 2.0 + torch.rand(20)
        pa = cam_a.unproject(uv, depth)
        pb = cam_b.unproject(uv, depth)
        rel = w2c_b.inverse() @ w2c_a  # maps cam-A-frame world to cam-B-frame world
        pa_in_b = pa @ rel[:3, :3].T + rel[:3, 3]
        assert torch.allclose(pa_in_b, pb, atol=1e-5)

    def test_camera_head_orthonormal_and_deterministic(self):
        for seed in (0, 1, 2, 3, 4):
            cfg = BackboneConfig(num_layers=2, token_dim=16, patch_size=8, image_size=8,
                                 retained_layers=(0,), num_heads=2, seed=seed)
            bb = Backbone(cfg)
            agg = bb.aggregate(bb.extract_features(make_views(2, 8, seed)))
            cams = bb.camera_head(agg)
            assert len(cams) == 2
            for cam in cams:
                r = cam.world_to_camera[:3, :3]
                assert float((r @ r.T - torch.eye(3)).abs().max()) < 1e-5
            again = bb.camera_head(agg)
            for c1, c2 in zip(cams, again):
                assert torch.equal(c1.world_to_camera, c2.world_to_camera)

    def test_gt_camera_bypass(self, tiny_backbone):
        views = make_views(2)
        cams = ring_cameras(2, radius=4.0, width=16, height=16)
        agg = tiny_backbone.aggregate(tiny_backbone.extract_features(views))
        assert tiny_backbone.cameras_for(agg, cams) is cams


class TestVoxelMerge:
    def test_identity_when_voxels_tiny(self):
        scene = random_scene(20, seed=3)
        merged = voxel_merge(scene, voxel_size=1e-4)
        assert len(merged) == len(scene)
        assert torch.allclose(merged.means, scene.means)
        assert torch.allclose(merged.opacities, scene.opacities)

    def test_two_identical_gaussians_collapse_to_one(self):
        one = random_scene(1, seed=5)
        scene = GaussianScene(
            means=one.means.repeat(2, 1), rotations=one.rotations.repeat(2, 1),
            scales=one.scales.repeat(2, 1), opacities=one.opacities.repeat(2),
            sh_coeffs=one.sh_coeffs.repeat(2, 1, 1),
            confidence=torch.tensor([1.0, 1.0]))
        merged = voxel_merge(scene, voxel_size=10.0)
        assert len(merged) == 1
        assert torch.allclose(merged.means[0], one.means[0], atol=1e-6)
        assert torch.allclose(merged.scales[0], one.scales[0], atol=1e-6)

    def test_confidence_weighted_mean_hand_case(self):
        scene = GaussianScene(
            means=torch.tensor([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]),
            rotations=torch.tensor([[1.0, 0, 0, 0], [1.0, 0, 0, 0]]),
            scales=torch.ones(2, 3) * 0.2,
            opacities=torch.tensor([0.4, 0.8]),
            sh_coeffs=torch.zeros(2, 1, 3),
            confidence=torch.tensor([1.0, 3.0]))
        merged = voxel_merge(scene, voxel_size=2.0)
        assert len(merged) == 1
        assert torch.allclose(merged.means[0], torch.tensor([0.75, 0.0, 0.0]))
        assert abs(float(merged.opacities[0]) - (0.4 * 1 + 0.8 * 3) / 4) < 1e-6
        assert float(merged.confidence[0]) == 4.0

    def test_zero_confidence_bucket_falls_back_to_unweighted(self):
        scene = GaussianScene(
            means=torch.tensor([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]),
            rotations=torch.tensor([[1.0, 0, 0, 0], [1.0, 0, 0, 0]]),
            scales=torch.ones(2, 3) * 0.2,
            opacities=torch.tensor([0.4, 0.8]),
            sh_coeffs=torch.zeros(2, 1, 3),
            confidence=torch.tensor([0.0, 0.0]))
        merged = voxel_merge(scene, voxel_size=2.0)
        assert torch.allclose(merged.means[0], torch.tensor([0.5, 0.0, 0.0]))

    def test_quaternion_sign_alignment(self):
        q = torch.tensor([0.5, 0.5, 0.5, 0.5])
        scene = GaussianScene(
            means=torch.zeros(2, 3),
            rotations=torch.stack([q, -q]),
            scales=torch.ones(2, 3) * 0.2,
            opacities=torch.tensor([0.5, 0.5]),
            sh_coeffs=torch.zeros(2, 1, 3),
            confidence=torch.tensor([2.0, 1.0]))
        merged = voxel_merge(scene, voxel_size=1.0)
        # -q flipped to q before averaging -> mean is q itself
        assert torch.allclose(merged.rotations[0], q, atol=1e-6)

    @given(st.integers(min_value=0, max_value=1000),
           st.floats(min_value=0.1, max_value=2.0))
    @settings(max_examples=25, deadline=None)
    def test_idempotent(self, seed, voxel_size):
        scene = random_scene(40, seed=seed)
        once = voxel_merge(scene, voxel_size)
        twice = voxel_merge(once, voxel_size)
        assert len(once) == len(twice)
        assert torch.allclose(once.means, twice.means, atol=1e-5)
        assert torch.allclose(once.opacities, twice.opacities, atol=1e-6)
        assert torch.allclose(once.confidence, twice.confidence, atol=1e-5)

    def test_count_never_increases(self):
        scene = random_scene(60, seed=9)
        merged = voxel_merge(scene, voxel_size=0.5)
        assert len(merged) <= len(scene)
        assert validate_scene(merged) == []
