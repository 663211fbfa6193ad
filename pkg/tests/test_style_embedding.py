import math

import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from splatstyle.style import (
    StyleEmbedding,
    StyleSignal,
    ToyStyleProvider,
    embed,
    interpolate,
    neutral_embedding,
)


@pytest.fixture(scope="module")
def provider():
    return ToyStyleProvider(dim=64, seed=0)


def text_emb(provider, text):
    return embed(StyleSignal(text=text), provider)


class TestEmbed:
    def test_text_deterministic(self, provider):
        a = text_emb(provider, "oil painting with bold strokes")
        b = text_emb(provider, "oil painting with bold strokes")
        assert torch.equal(a.vec, b.vec)
        assert a.modality == "text"

    def test_unit_norm(self, provider):
        for text in ("watercolor", "neon cyberpunk night", "a"):
            e = text_emb(provider, text)
            assert abs(float(e.vec.norm()) - 1.0) < 1e-5
        img = torch.rand(24, 24, 3, generator=torch.Generator().manual_seed(1))
        e = embed(StyleSignal(image=img), provider)
        assert abs(float(e.vec.norm()) - 1.0) < 1e-5
        assert e.modality == "image"

    def test_different_texts_not_collinear(self, provider):
        a = text_emb(provider, "impressionist landscape")
        b = text_emb(provider, "charcoal sketch")
        assert float(torch.dot(a.vec, b.vec)) < 1.0 - 1e-6

    def test_empty_text_rejected(self, provider):
        with pytest.raises(ValueError, match="empty"):
            text_emb(provider, "   ")

    def test_signal_requires_exactly_one_payload(self):
        with pytest.raises(ValueError):
            StyleSignal()
        with pytest.raises(ValueError):
            StyleSignal(text="x", image=torch.rand(4, 4, 3))

    def test_image_path_is_differentiable(self, provider):
        img = torch.rand(16, 16, 3, generator=torch.Generator().manual_seed(2),
                         dtype=torch.float64).requires_grad_(True)
        e = embed(StyleSignal(image=img), provider)
        e.vec.sum().backward()
        assert float(img.grad.abs().max()) > 0

    def test_image_gradient_matches_finite_differences(self, provider):
        gen = torch.Generator().manual_seed(3)
        img = torch.rand(8, 8, 3, generator=gen, dtype=torch.float64)
        probe = torch.randn(64, generator=gen, dtype=torch.float64)

        def f(x):
            return float(torch.dot(embed(StyleSignal(image=x), provider).vec, probe))

        live = img.clone().requires_grad_(True)
        loss = torch.dot(embed(StyleSignal(image=live), provider).vec, probe)
        loss.backward()
        step = 1e-5
        for idx in [(0, 0, 0), (3, 4, 1), (7, 7, 2)]:
            hi = img.clone(); hi[idx] += step
            lo = img.clone(); lo[idx] -= step
            fd = (f(hi) - f(lo)) / (2 * step)
            assert abs(fd - float(live.grad[idx])) < 1e-4


class TestInterpolate:
    def test_endpoints_exact(self, provider):
        a = text_emb(provider, "mosaic")
        b = text_emb(provider, "stained glass")
        assert interpolate(a, b, 0.0) is a
        assert interpolate(a, b, 1.0) is b

    def test_orthogonal_midpoint(self, provider):
        va = torch.zeros(64); va[0] = 1.0
        vb = torch.zeros(64); vb[1] = 1.0
        a = StyleEmbedding(vec=va, modality="text", provider_id=provider.provider_id)
        b = StyleEmbedding(vec=vb, modality="text", provider_id=provider.provider_id)
        mid = interpolate(a, b, 0.5)
        assert torch.allclose(mid.vec, (va + vb) / math.sqrt(2.0), atol=1e-6)
        assert mid.modality == "mixed"

    def test_degenerate_same_input(self, provider):
        a = text_emb(provider, "fresco")
        same = StyleEmbedding(vec=a.vec.clone(), modality="text", provider_id=a.provider_id)
        out = interpolate(a, same, 0.37)
        assert torch.allclose(out.vec, a.vec)
        assert out.modality == "text"

    def test_antipodal_rejected(self, provider):
        va = torch.zeros(64); va[0] = 1.0
        a = StyleEmbedding(vec=va, modality="text", provider_id=provider.provider_id)
        b = StyleEmbedding(vec=-va, modality="text", provider_id=provider.provider_id)
        with pytest.raises(ValueError, match="antipodal"):
            interpolate(a, b, 0.5)

    def test_unit_norm_over_alpha_sweep(self, provider):
        a = text_emb(provider, "pointillism")
        b = embed(StyleSignal(image=torch.rand(16, 16, 3,
                  generator=torch.Generator().manual_seed(4))), provider)
        for i in range(100):
            alpha = i / 99.0
            out = interpolate(a, b, alpha)
            assert abs(float(out.vec.norm()) - 1.0) < 1e-5

    def test_angle_to_a_monotone_in_alpha(self, provider):
        a = text_emb(provider, "ukiyo-e woodblock")
        b = text_emb(provider, "brutalist concrete photography")
        prev = -1.0
        for i in range(21):
            alpha = i / 20.0
            ang = math.acos(max(-1.0, min(1.0, float(torch.dot(
                interpolate(a, b, alpha).vec, a.vec)))))
            assert ang >= prev - 1e-6
            prev = ang

    def test_provider_mismatch_rejected(self, provider):
        other = ToyStyleProvider(dim=64, seed=9)
        a = text_emb(provider, "x")
        b = text_emb(other, "x")
        with pytest.raises(ValueError, match="provider"):
            interpolate(a, b, 0.5)


class TestNeutral:
    def test_matches_photo_prompt(self, provider):
        assert torch.equal(neutral_embedding(provider).vec, text_emb(provider, "Photo").vec)

    def test_cached(self, provider):
        assert neutral_embedding(provider) is neutral_embedding(provider)

    def test_differs_from_painting(self, provider):
        n = neutral_embedding(provider)
        p = text_emb(provider, "Painting")
        assert float((n.vec - p.vec).abs().max()) > 1e-3


@given(st.text(alphabet="abcdefgh ", min_size=1, max_size=30).filter(lambda s: s.strip()))
@settings(max_examples=30, deadline=None)
def test_embed_always_unit_norm(text):
    provider = ToyStyleProvider(dim=32, seed=5)
    e = embed(StyleSignal(text=text), provider)
    assert abs(float(e.vec.norm()) - 1.0) < 1e-5


def test_provider_swap_changes_values_not_shapes_or_invariants():
    signal = StyleSignal(text="rich crimson waves")
    img_signal = StyleSignal(image=torch.rand(12, 12, 3,
                             generator=torch.Generator().manual_seed(9)))
    a = ToyStyleProvider(dim=64, seed=0)
    b = ToyStyleProvider(dim=64, seed=7)
    for sig in (signal, img_signal):
        ea, eb = embed(sig, a), embed(sig, b)
        assert ea.vec.shape == eb.vec.shape
        assert abs(float(eb.vec.norm()) - 1.0) < 1e-5
        assert ea.modality == eb.modality
        assert float((ea.vec - eb.vec).abs().max()) > 1e-4  # values differ
        assert ea.provider_id != eb.provider_id
