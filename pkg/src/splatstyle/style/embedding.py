"""Multimodal style signals embedded into one shared unit-norm space.

A provider turns either a text prompt or an image into a d_s-dimensional
unit vector. The default provider is a deterministic toy stand-in for a
dual-encoder model: both modalities map into one shared feature space
(channel color statistics plus texture slots) before a frozen projection,
so text and image embeddings of the same style land near each other. The
image path is differentiable w.r.t. pixels because the directional losses
backpropagate through it. Real dual-encoder models can be plugged in behind
the same interface.
"""

from __future__ import annotations

import hashlib
import re
import threading
from dataclasses import dataclass

import torch
import torch.nn.functional as F

NEUTRAL_PROMPT = "Photo"
UNIT_NORM_TOL = 1e-5

# Color vocabulary anchoring text prompts to the image feature space, the
# desk-scale analog of the text-image alignment a real dual encoder learns.
COLOR_LEXICON: dict[str, tuple[float, float, float]] = {
    "red": (0.85, 0.10, 0.10), "green": (0.10, 0.70, 0.20), "blue": (0.15, 0.25, 0.85),
    "white": (0.95, 0.95, 0.95), "black": (0.05, 0.05, 0.05), "gray": (0.50, 0.50, 0.50),
    "grey": (0.50, 0.50, 0.50), "yellow": (0.90, 0.85, 0.15), "orange": (0.95, 0.55, 0.10),
    "purple": (0.55, 0.20, 0.70), "pink": (0.95, 0.55, 0.70), "brown": (0.55, 0.35, 0.15),
    "teal": (0.10, 0.55, 0.55), "navy": (0.10, 0.15, 0.45), "gold": (0.85, 0.70, 0.20),
    "crimson": (0.75, 0.12, 0.18), "amber": (0.92, 0.62, 0.12), "emerald": (0.10, 0.62, 0.32),
    "azure": (0.10, 0.40, 0.85), "violet": (0.52, 0.20, 0.70), "slate": (0.35, 0.42, 0.50),
    "rose": (0.90, 0.45, 0.60), "ochre": (0.72, 0.52, 0.18),
}


@dataclass(frozen=True)
class StyleSignal:
    """Exactly one of text or image."""

    text: str | None = None
    image: torch.Tensor | None = None  # (H, W, 3) in [0, 1]

    def __post_init__(self):
        if (self.text is None) == (self.image is None):
            raise ValueError("provide exactly one of text or image")

    @property
    def modality(self) -> str:
        return "text" if self.text is not None else "image"


@dataclass(frozen=True)
class StyleEmbedding:
    vec: torch.Tensor  # (d_s,), unit L2 norm
    modality: str      # text | image | mixed
    provider_id: str

    @property
    def dim(self) -> int:
        return self.vec.shape[0]


class ToyStyleProvider:
    """Deterministic frozen dual encoder over a shared feature space.

    Shared features (16 slots): RGB channel means (3), RGB channel stds (3),
    texture slots (10). Images fill all slots from pixels (stats directly,
    texture via a small frozen conv net); text fills the color slots from a
    lexicon of color words and hashes the remaining tokens into the texture
    slots. A frozen projection maps the feature space to d_s dimensions.
    """

    FEATURE_DIM = 16
    TEXTURE_SCALE = 0.3

    def __init__(self, dim: int = 64, seed: int = 0, vocab_size: int = 4096):
        self.dim = dim
        self.seed = seed
        self.vocab_size = vocab_size
        self.provider_id = f"toy-{dim}-{seed}"
        gen = torch.Generator().manual_seed(seed)
        self._proj = torch.randn(dim, self.FEATURE_DIM, generator=gen) / self.FEATURE_DIM ** 0.5
        self._conv1 = torch.randn(8, 3, 3, 3, generator=gen) * 0.4
        self._conv2 = torch.randn(8, 8, 3, 3, generator=gen) * 0.3
        self._tex_map = torch.randn(10, 8, generator=gen) / 8 ** 0.5
        self._token_table = torch.randn(vocab_size, 10, generator=gen)

    def _token_index(self, token: str) -> int:
        digest = hashlib.sha256(token.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "little") % self.vocab_size

    @staticmethod
    def _tokenize(text: str) -> list[str]:
        return [t for t in re.split(r"[^a-z0-9]+", text.lower()) if t]

    def embed_text(self, text: str) -> torch.Tensor:
        tokens = self._tokenize(text)
        if not tokens:
            raise ValueError("text style prompt is empty")
        colors = [COLOR_LEXICON[t] for t in tokens if t in COLOR_LEXICON]
        if colors:
            mean = torch.tensor(colors).mean(dim=0)
        else:
            mean = torch.full((3,), 0.5)
        std = torch.full((3,), 0.25)
        rest = [t for t in tokens if t not in COLOR_LEXICON]
        if rest:
            texture = torch.stack(
                [self._token_table[self._token_index(t)] for t in rest]).mean(dim=0)
        else:
            texture = torch.zeros(10)
        feats = torch.cat([mean, std, self.TEXTURE_SCALE * texture])
        return self._proj @ feats

    def embed_image(self, image: torch.Tensor) -> torch.Tensor:
        if image.ndim != 3 or image.shape[2] != 3:
            raise ValueError(f"expected (H, W, 3) image, got {tuple(image.shape)}")
        flat = image.reshape(-1, 3)
        mean = flat.mean(dim=0)
        std = torch.sqrt(((flat - mean) ** 2).mean(dim=0) + 1e-8)
        x = image.permute(2, 0, 1)[None]
        x = torch.tanh(F.conv2d(x, self._conv1.to(x.dtype), stride=2, padding=1))
        x = torch.tanh(F.conv2d(x, self._conv2.to(x.dtype), stride=2, padding=1))
        texture = self._tex_map.to(x.dtype) @ x.mean(dim=(2, 3))[0]
        feats = torch.cat([mean, std, self.TEXTURE_SCALE * texture])
        return self._proj.to(x.dtype) @ feats


def embed(signal: StyleSignal, provider) -> StyleEmbedding:
    if signal.modality == "text":
        raw = provider.embed_text(signal.text)
    else:
        raw = provider.embed_image(signal.image)
    vec = raw / raw.norm().clamp(min=1e-12)
    return StyleEmbedding(vec=vec, modality=signal.modality,
                          provider_id=provider.provider_id)


def interpolate(a: StyleEmbedding, b: StyleEmbedding, alpha: float) -> StyleEmbedding:
    """Spherical linear interpolation on the unit sphere."""
    if a.provider_id != b.provider_id:
        raise ValueError(f"cannot interpolate across providers "
                         f"{a.provider_id!r} and {b.provider_id!r}")
    if a.dim != b.dim:
        raise ValueError("embedding dims differ")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    if alpha == 0.0:
        return a
    if alpha == 1.0:
        return b

    cos = float(torch.dot(a.vec, b.vec).clamp(-1.0, 1.0))
    if cos < -1.0 + 1e-6:
        raise ValueError("antipodal embeddings have no unique interpolation path")
    if cos > 1.0 - 1e-9:
        # numerically identical directions: slerp degenerates to the input
        vec = a.vec
    else:
        omega = torch.acos(torch.tensor(cos, dtype=torch.float64))
        sin_omega = torch.sin(omega)
        wa = torch.sin((1.0 - alpha) * omega) / sin_omega
        wb = torch.sin(alpha * omega) / sin_omega
        vec = wa.to(a.vec.dtype) * a.vec + wb.to(a.vec.dtype) * b.vec
        vec = vec / vec.norm().clamp(min=1e-12)
    modality = a.modality if torch.equal(a.vec, b.vec) else "mixed"
    return StyleEmbedding(vec=vec, modality=modality, provider_id=a.provider_id)


_neutral_cache: dict[str, StyleEmbedding] = {}
_neutral_lock = threading.Lock()


def neutral_embedding(provider) -> StyleEmbedding:
    """Embedding of the universal neutral prompt, cached per provider."""
    key = provider.provider_id
    cached = _neutral_cache.get(key)
    if cached is not None:
        return cached
    with _neutral_lock:
        cached = _neutral_cache.get(key)
        if cached is None:
            cached = embed(StyleSignal(text=NEUTRAL_PROMPT), provider)
            _neutral_cache[key] = cached
    return cached
