"""Float RGB image tensors and 8-bit sRGB PNG import/export.

Renderer output is linear; PNG files store sRGB. ``save_png`` clips to
[0, 1] and applies the sRGB transfer before quantizing; ``load_png`` inverts
it, so training targets loaded from disk live in the same linear space as
renders.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
from PIL import Image


def validate_image(pixels: torch.Tensor) -> list[str]:
    problems = []
    if pixels.ndim != 3 or pixels.shape[2] != 3:
        problems.append(f"image has shape {tuple(pixels.shape)}, expected (H, W, 3)")
        return problems
    if not bool(torch.isfinite(pixels).all()):
        problems.append("image contains non-finite values")
    return problems


def srgb_encode(linear: torch.Tensor) -> torch.Tensor:
    linear = linear.clamp(0.0, 1.0)
    low = linear * 12.92
    high = 1.055 * linear.clamp(min=1e-8) ** (1.0 / 2.4) - 0.055
    return torch.where(linear <= 0.0031308, low, high)


def srgb_decode(encoded: torch.Tensor) -> torch.Tensor:
    encoded = encoded.clamp(0.0, 1.0)
    low = encoded / 12.92
    high = ((encoded + 0.055) / 1.055) ** 2.4
    return torch.where(encoded <= 0.04045, low, high)


def to_uint8(pixels: torch.Tensor, srgb: bool = True) -> np.ndarray:
    """Clip linear values to [0, 1], apply transfer, quantize round-half-up."""
    x = pixels.detach().clamp(0.0, 1.0)
    if srgb:
        x = srgb_encode(x)
    arr = x.cpu().numpy()
    return np.floor(arr * 255.0 + 0.5).astype(np.uint8)


def save_png(pixels: torch.Tensor, path: str | Path, srgb: bool = True) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(to_uint8(pixels, srgb=srgb), mode="RGB").save(path, format="PNG")


def encode_png(pixels: torch.Tensor, srgb: bool = True) -> bytes:
    import io

    buf = io.BytesIO()
    Image.fromarray(to_uint8(pixels, srgb=srgb), mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def load_png(path: str | Path, srgb: bool = True,
             dtype: torch.dtype = torch.float32) -> torch.Tensor:
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.float32) / 255.0
    pixels = torch.from_numpy(arr)
    if srgb:
        pixels = srgb_decode(pixels)
    return pixels.to(dtype)
