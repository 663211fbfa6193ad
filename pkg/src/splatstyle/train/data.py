"""Desk-scale datasets: synthetic multi-view scenes and a style library.

A synthetic scene is a handful of colored Gaussian blobs rendered from a
ring of cameras; each scene directory stores the rendered PNGs, the camera
parameters, the ground-truth Gaussian scene and per-view depth/alpha maps.
Everything is a pure function of the seed, and re-renders from the stored
ground truth reproduce the stored images exactly.

The style library mirrors a captioned-artwork setup: ``styles/images/*.png``
plus ``styles/captions.jsonl`` records ``{"image": ..., "caption": ...}``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import torch

from ..core.cameras import CameraModel, ring_cameras
from ..core.checkpoint import load_fields, load_scene, save_fields, save_scene
from ..core.gaussians import SH_C0, GaussianScene
from ..core.images import load_png, save_png
from ..renderer import render


def _random_gt_scene(seed: int, n_objects: int) -> GaussianScene:
    """A fat colored core plus smaller satellite blobs.

    The core keeps most of the frame covered from every ring camera, so
    photometric fitting cannot collapse to painting the background color.
    """
    gen = torch.Generator().manual_seed(seed)
    n = n_objects + 1
    means = (torch.rand(n, 3, generator=gen) * 2 - 1) * 0.9
    means[0] *= 0.1
    quats = torch.randn(n, 4, generator=gen)
    quats = quats / quats.norm(dim=-1, keepdim=True)
    scales = 0.25 + 0.3 * torch.rand(n, 3, generator=gen)
    scales[0] = 0.7 + 0.3 * torch.rand(3, generator=gen)
    opac = 0.7 + 0.28 * torch.rand(n, generator=gen)
    opac[0] = 0.95
    colors = 0.1 + 0.8 * torch.rand(n, 3, generator=gen)
    sh = ((colors - 0.5) / SH_C0).reshape(n, 1, 3)
    return GaussianScene(means=means, rotations=quats, scales=scales,
                         opacities=opac, sh_coeffs=sh,
                         confidence=torch.ones(n))


def save_cameras(path: Path, cams: list[CameraModel]) -> None:
    records = [{
        "fx": cam.fx, "fy": cam.fy, "cx": cam.cx, "cy": cam.cy,
        "width": cam.width, "height": cam.height,
        "world_to_camera": [[float(v) for v in row] for row in cam.world_to_camera],
    } for cam in cams]
    with open(path, "w") as fh:
        json.dump(records, fh, indent=2, sort_keys=True)


def load_cameras(path: Path) -> list[CameraModel]:
    with open(path) as fh:
        records = json.load(fh)
    return [CameraModel(fx=r["fx"], fy=r["fy"], cx=r["cx"], cy=r["cy"],
                        world_to_camera=torch.tensor(r["world_to_camera"], dtype=torch.float32),
                        width=r["width"], height=r["height"]) for r in records]


def make_synthetic_scene(out_dir: str | Path, seed: int = 0, n_objects: int = 10,
                         n_views: int = 4, image_size: int = 32,
                         camera_radius: float = 3.0) -> Path:
    """Write one fully deterministic scene directory; returns its path."""
    if n_views < 2:
        raise ValueError("a scene needs at least 2 views")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    scene = _random_gt_scene(seed, n_objects)
    cams = ring_cameras(n_views, radius=camera_radius, fx=1.1 * image_size,
                        width=image_size, height=image_size)
    depth_fields = {}
    for i, cam in enumerate(cams):
        out = render(scene, cam)
        save_png(out.color, out_dir / "images" / f"view_{i:03d}.png")
        depth_fields[f"depth_{i:03d}"] = out.depth
        depth_fields[f"alpha_{i:03d}"] = out.alpha
    save_cameras(out_dir / "cameras.json", cams)
    save_scene(out_dir / "gt_scene", scene)
    save_fields(out_dir / "depth", depth_fields, meta={"n_views": n_views})
    return out_dir


@dataclass
class SceneSample:
    name: str
    images: list[torch.Tensor]          # (H, W, 3) linear RGB
    cams: list[CameraModel]
    gt_depth: list[torch.Tensor] | None  # (H, W) per view
    gt_alpha: list[torch.Tensor] | None
    path: Path

    @property
    def n_views(self) -> int:
        return len(self.images)

    def gt_scene(self) -> GaussianScene:
        return load_scene(self.path / "gt_scene")


@dataclass
class SceneDataset:
    scenes: list[SceneSample]

    def __len__(self) -> int:
        return len(self.scenes)

    def __getitem__(self, i: int) -> SceneSample:
        return self.scenes[i]

    @staticmethod
    def load(root: str | Path) -> "SceneDataset":
        root = Path(root)
        dirs = sorted(p for p in root.iterdir() if (p / "cameras.json").exists())
        if not dirs:
            raise FileNotFoundError(f"no scene directories under {root}")
        samples = []
        for d in dirs:
            samples.append(load_scene_dir(d))
        return SceneDataset(samples)


def load_scene_dir(d: str | Path) -> SceneSample:
    d = Path(d)
    image_paths = sorted((d / "images").glob("view_*.png"))
    images = [load_png(p) for p in image_paths]
    if len(images) < 2:
        raise ValueError(f"scene {d} has {len(images)} views, need >= 2")
    sizes = {tuple(img.shape[:2]) for img in images}
    if len(sizes) != 1:
        raise ValueError(f"scene {d} mixes image sizes {sizes}")
    cams = load_cameras(d / "cameras.json")
    gt_depth = gt_alpha = None
    if (d / "depth" / "manifest.json").exists():
        fields, meta = load_fields(d / "depth")
        n = meta["n_views"]
        gt_depth = [fields[f"depth_{i:03d}"] for i in range(n)]
        gt_alpha = [fields[f"alpha_{i:03d}"] for i in range(n)]
    return SceneSample(name=d.name, images=images, cams=cams,
                       gt_depth=gt_depth, gt_alpha=gt_alpha, path=d)


def make_dataset(root: str | Path, n_scenes: int = 2, seed: int = 0, **scene_kwargs) -> Path:
    root = Path(root)
    for i in range(n_scenes):
        make_synthetic_scene(root / f"scene_{i:03d}", seed=seed + i, **scene_kwargs)
    return root


# ---------------------------------------------------------------------------
# style library

_PALETTES = [
    ("crimson", (0.75, 0.12, 0.18)),
    ("amber", (0.92, 0.62, 0.12)),
    ("emerald", (0.10, 0.62, 0.32)),
    ("azure", (0.10, 0.40, 0.85)),
    ("violet", (0.52, 0.20, 0.70)),
    ("slate", (0.35, 0.42, 0.50)),
    ("rose", (0.90, 0.45, 0.60)),
    ("ochre", (0.72, 0.52, 0.18)),
]

_TEXTURES = ["waves", "stripes", "speckle", "gradient"]


def _style_image(seed: int, size: int, base: tuple[float, float, float],
                 texture: str) -> torch.Tensor:
    gen = torch.Generator().manual_seed(seed)
    ys, xs = torch.meshgrid(torch.linspace(0, 1, size), torch.linspace(0, 1, size),
                            indexing="ij")
    base_t = torch.tensor(base)
    if texture == "waves":
        pattern = 0.5 + 0.5 * torch.sin(2 * math.pi * (3 * xs + 1.5 * ys))
    elif texture == "stripes":
        pattern = ((xs * 6).floor() % 2)
    elif texture == "speckle":
        pattern = torch.rand(size, size, generator=gen)
    else:
        pattern = 0.5 * (xs + ys)
    img = base_t[None, None, :] * (0.55 + 0.45 * pattern[..., None])
    noise = (torch.rand(size, size, 3, generator=gen) - 0.5) * 0.05
    return (img + noise).clamp(0.0, 1.0)


@dataclass
class StyleItem:
    image: torch.Tensor
    caption: str
    image_path: str  # relative path inside the library
    style_id: str


@dataclass
class StyleLibrary:
    items: list[StyleItem]

    def __len__(self) -> int:
        return len(self.items)

    def __getitem__(self, i: int) -> StyleItem:
        return self.items[i]

    def by_id(self, style_id: str) -> StyleItem:
        for item in self.items:
            if item.style_id == style_id:
                return item
        raise KeyError(f"unknown style id {style_id!r}; known: "
                       f"{[i.style_id for i in self.items]}")

    @staticmethod
    def load(root: str | Path) -> "StyleLibrary":
        root = Path(root)
        items = []
        with open(root / "captions.jsonl") as fh:
            for line in fh:
                rec = json.loads(line)
                img_path = root / rec["image"]
                items.append(StyleItem(image=load_png(img_path), caption=rec["caption"],
                                       image_path=rec["image"],
                                       style_id=Path(rec["image"]).stem))
        if not items:
            raise FileNotFoundError(f"style library {root} is empty")
        return StyleLibrary(items)


def make_style_library(root: str | Path, n_styles: int = 4, seed: int = 0,
                       size: int = 48) -> Path:
    root = Path(root)
    (root / "images").mkdir(parents=True, exist_ok=True)
    records = []
    for i in range(n_styles):
        palette_name, base = _PALETTES[(seed + i) % len(_PALETTES)]
        texture = _TEXTURES[(seed + i) % len(_TEXTURES)]
        img = _style_image(seed + i, size, base, texture)
        rel = f"images/style_{i:03d}.png"
        save_png(img, root / rel)
        records.append({"image": rel, "caption": f"rich {palette_name} {texture}"})
    with open(root / "captions.jsonl", "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    return root
