#!/usr/bin/env python3
"""Render an alpha sweep between two styles from a trained model checkpoint.

Usage:
    python scripts/interpolation_sweep.py --checkpoint runs/toy_pipeline/model \
        --scene runs/toy_pipeline/scenes/scene_000 \
        --style-a "rich crimson waves" --style-b "rich azure gradient" \
        --steps 21 --out runs/sweep
"""

import argparse
from pathlib import Path

import torch

from splatstyle.core.images import save_png
from splatstyle.model import load_model, render_views
from splatstyle.style import StyleSignal, ToyStyleProvider, embed, interpolate
from splatstyle.train.data import load_scene_dir


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--checkpoint", type=Path, required=True)
    ap.add_argument("--scene", type=Path, required=True)
    ap.add_argument("--style-a", required=True)
    ap.add_argument("--style-b", required=True)
    ap.add_argument("--steps", type=int, default=21)
    ap.add_argument("--view", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("runs/sweep"))
    args = ap.parse_args()

    model = load_model(args.checkpoint)
    style_dim = next(iter(model.plan.injectors.values())).style_dim
    provider = ToyStyleProvider(dim=style_dim, seed=0)
    za = embed(StyleSignal(text=args.style_a), provider)
    zb = embed(StyleSignal(text=args.style_b), provider)

    sample = load_scene_dir(args.scene)
    cache = model.reconstruct(sample.images, sample.cams)
    args.out.mkdir(parents=True, exist_ok=True)
    prev = None
    with torch.no_grad():
        for i in range(args.steps):
            alpha = i / (args.steps - 1)
            scene = model.stylize(cache, interpolate(za, zb, alpha))
            img = render_views(scene, [cache.cams[args.view]])[0].color
            save_png(img, args.out / f"alpha_{alpha:.2f}.png")
            if prev is not None:
                jump = float((img - prev).abs().max())
                print(f"alpha={alpha:.2f} max per-pixel jump from previous: {jump:.4f}")
            prev = img
    print(f"wrote {args.steps} frames to {args.out}")


if __name__ == "__main__":
    main()
