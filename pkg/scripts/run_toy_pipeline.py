#!/usr/bin/env python3
"""End-to-end toy pipeline: data -> pretrain -> style training -> stylized renders.

Writes everything under --out (default runs/toy_pipeline) and prints the loss
trajectory. Finishes in a couple of minutes on CPU.
"""

import argparse
import json
from pathlib import Path

import torch

from splatstyle.backbone import Backbone, BackboneConfig
from splatstyle.model import DualBranchModel, render_views, save_model
from splatstyle.core.images import save_png
from splatstyle.style import (
    StyleSignal,
    ToyStyleProvider,
    default_agg_sites,
    default_head_sites,
    embed,
    make_plan,
)
from splatstyle.train import (
    PretrainConfig,
    SceneDataset,
    StyleLibrary,
    TrainConfig,
    make_dataset,
    make_style_library,
    pretrain_geometry,
    train_style,
)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=Path("runs/toy_pipeline"))
    ap.add_argument("--image-size", type=int, default=16)
    ap.add_argument("--pretrain-steps", type=int, default=200)
    ap.add_argument("--style-steps", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    print("== synthetic data ==")
    scenes_dir = make_dataset(args.out / "scenes", n_scenes=2, seed=args.seed,
                              n_objects=8, n_views=4, image_size=args.image_size)
    styles_dir = make_style_library(args.out / "styles", n_styles=3, seed=args.seed)
    scenes = SceneDataset.load(scenes_dir)
    styles = StyleLibrary.load(styles_dir)
    print(f"{len(scenes)} scenes, {len(styles)} styles")

    print("== geometry pretraining ==")
    cfg = BackboneConfig(num_layers=4, token_dim=64, patch_size=4,
                         image_size=args.image_size, retained_layers=(1,),
                         num_heads=4, seed=args.seed)
    backbone = Backbone(cfg)
    metrics = pretrain_geometry(backbone, scenes,
                                PretrainConfig(steps=args.pretrain_steps, lr=2e-3,
                                               seed=args.seed),
                                out_dir=args.out / "backbone")
    print(f"photometric {metrics[0]['photometric']:.4f} -> {metrics[-1]['photometric']:.4f}")

    print("== style training ==")
    plan = make_plan(cfg, default_head_sites(cfg), default_agg_sites(cfg), style_dim=64)
    model = DualBranchModel(backbone, plan, variant="full")
    provider = ToyStyleProvider(dim=64, seed=0)
    result = train_style(model, scenes, styles, provider,
                         TrainConfig(steps=args.style_steps, lr=1e-2, n_patch=2,
                                     crop_size=12, seed=args.seed),
                         out_dir=args.out / "style_run")
    print(f"style loss {result.metrics[0]['style']:.4f} -> {result.metrics[-1]['style']:.4f}")
    save_model(args.out / "model", model)

    print("== stylized renders ==")
    sample = scenes[0]
    cache = model.reconstruct(sample.images, sample.cams)
    with torch.no_grad():
        for item in styles.items:
            scene = model.stylize(cache, embed(StyleSignal(image=item.image), provider))
            out = render_views(scene, cache.cams[:1])[0]
            path = args.out / "renders" / f"{item.style_id}.png"
            save_png(out.color, path)
            print(f"  {path}")
        frozen = render_views(cache.frozen_scene, cache.cams[:1])[0]
        save_png(frozen.color, args.out / "renders" / "frozen.png")
    print(f"done; model checkpoint at {args.out / 'model'}")


if __name__ == "__main__":
    main()
