"""Command-line entry points.

Subcommands map one-to-one onto the library: make-data builds synthetic
scenes and a style library, train runs either training phase off a YAML
config, reconstruct/stylize drive a saved model, eval-consistency scores a
rendered camera path, serve starts the HTTP service.
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click
import torch

from ..backbone.network import Backbone
from ..core.checkpoint import load_fields, load_scene, save_scene
from ..core.images import save_png
from ..eval.consistency import consistency_metric
from ..model import DualBranchModel, load_model, render_views, save_model
from ..renderer import render
from ..style.embedding import StyleSignal, ToyStyleProvider, embed, interpolate
from ..style.injector import default_agg_sites, default_head_sites, make_plan
from ..train.config import load_train_job
from ..train.data import (
    StyleLibrary,
    load_cameras,
    load_scene_dir,
    make_dataset,
    make_style_library,
)
from ..train.trainer import pretrain_geometry, train_style
from ..train.data import SceneDataset


def _provider_for(model: DualBranchModel, seed: int = 0) -> ToyStyleProvider:
    style_dim = next(iter(model.plan.injectors.values())).style_dim
    return ToyStyleProvider(dim=style_dim, seed=seed)


@click.group()
def main():
    """Feed-forward splat reconstruction with text/image stylization."""


@main.command("make-data")
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--n-scenes", default=2, show_default=True)
@click.option("--n-views", default=4, show_default=True)
@click.option("--n-objects", default=10, show_default=True)
@click.option("--image-size", default=32, show_default=True)
@click.option("--n-styles", default=4, show_default=True)
@click.option("--style-size", default=48, show_default=True)
@click.option("--seed", default=0, show_default=True)
def make_data(out, n_scenes, n_views, n_objects, image_size, n_styles, style_size, seed):
    """Generate synthetic scenes plus a captioned style library."""
    scenes = make_dataset(out / "scenes", n_scenes=n_scenes, seed=seed,
                          n_objects=n_objects, n_views=n_views, image_size=image_size)
    styles = make_style_library(out / "styles", n_styles=n_styles, seed=seed,
                                size=style_size)
    click.echo(f"wrote {n_scenes} scenes under {scenes}")
    click.echo(f"wrote {n_styles} styles under {styles}")


@main.command("train")
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path),
              required=True)
def train(config_path):
    """Run a pretrain or style job from a YAML config."""
    job = load_train_job(config_path)
    scenes = SceneDataset.load(job.scenes_dir)
    job.out_dir.mkdir(parents=True, exist_ok=True)

    if job.mode == "pretrain":
        if job.backbone is None:
            raise click.ClickException("pretrain mode needs a backbone section")
        backbone = Backbone(job.backbone)
        metrics = pretrain_geometry(backbone, scenes, job.pretrain,
                                    out_dir=job.out_dir / "backbone")
        with open(job.out_dir / "pretrain_metrics.jsonl", "w") as fh:
            for rec in metrics:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
        first, last = metrics[0], metrics[-1]
        click.echo(f"pretrained {job.pretrain.steps} steps: photometric "
                   f"{first['photometric']:.4f} -> {last['photometric']:.4f}")
        click.echo(f"checkpoint: {job.out_dir / 'backbone'}")
        return

    if job.backbone_checkpoint is None:
        raise click.ClickException("style mode needs model.backbone_checkpoint")
    fields, meta = load_fields(job.backbone_checkpoint)
    if job.backbone is None:
        raise click.ClickException("style mode needs the backbone section matching "
                                   "the checkpoint")
    backbone = Backbone(job.backbone)
    backbone.load_state_dict(fields)
    head_sites = job.head_sites or default_head_sites(job.backbone)
    agg_sites = job.agg_sites if job.agg_sites is not None else (
        default_agg_sites(job.backbone) if job.variant == "full" else ())
    plan = make_plan(job.backbone, head_sites, agg_sites, style_dim=job.style_dim,
                     seed=job.seed)
    model = DualBranchModel(backbone, plan, variant=job.variant)
    styles = StyleLibrary.load(job.styles_dir)
    provider = ToyStyleProvider(dim=job.style_dim, seed=0)
    result = train_style(model, scenes, styles, provider, job.style, out_dir=job.out_dir)
    if result.halted_at is not None:
        raise click.ClickException(f"training halted at step {result.halted_at} "
                                   f"(non-finite loss); last good checkpoint kept")
    click.echo(f"trained {len(result.metrics)} steps; checkpoint: {result.checkpoint_dir}")


@main.command("reconstruct")
@click.option("--checkpoint", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--scene", "scene_dir", type=click.Path(exists=True, path_type=Path),
              required=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def reconstruct(checkpoint, scene_dir, out):
    """Frozen-branch reconstruction of a scene directory."""
    model = load_model(checkpoint)
    sample = load_scene_dir(scene_dir)
    t0 = time.perf_counter()
    cache = model.reconstruct(sample.images, sample.cams)
    elapsed = time.perf_counter() - t0
    out.mkdir(parents=True, exist_ok=True)
    save_scene(out / "frozen_scene", cache.frozen_scene)
    with torch.no_grad():
        for i, cam in enumerate(cache.cams):
            save_png(render(cache.frozen_scene, cam).color,
                     out / "renders" / f"view_{i:03d}.png")
    manifest = {"scene_id": cache.key, "source": str(scene_dir),
                "n_views": len(cache.cams), "reconstruct_s": elapsed,
                "n_gaussians": len(cache.frozen_scene)}
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    click.echo(f"scene {cache.key}: {len(cache.frozen_scene)} gaussians in {elapsed:.2f}s")


def _style_embedding(provider, text, image_path, what):
    if (text is None) == (image_path is None):
        raise click.ClickException(
            f"{what}: provide exactly one of --{what}-text or --{what}-image")
    if text is not None:
        return embed(StyleSignal(text=text), provider)
    from ..core.images import load_png
    return embed(StyleSignal(image=load_png(image_path)), provider)


@main.command("stylize")
@click.option("--checkpoint", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--scene", "scene_dir", type=click.Path(exists=True, path_type=Path),
              required=True)
@click.option("--style-text", default=None)
@click.option("--style-image", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--style-b-text", default=None)
@click.option("--style-b-image", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--alpha", type=float, default=None,
              help="Interpolation weight toward style B.")
@click.option("--views", "views_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="Camera file for novel views (cameras.json format).")
@click.option("--voxel-size", type=float, default=None)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def stylize(checkpoint, scene_dir, style_text, style_image, style_b_text, style_b_image,
            alpha, views_path, voxel_size, out):
    """Stylize a reconstructed scene and write PNG renders plus a manifest."""
    model = load_model(checkpoint)
    provider = _provider_for(model)
    z = _style_embedding(provider, style_text, style_image, "style")
    has_b = style_b_text is not None or style_b_image is not None
    if has_b:
        if alpha is None:
            raise click.ClickException("--alpha is required with a second style")
        zb = _style_embedding(provider, style_b_text, style_b_image, "style-b")
        z = interpolate(z, zb, alpha)
    elif alpha is not None:
        raise click.ClickException("--alpha given without a second style")

    sample = load_scene_dir(scene_dir)
    t0 = time.perf_counter()
    cache = model.reconstruct(sample.images, sample.cams)
    reconstruct_s = time.perf_counter() - t0
    t1 = time.perf_counter()
    with torch.no_grad():
        scene = model.stylize(cache, z)
    stylize_s = time.perf_counter() - t1
    cams = load_cameras(views_path) if views_path else cache.cams
    out.mkdir(parents=True, exist_ok=True)
    files = []
    with torch.no_grad():
        for i, cam in enumerate(cams):
            path = out / f"view_{i:03d}.png"
            save_png(render_views(scene, [cam], voxel_size=voxel_size)[0].color, path)
            files.append(path.name)
    manifest = {
        "scene": str(scene_dir), "checkpoint": str(checkpoint),
        "style_text": style_text, "style_image": str(style_image) if style_image else None,
        "style_b_text": style_b_text,
        "style_b_image": str(style_b_image) if style_b_image else None,
        "alpha": alpha, "views": str(views_path) if views_path else None,
        "outputs": files,
        "timings": {"reconstruct_s": reconstruct_s, "stylize_s": stylize_s},
    }
    with open(out / "run_manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    click.echo(f"wrote {len(files)} renders to {out}")


@main.command("eval-consistency")
@click.option("--scene", "scene_ckpt", type=click.Path(exists=True, path_type=Path),
              required=True, help="GaussianScene checkpoint directory.")
@click.option("--path", "path_file", type=click.Path(exists=True, path_type=Path),
              required=True, help="Camera path (cameras.json format).")
@click.option("--short-gap", default=1, show_default=True)
@click.option("--long-gap", default=7, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def eval_consistency(scene_ckpt, path_file, short_gap, long_gap, out):
    """Masked-RMSE consistency of a scene rendered along a camera path."""
    scene = load_scene(scene_ckpt)
    cams = load_cameras(path_file)
    renders = [render(scene, cam) for cam in cams]
    report = consistency_metric(renders, cams, short_gap=short_gap, long_gap=long_gap)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
    click.echo(f"short-range RMSE: {report.short_range}")
    click.echo(f"long-range RMSE: {report.long_range}")
    click.echo(f"report: {out}")


@main.command("serve")
@click.option("--checkpoint", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--styles-dir", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--voxel-size", type=float, default=None)
@click.option("--frontend-dir", type=click.Path(exists=True, path_type=Path), default=None,
              help="Static viewer files to serve at / (e.g. frontend/public).")
def serve(checkpoint, styles_dir, port, host, voxel_size, frontend_dir):
    """Start the interactive stylization HTTP service."""
    import uvicorn

    from .app import create_app

    model = load_model(checkpoint)
    styles = StyleLibrary.load(styles_dir) if styles_dir else None
    provider = _provider_for(model)
    app = create_app(model, styles, provider, voxel_size=voxel_size)
    if frontend_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=frontend_dir, html=True), name="viewer")
    click.echo(f"serving on http://{host}:{port}")
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
