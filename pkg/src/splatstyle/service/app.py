"""HTTP service for interactive reconstruction and stylization.

Scenes are uploaded once, reconstructed by the frozen branch and cached
under a content-hash id; stylize requests then hit only the style branch.
Stylize jobs run through a single-worker queue (they are compute-bound);
rendered PNGs are stored under deterministic tokens, so identical requests
return byte-identical images.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from fastapi import FastAPI, File, HTTPException, UploadFile
from fastapi.responses import Response
from pydantic import BaseModel
from PIL import Image

from ..core.cameras import CameraModel
from ..core.images import encode_png, srgb_decode
from ..model import DualBranchModel, ReconstructionCache, render_views
from ..style.embedding import StyleEmbedding, StyleSignal, embed, interpolate
from ..train.data import StyleLibrary, load_cameras

CACHE_DIR_ENV = "SPLATSTYLE_CACHE_DIR"


@dataclass
class SceneHandle:
    scene_id: str
    cache: ReconstructionCache
    n_views: int
    created: float = field(default_factory=time.time)


class StyleSelector(BaseModel):
    style_text: str | None = None
    style_image_id: str | None = None


class StylizeRequest(BaseModel):
    style_text: str | None = None
    style_image_id: str | None = None
    second: StyleSelector | None = None
    alpha: float | None = None
    view_indices: list[int] | None = None


class ServiceState:
    def __init__(self, model: DualBranchModel | None, styles: StyleLibrary | None,
                 provider, cache_dir: Path, voxel_size: float | None = None):
        self.model = model
        self.styles = styles
        self.provider = provider
        self.cache_dir = cache_dir
        self.voxel_size = voxel_size
        self.scenes: dict[str, SceneHandle] = {}
        self.renders: dict[str, bytes] = {}
        self.scenes_lock = threading.Lock()
        self.work_queue = threading.Semaphore(1)  # stylize jobs are serialized

    def store_render(self, token: str, blob: bytes) -> None:
        self.renders[token] = blob
        path = self.cache_dir / "renders" / f"{token}.png"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(blob)

    def load_render(self, token: str) -> bytes | None:
        blob = self.renders.get(token)
        if blob is not None:
            return blob
        path = self.cache_dir / "renders" / f"{token}.png"
        if path.exists():
            return path.read_bytes()
        return None


def _embedding_for(state: ServiceState, sel_text: str | None, sel_image_id: str | None,
                   where: str) -> StyleEmbedding:
    if (sel_text is None) == (sel_image_id is None):
        raise HTTPException(400, f"{where}: provide exactly one of style_text or style_image_id")
    if sel_text is not None:
        if not sel_text.strip():
            raise HTTPException(400, f"{where}: style_text is empty")
        return embed(StyleSignal(text=sel_text), state.provider)
    if state.styles is None:
        raise HTTPException(404, "no style library loaded")
    try:
        item = state.styles.by_id(sel_image_id)
    except KeyError:
        raise HTTPException(404, f"unknown style id {sel_image_id!r}")
    return embed(StyleSignal(image=item.image), state.provider)


def create_app(model: DualBranchModel | None, styles: StyleLibrary | None, provider,
               cache_dir: str | Path | None = None,
               voxel_size: float | None = None) -> FastAPI:
    cache_dir = Path(cache_dir or os.environ.get(CACHE_DIR_ENV, ".splatstyle-cache"))
    cache_dir.mkdir(parents=True, exist_ok=True)
    state = ServiceState(model, styles, provider, cache_dir, voxel_size)
    app = FastAPI(title="splatstyle")
    app.state.service = state

    def require_model() -> DualBranchModel:
        if state.model is None:
            raise HTTPException(409, "model checkpoint not loaded")
        return state.model

    @app.post("/scenes")
    async def upload_scene(images: list[UploadFile] = File(...),
                           cameras: UploadFile | None = File(default=None)):
        mdl = require_model()
        tensors = []
        for up in sorted(images, key=lambda u: u.filename or ""):
            raw = await up.read()
            try:
                with Image.open(io.BytesIO(raw)) as im:
                    arr = np.asarray(im.convert("RGB"), dtype=np.float32) / 255.0
            except Exception:
                raise HTTPException(400, f"{up.filename}: not a decodable image")
            tensors.append(srgb_decode(torch.from_numpy(arr)))
        if len(tensors) < 2:
            raise HTTPException(400, "need at least 2 views")
        cams: list[CameraModel] | None = None
        if cameras is not None:
            raw = await cameras.read()
            try:
                records = json.loads(raw)
            except json.JSONDecodeError:
                raise HTTPException(400, "cameras.json is not valid JSON")
            cams = [CameraModel(fx=r["fx"], fy=r["fy"], cx=r["cx"], cy=r["cy"],
                                world_to_camera=torch.tensor(r["world_to_camera"],
                                                             dtype=torch.float32),
                                width=r["width"], height=r["height"]) for r in records]
            if len(cams) != len(tensors):
                raise HTTPException(400, f"{len(cams)} cameras for {len(tensors)} images")
        try:
            cache = mdl.reconstruct(tensors, cams)
        except ValueError as exc:
            raise HTTPException(400, str(exc))
        handle = SceneHandle(scene_id=cache.key, cache=cache, n_views=len(tensors))
        with state.scenes_lock:
            state.scenes.setdefault(cache.key, handle)
        return {"scene_id": cache.key, "n_views": len(tensors)}

    @app.get("/styles")
    def list_styles():
        if state.styles is None:
            return {"styles": []}
        return {"styles": [{"style_id": item.style_id, "caption": item.caption,
                            "image_path": item.image_path}
                           for item in state.styles.items]}

    @app.get("/styles/{style_id}.png")
    def style_image(style_id: str):
        if state.styles is None:
            raise HTTPException(404, "no style library loaded")
        try:
            item = state.styles.by_id(style_id)
        except KeyError:
            raise HTTPException(404, f"unknown style id {style_id!r}")
        return Response(content=encode_png(item.image), media_type="image/png")

    @app.post("/scenes/{scene_id}/stylize")
    def stylize(scene_id: str, req: StylizeRequest):
        mdl = require_model()
        with state.scenes_lock:
            handle = state.scenes.get(scene_id)
        if handle is None:
            raise HTTPException(404, f"unknown scene {scene_id!r}")
        z = _embedding_for(state, req.style_text, req.style_image_id, "style")
        if req.second is not None:
            if req.alpha is None:
                raise HTTPException(400, "interpolation needs alpha in [0, 1]")
            zb = _embedding_for(state, req.second.style_text,
                                req.second.style_image_id, "second")
            if not 0.0 <= req.alpha <= 1.0:
                raise HTTPException(400, f"alpha {req.alpha} outside [0, 1]")
            z = interpolate(z, zb, req.alpha)
        elif req.alpha is not None:
            raise HTTPException(400, "alpha given without a second style")

        views = req.view_indices if req.view_indices is not None \
            else list(range(handle.n_views))
        for v in views:
            if not 0 <= v < handle.n_views:
                raise HTTPException(400, f"view index {v} outside [0, {handle.n_views - 1}]")

        request_fingerprint = hashlib.sha256(json.dumps({
            "scene": scene_id, "text": req.style_text, "image": req.style_image_id,
            "second": req.second.model_dump() if req.second else None,
            "alpha": req.alpha}, sort_keys=True).encode()).hexdigest()[:16]

        with state.work_queue:
            t0 = time.perf_counter()
            with torch.no_grad():
                scene = mdl.stylize(handle.cache, z)
            stylize_s = time.perf_counter() - t0
            t1 = time.perf_counter()
            urls = []
            for v in views:
                token = f"{request_fingerprint}-{v}"
                if state.load_render(token) is None:
                    with torch.no_grad():
                        out = render_views(scene, [handle.cache.cams[v]],
                                           voxel_size=state.voxel_size)[0]
                    state.store_render(token, encode_png(out.color))
                urls.append(f"/renders/{token}.png")
            render_s = time.perf_counter() - t1
        return {"render_urls": urls,
                "timings": {"stylize_s": stylize_s, "render_s": render_s,
                            "total_s": stylize_s + render_s}}

    @app.get("/renders/{token}.png")
    def get_render(token: str):
        blob = state.load_render(token)
        if blob is None:
            raise HTTPException(404, f"unknown render token {token!r}")
        return Response(content=blob, media_type="image/png")

    @app.get("/health")
    def health():
        return {"ok": True, "model_loaded": state.model is not None,
                "n_scenes": len(state.scenes), "n_styles": 0 if state.styles is None
                else len(state.styles)}

    return app
