"""Directory checkpoints: manifest.json plus one raw binary blob per field.

Blobs are little-endian, row-major, one file per field named ``<field>.bin``
(field names with separators are sanitized for the filesystem; the manifest
maps field names to files, dtypes and shapes). Round-trips are bit-exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch

from .gaussians import GaussianScene

_DTYPES = {
    "float32": np.dtype("<f4"),
    "float64": np.dtype("<f8"),
    "int32": np.dtype("<i4"),
    "int64": np.dtype("<i8"),
}

_TORCH_TO_NAME = {
    torch.float32: "float32",
    torch.float64: "float64",
    torch.int32: "int32",
    torch.int64: "int64",
}


def _safe_filename(field: str) -> str:
    return field.replace("/", "__").replace(".", "_") + ".bin"


def save_fields(directory: str | Path, fields: dict[str, torch.Tensor],
                meta: dict | None = None) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest: dict = {"format_version": 1, "fields": {}, "meta": meta or {}}
    for name, tensor in fields.items():
        dtype_name = _TORCH_TO_NAME[tensor.dtype]
        fname = _safe_filename(name)
        arr = tensor.detach().cpu().numpy().astype(_DTYPES[dtype_name], copy=False)
        (directory / fname).write_bytes(np.ascontiguousarray(arr).tobytes())
        manifest["fields"][name] = {
            "file": fname,
            "dtype": dtype_name,
            "shape": list(tensor.shape),
        }
    with open(directory / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)


def load_fields(directory: str | Path) -> tuple[dict[str, torch.Tensor], dict]:
    directory = Path(directory)
    with open(directory / "manifest.json") as fh:
        manifest = json.load(fh)
    fields = {}
    for name, info in manifest["fields"].items():
        raw = (directory / info["file"]).read_bytes()
        arr = np.frombuffer(raw, dtype=_DTYPES[info["dtype"]]).reshape(info["shape"]).copy()
        fields[name] = torch.from_numpy(arr)
    return fields, manifest.get("meta", {})


def save_scene(directory: str | Path, scene: GaussianScene) -> None:
    save_fields(
        directory,
        {
            "means": scene.means.to(torch.float32),
            "rotations": scene.rotations.to(torch.float32),
            "scales": scene.scales.to(torch.float32),
            "opacities": scene.opacities.to(torch.float32),
            "sh_coeffs": scene.sh_coeffs.to(torch.float32),
            "source_view": scene.source_view.to(torch.int32),
            "confidence": scene.confidence.to(torch.float32),
        },
        meta={"count": len(scene), "sh_degree": scene.sh_degree},
    )


def load_scene(directory: str | Path) -> GaussianScene:
    fields, _ = load_fields(directory)
    return GaussianScene(
        means=fields["means"],
        rotations=fields["rotations"],
        scales=fields["scales"],
        opacities=fields["opacities"],
        sh_coeffs=fields["sh_coeffs"],
        source_view=fields["source_view"].to(torch.long),
        confidence=fields["confidence"],
    )


def save_state_dict(directory: str | Path, module: torch.nn.Module,
                    meta: dict | None = None) -> None:
    save_fields(directory, dict(module.state_dict()), meta=meta)


def load_state_dict(directory: str | Path, module: torch.nn.Module) -> dict:
    fields, meta = load_fields(directory)
    module.load_state_dict(fields)
    return meta
