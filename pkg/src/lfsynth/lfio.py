"""Serialization: light field directories, PFM float maps, scene specs, reports.

A light field on disk is a directory of view_RR_CC.png files (row-major,
zero-padded indices, 8- or 16-bit per channel) plus a lightfield.json
metadata document.  Float maps (disparity, confidence) use the PFM format,
little-endian, one file per component; disparity maps split into _dx/_dy
files.  Scene specs and metric reports are JSON.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

import cv2
import numpy as np

from .core import AngularGrid, LightField
from .scene import LayerSpec, MaskSpec, SceneSpec, TextureSpec

METADATA_NAME = "lightfield.json"


def _view_name(i: int, j: int) -> str:
    return f"view_{i:02d}_{j:02d}.png"


def _to_disk_order(image: np.ndarray) -> np.ndarray:
    # cv2 stores color as BGR
    if image.ndim == 3 and image.shape[2] == 3:
        return image[:, :, ::-1]
    return image


def save_lightfield(
    lf: LightField,
    path,
    bit_depth: int = 16,
    baseline_px: float | None = None,
    source: str = "synthetic",
) -> None:
    """Write the views as PNGs plus metadata; radiance is quantized to the
    declared bit depth."""
    if bit_depth not in (8, 16):
        raise ValueError(f"bit_depth must be 8 or 16, got {bit_depth}")
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    peak = (1 << bit_depth) - 1
    dtype = np.uint8 if bit_depth == 8 else np.uint16
    for i in range(lf.grid.rows):
        for j in range(lf.grid.cols):
            q = np.rint(lf.views[i, j] * peak).astype(dtype)
            if q.shape[2] == 1:
                q = q[:, :, 0]
            else:
                q = _to_disk_order(q)
            if not cv2.imwrite(str(path / _view_name(i, j)), q):
                raise OSError(f"failed to write {path / _view_name(i, j)}")
    meta = {
        "rows": lf.grid.rows,
        "cols": lf.grid.cols,
        "width": lf.width,
        "height": lf.height,
        "channels": lf.channels,
        "bit_depth": bit_depth,
    }
    if baseline_px is not None:
        meta["baseline_px"] = float(baseline_px)
    meta["source"] = source
    (path / METADATA_NAME).write_text(json.dumps(meta, indent=2) + "\n")


def load_lightfield(path) -> tuple[LightField, dict]:
    """Load a light field directory; returns (light field, metadata dict)."""
    path = Path(path)
    meta_path = path / METADATA_NAME
    if not meta_path.is_file():
        raise FileNotFoundError(f"missing metadata file {meta_path}")
    try:
        meta = json.loads(meta_path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed metadata in {meta_path}: {exc}") from exc
    for key in ("rows", "cols", "width", "height", "channels", "bit_depth"):
        if key not in meta:
            raise ValueError(f"metadata {meta_path} is missing field {key!r}")
    rows, cols = meta["rows"], meta["cols"]
    peak = (1 << meta["bit_depth"]) - 1
    views = np.empty((rows, cols, meta["height"], meta["width"], meta["channels"]))
    for i in range(rows):
        for j in range(cols):
            vp = path / _view_name(i, j)
            if not vp.is_file():
                raise FileNotFoundError(f"missing view file {vp}")
            raw = cv2.imread(str(vp), cv2.IMREAD_UNCHANGED)
            if raw is None:
                raise ValueError(f"could not decode view file {vp}")
            if raw.ndim == 2:
                raw = raw[:, :, None]
            else:
                raw = _to_disk_order(raw)
            if raw.shape != (meta["height"], meta["width"], meta["channels"]):
                raise ValueError(
                    f"view file {vp} has shape {raw.shape}, expected "
                    f"({meta['height']}, {meta['width']}, {meta['channels']})"
                )
            views[i, j] = raw.astype(np.float64) / peak
    return LightField(AngularGrid(rows, cols), views), meta


# --- PFM -------------------------------------------------------------------

def write_pfm(path, data: np.ndarray, scale: float = 1.0) -> None:
    """Write a single-channel little-endian PFM (IEEE-754 float32).

    Scanlines are stored bottom-to-top per the format; the scale factor is
    written negative to flag little-endian byte order.
    """
    data = np.asarray(data)
    if data.ndim != 2:
        raise ValueError(f"PFM writer expects a 2D map, got shape {data.shape}")
    if not np.all(np.isfinite(data)):
        raise ValueError("refusing to write non-finite values to PFM")
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    data32 = data.astype(np.float32)
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(b"Pf\n")
        fh.write(f"{data.shape[1]} {data.shape[0]}\n".encode("ascii"))
        fh.write(f"{-scale}\n".encode("ascii"))
        fh.write(np.flipud(data32).astype("<f4").tobytes())


def read_pfm(path) -> np.ndarray:
    """Read a single-channel PFM; rejects big-endian files and non-finite data."""
    path = Path(path)
    blob = path.read_bytes()
    m = re.match(rb"(P[fF])\s+(\d+)\s+(\d+)\s+([-+0-9.eE]+)\s", blob)
    if m is None:
        raise ValueError(f"{path}: malformed PFM header")
    kind, width, height = m.group(1), int(m.group(2)), int(m.group(3))
    if kind != b"Pf":
        raise ValueError(f"{path}: only single-channel 'Pf' maps are supported")
    scale = float(m.group(4))
    if scale > 0:
        raise ValueError(
            f"{path}: positive scale marks a big-endian PFM, which is not supported; "
            "convert to little-endian first"
        )
    expected = width * height * 4
    payload = blob[m.end():]
    if len(payload) < expected:
        raise ValueError(f"{path}: truncated PFM payload ({len(payload)} < {expected} bytes)")
    data = np.frombuffer(payload[:expected], dtype="<f4").reshape(height, width)
    data = np.flipud(data).astype(np.float64)
    if not np.all(np.isfinite(data)):
        raise ValueError(f"{path}: PFM contains non-finite values")
    return data


def save_adm(prefix, adm: np.ndarray) -> tuple[Path, Path]:
    """Write a disparity map as <prefix>_dx.pfm and <prefix>_dy.pfm."""
    adm = np.asarray(adm)
    if adm.ndim != 3 or adm.shape[2] != 2:
        raise ValueError(f"disparity map must have shape (H, W, 2), got {adm.shape}")
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    dx_path = prefix.with_name(prefix.name + "_dx.pfm")
    dy_path = prefix.with_name(prefix.name + "_dy.pfm")
    write_pfm(dx_path, adm[:, :, 0])
    write_pfm(dy_path, adm[:, :, 1])
    return dx_path, dy_path


def load_adm(prefix) -> np.ndarray:
    prefix = Path(prefix)
    dx = read_pfm(prefix.with_name(prefix.name + "_dx.pfm"))
    dy = read_pfm(prefix.with_name(prefix.name + "_dy.pfm"))
    if dx.shape != dy.shape:
        raise ValueError(f"component shapes differ: {dx.shape} vs {dy.shape}")
    return np.stack([dx, dy], axis=2)


# --- scene specs -------------------------------------------------------------

def scene_to_dict(spec: SceneSpec) -> dict:
    return {
        "width": spec.width,
        "height": spec.height,
        "channels": spec.channels,
        "baseline": spec.baseline,
        "seed": spec.seed,
        "layers": [
            {
                "alpha": layer.alpha,
                "texture": {
                    "seed": layer.texture.seed,
                    "smoothness": layer.texture.smoothness,
                    "contrast": layer.texture.contrast,
                    "blotches": layer.texture.blotches,
                },
                "mask": {
                    "kind": layer.mask.kind,
                    "params": list(layer.mask.params),
                    "seed": layer.mask.seed,
                },
            }
            for layer in spec.layers
        ],
    }


def save_scene_spec(spec: SceneSpec, path) -> None:
    Path(path).write_text(json.dumps(scene_to_dict(spec), indent=2) + "\n")


def load_scene_spec(path) -> SceneSpec:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed scene spec {path}: {exc}") from exc
    if "seed" not in doc:
        raise ValueError(f"scene spec {path} is missing the mandatory 'seed' field")
    try:
        layers = tuple(
            LayerSpec(
                alpha=item["alpha"],
                texture=TextureSpec(**item.get("texture", {})),
                mask=MaskSpec(
                    kind=item.get("mask", {}).get("kind", "full"),
                    params=tuple(item.get("mask", {}).get("params", ())),
                    seed=item.get("mask", {}).get("seed", 0),
                ),
            )
            for item in doc["layers"]
        )
        return SceneSpec(
            width=doc["width"],
            height=doc["height"],
            channels=doc.get("channels", 3),
            baseline=doc.get("baseline", 4.0),
            seed=doc["seed"],
            layers=layers,
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"scene spec {path} is malformed: {exc}") from exc


# --- reports -----------------------------------------------------------------

def sig6(x) -> float:
    """Round to 6 significant digits (report convention)."""
    return float(f"{float(x):.6g}")


def save_report(report: dict, path) -> None:
    """Write a metric report as JSON with stable field order."""
    Path(path).write_text(json.dumps(report, indent=2) + "\n")
