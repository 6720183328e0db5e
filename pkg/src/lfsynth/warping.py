"""Pixel-wise backward warping of views by per-pixel displacement maps.

A disparity map is a float array of shape (H, W, 2) whose last axis holds
(dx, dy) in pixels.  The map points from each output pixel to its source
location in the input: out(x) = in(x + d(x)), sampled bilinearly.
"""

from __future__ import annotations

import numpy as np

BORDER_CLAMP = "clamp"
BORDER_ZERO = "zero"


def check_disparity(adm: np.ndarray, like: np.ndarray | None = None, name: str = "adm") -> np.ndarray:
    """Validate an (H, W, 2) displacement field, optionally against an image."""
    adm = np.asarray(adm, dtype=np.float64)
    if adm.ndim != 3 or adm.shape[2] != 2:
        raise ValueError(f"{name} must have shape (H, W, 2), got {adm.shape}")
    if not np.all(np.isfinite(adm)):
        raise ValueError(f"{name} contains non-finite displacements")
    if like is not None and adm.shape[:2] != like.shape[:2]:
        raise ValueError(
            f"{name} size {adm.shape[:2]} does not match image size {like.shape[:2]}"
        )
    return adm


def _bilinear_gather(data: np.ndarray, sx: np.ndarray, sy: np.ndarray) -> np.ndarray:
    """Sample (H, W, K) data at continuous, already clamped (sy, sx)."""
    h, w = data.shape[:2]
    x0 = np.floor(sx).astype(np.intp)
    y0 = np.floor(sy).astype(np.intp)
    x0 = np.clip(x0, 0, w - 1)
    y0 = np.clip(y0, 0, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (sx - x0)[..., None]
    fy = (sy - y0)[..., None]
    top = data[y0, x0] * (1.0 - fx) + data[y0, x1] * fx
    bot = data[y1, x0] * (1.0 - fx) + data[y1, x1] * fx
    return top * (1.0 - fy) + bot * fy


def sample_bilinear(data: np.ndarray, x, y, border: str = BORDER_CLAMP) -> np.ndarray:
    """Bilinear lookup of (H, W, K) data at arbitrary continuous points."""
    data = np.asarray(data, dtype=np.float64)
    sx = np.asarray(x, dtype=np.float64)
    sy = np.asarray(y, dtype=np.float64)
    h, w = data.shape[:2]
    cx = np.clip(sx, 0.0, w - 1.0)
    cy = np.clip(sy, 0.0, h - 1.0)
    out = _bilinear_gather(data, cx, cy)
    if border == BORDER_ZERO:
        inside = (sx >= 0.0) & (sx <= w - 1.0) & (sy >= 0.0) & (sy <= h - 1.0)
        out = np.where(inside[..., None], out, 0.0)
    elif border != BORDER_CLAMP:
        raise ValueError(f"border must be '{BORDER_CLAMP}' or '{BORDER_ZERO}', got {border!r}")
    return out


def warp(image: np.ndarray, adm: np.ndarray, border: str = BORDER_CLAMP) -> np.ndarray:
    """Backward-warp a view: out(x) = image(x + adm(x)), bilinear.

    Integer displacements reduce to exact index shifts; zero displacement is
    the identity, bit-exact.  Out-of-image samples follow the border policy
    (clamp to edge by default, zero fill optionally).
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 3:
        raise ValueError(f"image must have shape (H, W, C), got {image.shape}")
    adm = check_disparity(adm, like=image)
    h, w = image.shape[:2]
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    return sample_bilinear(image, xx + adm[:, :, 0], yy + adm[:, :, 1], border=border)


def warp_residual(target: np.ndarray, source: np.ndarray, adm: np.ndarray) -> float:
    """Mean absolute error between target and the warped source."""
    target = np.asarray(target, dtype=np.float64)
    source = np.asarray(source, dtype=np.float64)
    if target.shape != source.shape:
        raise ValueError(f"target shape {target.shape} != source shape {source.shape}")
    warped = warp(source, adm)
    return float(np.mean(np.abs(target - warped)))
