"""Color-coded exports and report figures.

Confidence maps use a red/blue diverging coding: red marks pixels where the
source image contributes more than an even share (darker red, higher
contribution), blue the opposite, white an even split.  Disparity maps use
direction-as-hue with magnitude-as-saturation, so lighter colors mean
smaller vectors and the zero map is white.
"""

from __future__ import annotations

from pathlib import Path

import cv2
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import hsv_to_rgb

from .core import EpiImage


def wcm_to_rgb(o: np.ndarray) -> np.ndarray:
    """(H, W) confidence in [0, 1] -> (H, W, 3) red/blue diverging image."""
    o = np.asarray(o, dtype=np.float64)
    if o.ndim != 2:
        raise ValueError(f"confidence map must be 2D, got shape {o.shape}")
    t = np.clip((o - 0.5) * 2.0, -1.0, 1.0)
    pos = t >= 0  # source contributes more: fade white -> red, else white -> blue
    rgb = np.empty((*o.shape, 3))
    rgb[:, :, 0] = np.where(pos, 1.0, 1.0 + t)
    rgb[:, :, 1] = np.where(pos, 1.0 - t, 1.0 + t)
    rgb[:, :, 2] = np.where(pos, 1.0 - t, 1.0)
    return rgb


def adm_to_rgb(adm: np.ndarray, max_magnitude: float | None = None) -> np.ndarray:
    """(H, W, 2) disparity -> (H, W, 3); hue encodes direction, lightness magnitude."""
    adm = np.asarray(adm, dtype=np.float64)
    if adm.ndim != 3 or adm.shape[2] != 2:
        raise ValueError(f"disparity map must have shape (H, W, 2), got {adm.shape}")
    mag = np.hypot(adm[:, :, 0], adm[:, :, 1])
    if max_magnitude is None:
        max_magnitude = float(mag.max())
    hue = (np.arctan2(adm[:, :, 1], adm[:, :, 0]) / (2.0 * np.pi)) % 1.0
    sat = mag / max_magnitude if max_magnitude > 0 else np.zeros_like(mag)
    hsv = np.stack([hue, np.clip(sat, 0.0, 1.0), np.ones_like(hue)], axis=2)
    return hsv_to_rgb(hsv)


def epi_to_image(epi: EpiImage, upscale: int = 1) -> np.ndarray:
    """EPI slice as an (A*upscale, S, 3) image, angular axis vertical.

    Upscaling is nearest-neighbor along the angular axis and is export-only.
    """
    if upscale < 1:
        raise ValueError(f"upscale must be >= 1, got {upscale}")
    data = epi.data
    if data.shape[2] == 1:
        data = np.repeat(data, 3, axis=2)
    return np.repeat(data, upscale, axis=0)


def save_image(path, rgb: np.ndarray) -> None:
    """Write an [0,1] float RGB (or gray) image as an 8-bit PNG."""
    rgb = np.asarray(rgb, dtype=np.float64)
    q = np.rint(np.clip(rgb, 0.0, 1.0) * 255).astype(np.uint8)
    if q.ndim == 3 and q.shape[2] == 3:
        q = q[:, :, ::-1]  # cv2 wants BGR
    elif q.ndim == 3 and q.shape[2] == 1:
        q = q[:, :, 0]
    if not cv2.imwrite(str(path), q):
        raise OSError(f"failed to write image {path}")


def render_quality_figure(report: dict, path) -> None:
    """Per-view PSNR/SSIM grids for an evaluation report."""
    per_view = report["per_view"]
    rows = max(entry["i"] for entry in per_view) + 1
    cols = max(entry["j"] for entry in per_view) + 1
    psnr_grid = np.full((rows, cols), np.nan)
    ssim_grid = np.full((rows, cols), np.nan)
    for entry in per_view:
        psnr_grid[entry["i"], entry["j"]] = entry["psnr_db"]
        ssim_grid[entry["i"], entry["j"]] = entry["ssim"]

    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    for ax, grid, label in ((axes[0], psnr_grid, "PSNR (dB)"), (axes[1], ssim_grid, "SSIM")):
        im = ax.imshow(grid, cmap="viridis")
        ax.set_title(label)
        ax.set_xlabel("u index")
        ax.set_ylabel("v index")
        fig.colorbar(im, ax=ax, fraction=0.046)
    fig.suptitle(f"mean PSNR {report['psnr_db']:.2f} dB / mean SSIM {report['ssim']:.4f}")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_linearity_figure(report: dict, path) -> None:
    """Shift-vs-interval scatter with the fitted line, one panel per point."""
    points = report["per_point"]
    n = len(points)
    cols = min(3, n)
    rows = (n + cols - 1) // cols
    fig, axes = plt.subplots(rows, cols, figsize=(3.2 * cols, 2.6 * rows), squeeze=False)
    for idx, entry in enumerate(points):
        ax = axes[idx // cols][idx % cols]
        x = np.asarray(entry["intervals"], dtype=np.float64)
        y = np.asarray(entry["shifts"], dtype=np.float64)
        ax.plot(x, y, "o", ms=4)
        slope, intercept = np.polyfit(x, y, 1)
        xs = np.linspace(x.min(), x.max(), 32)
        ax.plot(xs, slope * xs + intercept, "-", lw=1)
        ax.set_title(f"P{idx + 1}  $R^2$={entry['r2']:.4f}", fontsize=9)
        ax.set_xlabel("aperture interval")
        ax.set_ylabel("shift (px)")
    for idx in range(n, rows * cols):
        axes[idx // cols][idx % cols].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
