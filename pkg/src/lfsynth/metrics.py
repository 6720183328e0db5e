"""Quality metrics and loss-term evaluators (measurement only, no training).

PSNR uses peak 1.0 on normalized radiance.  SSIM follows the standard
formulation: 11x11 Gaussian window with sigma 1.5, C1 = 0.01^2 and
C2 = 0.03^2 on peak 1.0, computed on luma for color inputs, averaged over
window positions where the full window fits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.ndimage import correlate

from .warping import warp_residual

LUMA_WEIGHTS = (0.299, 0.587, 0.114)  # ITU-R BT.601

PSNR_REPORT_CAP_DB = 99.0


def _pair(a, b, name_a="a", name_b="b"):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"{name_a} shape {a.shape} != {name_b} shape {b.shape}")
    return a, b


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB, peak 1.0; inf for identical inputs.

    Color inputs average the per-channel MSE before the log.
    """
    a, b = _pair(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return -10.0 * math.log10(mse)


def capped_psnr(a: np.ndarray, b: np.ndarray, cap: float = PSNR_REPORT_CAP_DB) -> float:
    """PSNR with the infinite sentinel rendered as a finite cap (reporting)."""
    value = psnr(a, b)
    return min(value, cap)


def luma(image: np.ndarray) -> np.ndarray:
    """(H, W) luma of an (H, W[, C]) image (BT.601 weights for color)."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 2:
        return image
    if image.shape[2] == 1:
        return image[:, :, 0]
    if image.shape[2] == 3:
        return (
            LUMA_WEIGHTS[0] * image[:, :, 0]
            + LUMA_WEIGHTS[1] * image[:, :, 1]
            + LUMA_WEIGHTS[2] * image[:, :, 2]
        )
    raise ValueError(f"expected 1 or 3 channels, got shape {image.shape}")


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    r = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(r**2) / (2.0 * sigma**2))
    k = np.outer(g, g)
    return k / k.sum()


def ssim(
    a: np.ndarray,
    b: np.ndarray,
    window_size: int = 11,
    sigma: float = 1.5,
    c1: float = 0.01**2,
    c2: float = 0.03**2,
) -> float:
    """Mean local SSIM over all fully covered window positions."""
    a, b = _pair(a, b)
    x = luma(a)
    y = luma(b)
    h, w = x.shape
    if h < window_size or w < window_size:
        raise ValueError(
            f"image {w}x{h} smaller than the {window_size}x{window_size} SSIM window"
        )
    kernel = _gaussian_window(window_size, sigma)
    half = window_size // 2

    def filt(img):
        return correlate(img, kernel, mode="nearest")[half:-half, half:-half]

    mu_x = filt(x)
    mu_y = filt(y)
    var_x = filt(x * x) - mu_x**2
    var_y = filt(y * y) - mu_y**2
    cov = filt(x * y) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x**2 + mu_y**2 + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def loss_reconstruction(pred_set: Sequence[np.ndarray], gt_set: Sequence[np.ndarray]) -> float:
    """Mean over view pairs of the mean absolute residual."""
    if len(pred_set) != len(gt_set):
        raise ValueError(f"got {len(pred_set)} predictions for {len(gt_set)} references")
    if len(pred_set) == 0:
        raise ValueError("need at least one view pair")
    total = 0.0
    for idx, (p, g) in enumerate(zip(pred_set, gt_set)):
        p, g = _pair(p, g, f"pred[{idx}]", f"gt[{idx}]")
        total += float(np.mean(np.abs(p - g)))
    return total / len(pred_set)


def loss_warping(
    l0: np.ndarray,
    l1: np.ndarray,
    a_01: np.ndarray,
    a_10: np.ndarray,
    intermediates: Sequence[tuple[np.ndarray, np.ndarray, np.ndarray]] = (),
) -> float:
    """Warping loss: four mean-absolute terms.

    Two boundary cross-terms (each boundary vs the other warped onto it)
    plus, averaged over the intermediate set, each intermediate view vs both
    warped boundaries.  `intermediates` holds (image_k, a_k0, a_k1) triples.
    """
    total = warp_residual(l0, l1, a_01) + warp_residual(l1, l0, a_10)
    if intermediates:
        t_from_1 = 0.0
        t_from_0 = 0.0
        for image_k, a_k0, a_k1 in intermediates:
            t_from_1 += warp_residual(image_k, l1, a_k1)
            t_from_0 += warp_residual(image_k, l0, a_k0)
        total += (t_from_1 + t_from_0) / len(intermediates)
    return total


def loss_smoothness(a_01: np.ndarray, a_10: np.ndarray) -> float:
    """Sum of mean-absolute forward differences of both boundary maps."""
    a_01, a_10 = _pair(a_01, a_10, "a_01", "a_10")
    total = 0.0
    for m in (a_01, a_10):
        total += float(np.mean(np.abs(m[:, 1:] - m[:, :-1])))  # gradient along x
        total += float(np.mean(np.abs(m[1:, :] - m[:-1, :])))  # gradient along y
    return total


@dataclass(frozen=True)
class LossWeights:
    """Default loss-term weights; the perceptual weight is retained for
    documentation even though the perceptual term itself is not evaluated
    here (it needs a pretrained feature extractor)."""

    reconstruction: float = 200.0
    perceptual: float = 1000.0
    warping: float = 100.0
    smoothness: float = 1.0


def combined_loss_report(
    l_r: float, l_w: float, l_s: float, weights: LossWeights | None = None
) -> dict:
    """Weighted total of the evaluated loss terms.

    The perceptual term is reported as absent ("n/a") and contributes 0.
    """
    w = weights or LossWeights()
    total = w.reconstruction * l_r + w.warping * l_w + w.smoothness * l_s
    return {
        "l_r": float(l_r),
        "l_w": float(l_w),
        "l_s": float(l_s),
        "perceptual": "n/a",
        "l_total": float(total),
        "weights": {
            "reconstruction": w.reconstruction,
            "perceptual": w.perceptual,
            "warping": w.warping,
            "smoothness": w.smoothness,
        },
    }


class FitStats(NamedTuple):
    r2: float
    adjusted_r2: float
    pcc: float


def linear_fit_stats(x: np.ndarray, y: np.ndarray) -> FitStats:
    """Simple-linear-regression statistics of y on x.

    The exactly-constant degenerate case (zero variance in y) reports
    R^2 = adjusted R^2 = PCC = 1: the line fits perfectly.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"x and y must be equal-length 1D arrays, got {x.shape}, {y.shape}")
    n = x.size
    if n < 3:
        raise ValueError(f"need at least 3 samples for a line fit, got {n}")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    sxy = float(np.dot(dx, dy))
    if sxx == 0.0:
        raise ValueError("all x values identical; slope is undefined")
    if syy == 0.0:
        return FitStats(1.0, 1.0, 1.0)
    r2 = (sxy * sxy) / (sxx * syy)
    adjusted = 1.0 - (1.0 - r2) * (n - 1) / (n - 2)
    pcc = sxy / math.sqrt(sxx * syy)
    return FitStats(r2, adjusted, pcc)
