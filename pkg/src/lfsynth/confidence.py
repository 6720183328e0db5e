"""Warping confidence maps: per-pixel blending weights that sum to one.

A confidence map is an (H, W) float array in [0, 1]; the pair
(O_{k<-0}, O_{k<-1}) expresses how reliably each boundary view predicts the
target view.  Unoccluded pixels get an even 0.5/0.5 split (the viewpoint
weighting (1-k)/k is applied separately in the synthesis blend); occlusion
shifts the weight toward the side that actually sees the pixel.
"""

from __future__ import annotations

import numpy as np

from .warping import check_disparity, warp


def check_confidence(o: np.ndarray, name: str = "confidence") -> np.ndarray:
    o = np.asarray(o, dtype=np.float64)
    if o.ndim != 2:
        raise ValueError(f"{name} must be a 2D map, got shape {o.shape}")
    if not np.all(np.isfinite(o)):
        raise ValueError(f"{name} contains non-finite values")
    if o.min() < 0.0 or o.max() > 1.0:
        raise ValueError(f"{name} values outside [0, 1]: min={o.min()}, max={o.max()}")
    return o


def normalize_pair(
    o0: np.ndarray, o1: np.ndarray, eps: float = 1e-8
) -> tuple[np.ndarray, np.ndarray]:
    """Rescale a nonnegative pair so it sums to one per pixel.

    Pixels where both confidences vanish (sum below eps) default to an even
    0.5/0.5 blend instead of dividing by zero; everywhere else the pair is
    divided by its sum, so the constraint O0 + O1 = 1 holds to rounding.
    """
    o0 = np.asarray(o0, dtype=np.float64)
    o1 = np.asarray(o1, dtype=np.float64)
    if o0.shape != o1.shape:
        raise ValueError(f"confidence shapes differ: {o0.shape} vs {o1.shape}")
    if o0.min() < 0.0 or o1.min() < 0.0:
        raise ValueError("confidences must be nonnegative")
    s = o0 + o1
    ok = s >= eps
    safe = np.where(ok, s, 1.0)
    n0 = np.where(ok, o0 / safe, 0.5)
    n1 = np.where(ok, o1 / safe, 0.5)
    return n0, n1


def _collision_penalty(adm: np.ndarray, span: np.ndarray) -> np.ndarray:
    """Disparity gap by which each pixel loses its source location, in px.

    Every target pixel claims the source cell it warps from; when several
    pixels claim the same cell, the one from the largest-parallax layer
    (largest boundary-to-boundary span) is the one actually visible there.
    The penalty is the winning span minus the pixel's own span: 0 for sole
    or winning claimants, positive for pixels whose source is covered by a
    nearer layer, i.e. occluded on that side.
    """
    h, w = span.shape
    yy, xx = np.indices(span.shape)
    tx = np.clip(np.rint(xx + adm[:, :, 0]).astype(np.intp), 0, w - 1)
    ty = np.clip(np.rint(yy + adm[:, :, 1]).astype(np.intp), 0, h - 1)
    flat = (ty * w + tx).ravel()
    winner = np.zeros(h * w)
    np.maximum.at(winner, flat, span.ravel())
    return winner[flat].reshape(h, w) - span


def estimate_wcm_photometric(
    l0: np.ndarray,
    l1: np.ndarray,
    a_k0: np.ndarray,
    a_k1: np.ndarray,
    k: float,
    sigma: float = 0.05,
    sigma_d: float = 1.0,
    eps: float = 1e-8,
) -> tuple[np.ndarray, np.ndarray]:
    """Estimate the confidence pair from photometric and geometric evidence.

    Side i is down-weighted by exp(-(d * g_i)^2 / sigma_d^2) where g_i is
    that side's forward-warp collision gap (see _collision_penalty) and
    d = 1 - exp(-e^2 / sigma^2) gates the penalty by the photometric
    disagreement e of the two warped boundaries (channel-averaged absolute
    difference).  Where the warps agree the blend is harmless and both sides
    keep an even share; where they disagree, the side whose source location
    is claimed by a larger-parallax pixel is occluded there and loses its
    share to the other side.  The pair is normalized to sum to one.
    """
    l0 = np.asarray(l0, dtype=np.float64)
    l1 = np.asarray(l1, dtype=np.float64)
    if l0.shape != l1.shape:
        raise ValueError(f"boundary image shapes differ: {l0.shape} vs {l1.shape}")
    a_k0 = check_disparity(a_k0, like=l0, name="a_k0")
    a_k1 = check_disparity(a_k1, like=l1, name="a_k1")
    if not 0.0 <= k <= 1.0:
        raise ValueError(f"interpolation factor k must lie in [0, 1], got {k}")

    w0 = warp(l0, a_k0)
    w1 = warp(l1, a_k1)
    e = np.abs(w0 - w1).mean(axis=2)
    disagree = 1.0 - np.exp(-(e**2) / sigma**2)

    # boundary-to-boundary shift magnitude identifies the pixel's layer
    span = np.hypot(a_k0[:, :, 0] - a_k1[:, :, 0], a_k0[:, :, 1] - a_k1[:, :, 1])
    gap0 = _collision_penalty(a_k0, span)
    gap1 = _collision_penalty(a_k1, span)
    c0 = np.exp(-((disagree * gap0) ** 2) / sigma_d**2)
    c1 = np.exp(-((disagree * gap1) ** 2) / sigma_d**2)
    return normalize_pair(c0, c1, eps=eps)
