"""Aperture disparity map algebra and a classical boundary estimator.

Disparity maps live on the grid of the view they reconstruct: A maps view
`a` onto view `b` when warp(view_a, A) approximates view_b (backward-warp
convention).  Between the two boundary views of a normalized angular axis,
pixel shift is linear in the viewpoint coordinate, so any intermediate map
is a closed-form blend of the two boundary maps.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np
from scipy.ndimage import gaussian_filter, uniform_filter

from .metrics import FitStats, linear_fit_stats
from .warping import check_disparity


def intermediate_adm_from_source(
    k: float, a_10: np.ndarray, a_01: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Blend boundary maps into the pair warping each boundary to viewpoint k.

    Returns (A_{k<-0}, A_{k<-1}):

        A_{k<-0} = (k+1)/2 * A_{1<-0} + (1-k)/2 * A_{0<-1}
        A_{k<-1} =  k/2    * A_{1<-0} + (1-k/2) * A_{0<-1}

    For exactly antisymmetric inputs (a_01 == -a_10) these reduce to
    k * A_{1<-0} and (k-1) * A_{1<-0}.
    """
    if not 0.0 <= k <= 1.0:
        raise ValueError(f"interpolation factor k must lie in [0, 1], got {k}")
    a_10 = check_disparity(a_10, name="a_10")
    a_01 = check_disparity(a_01, name="a_01")
    if a_10.shape != a_01.shape:
        raise ValueError(f"boundary map shapes differ: {a_10.shape} vs {a_01.shape}")
    a_k0 = ((k + 1.0) * 0.5) * a_10 + ((1.0 - k) * 0.5) * a_01
    a_k1 = (k * 0.5) * a_10 + (1.0 - k * 0.5) * a_01
    return a_k0, a_k1


def _to_gray(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 3:
        return image.mean(axis=2)
    return image


def _shift_columns(image: np.ndarray, d: int) -> np.ndarray:
    """Integer column shift with clamp-to-edge: out(x) = in(clip(x + d))."""
    w = image.shape[1]
    idx = np.clip(np.arange(w) + d, 0, w - 1)
    return image[:, idx]


def _sad_search_1d(target: np.ndarray, source: np.ndarray, max_disp: int, window: int) -> np.ndarray:
    """Per-pixel horizontal displacement d minimizing windowed SAD of
    target(x) vs source(x + d), with parabolic sub-pixel refinement."""
    tg = _to_gray(target)
    sg = _to_gray(source)
    n = 2 * max_disp + 1
    costs = np.empty((n, *tg.shape))
    for idx, d in enumerate(range(-max_disp, max_disp + 1)):
        diff = np.abs(tg - _shift_columns(sg, d))
        costs[idx] = uniform_filter(diff, size=window, mode="nearest")
    best = np.argmin(costs, axis=0)
    yy, xx = np.indices(tg.shape)
    c0 = costs[best, yy, xx]

    disp = best.astype(np.float64) - max_disp
    interior = (best > 0) & (best < n - 1)
    cm = costs[np.maximum(best - 1, 0), yy, xx]
    cp = costs[np.minimum(best + 1, n - 1), yy, xx]
    denom = cm - 2.0 * c0 + cp
    # skip refinement on exact matches (c0 == 0) and degenerate parabolas
    refine = interior & (c0 > 0.0) & (denom > 1e-12)
    offset = np.where(refine, 0.5 * (cm - cp) / np.where(refine, denom, 1.0), 0.0)
    return disp + offset


def estimate_boundary_adm(
    left: np.ndarray, right: np.ndarray, max_disp: int, window: int = 7
) -> tuple[np.ndarray, np.ndarray]:
    """Estimate (A_{1<-0}, A_{0<-1}) for a rectified horizontal pair.

    Windowed SAD over a `window` x `window` box, 1D search along the
    epipolar (x) axis in [-max_disp, max_disp], parabolic refinement.  The
    two directions are estimated independently (the pair is not forced
    antisymmetric).  Occluded pixels inherit the winning candidate; the
    confidence maps absorb the error downstream.
    """
    left = np.asarray(left, dtype=np.float64)
    right = np.asarray(right, dtype=np.float64)
    if left.shape != right.shape:
        raise ValueError(f"image shapes differ: {left.shape} vs {right.shape}")
    if max_disp < 1:
        raise ValueError(f"max_disp must be >= 1, got {max_disp}")
    if max_disp >= left.shape[1]:
        raise ValueError(f"max_disp {max_disp} must be smaller than image width {left.shape[1]}")
    h, w = left.shape[:2]
    a_10 = np.zeros((h, w, 2))
    a_01 = np.zeros((h, w, 2))
    a_10[:, :, 0] = _sad_search_1d(right, left, max_disp, window)
    a_01[:, :, 0] = _sad_search_1d(left, right, max_disp, window)
    return a_10, a_01


def estimate_boundary_adm_vertical(
    top: np.ndarray, bottom: np.ndarray, max_disp: int, window: int = 7
) -> tuple[np.ndarray, np.ndarray]:
    """Same as estimate_boundary_adm for a vertical pair (search along y)."""
    a_10_t, a_01_t = estimate_boundary_adm(
        np.swapaxes(top, 0, 1), np.swapaxes(bottom, 0, 1), max_disp, window
    )
    h, w = top.shape[:2]

    def back(m):
        out = np.zeros((h, w, 2))
        out[:, :, 1] = m[:, :, 0].T
        return out

    return back(a_10_t), back(a_01_t)


class PointLinearity(NamedTuple):
    point: tuple[int, int]
    stats: FitStats


class LinearityReport(NamedTuple):
    per_point: list[PointLinearity]
    average: FitStats


def check_linearity(
    adm_sequence: Sequence[np.ndarray],
    intervals: Sequence[float],
    points: Sequence[tuple[int, int]],
) -> LinearityReport:
    """Fit per-point shift magnitude against aperture interval.

    For each tracked point, the shift magnitude read from each map is
    regressed on the interval; returns R^2, adjusted R^2 and the Pearson
    correlation per point plus their averages.  Needs at least 3 intervals.
    """
    if len(adm_sequence) != len(intervals):
        raise ValueError(
            f"got {len(adm_sequence)} maps for {len(intervals)} intervals"
        )
    if len(intervals) < 3:
        raise ValueError(f"need at least 3 intervals for a line fit, got {len(intervals)}")
    maps = [check_disparity(m, name=f"adm_sequence[{i}]") for i, m in enumerate(adm_sequence)]
    h, w = maps[0].shape[:2]
    for p, (x, y) in enumerate(points):
        if not (0 <= x < w and 0 <= y < h):
            raise ValueError(f"point {p} at ({x}, {y}) outside the {w}x{h} maps")
    x_arr = np.asarray(intervals, dtype=np.float64)
    per_point = []
    for (px, py) in points:
        shifts = np.array([np.hypot(m[py, px, 0], m[py, px, 1]) for m in maps])
        per_point.append(PointLinearity((px, py), linear_fit_stats(x_arr, shifts)))
    avg = FitStats(
        r2=float(np.mean([p.stats.r2 for p in per_point])),
        adjusted_r2=float(np.mean([p.stats.adjusted_r2 for p in per_point])),
        pcc=float(np.mean([p.stats.pcc for p in per_point])),
    )
    return LinearityReport(per_point, avg)


def select_feature_points(
    image: np.ndarray, count: int, margin: int = 12, min_distance: int = 10
) -> list[tuple[int, int]]:
    """Top corner-response pixels with spatial non-max suppression.

    Harris response on the channel-averaged image; a `margin` band at the
    border is excluded so later window matching stays inside the image.
    """
    gray = _to_gray(image)
    h, w = gray.shape
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if 2 * margin >= min(h, w):
        raise ValueError(f"margin {margin} too large for a {w}x{h} image")
    iy, ix = np.gradient(gray)
    ixx = gaussian_filter(ix * ix, 2.0)
    iyy = gaussian_filter(iy * iy, 2.0)
    ixy = gaussian_filter(ix * iy, 2.0)
    response = ixx * iyy - ixy**2 - 0.05 * (ixx + iyy) ** 2
    response[:margin, :] = -np.inf
    response[-margin:, :] = -np.inf
    response[:, :margin] = -np.inf
    response[:, -margin:] = -np.inf

    points = []
    work = response.copy()
    yy, xx = np.indices(gray.shape)
    for _ in range(count):
        flat = np.argmax(work)
        py, px = np.unravel_index(flat, work.shape)
        if not np.isfinite(work[py, px]):
            break
        points.append((int(px), int(py)))
        work[(yy - py) ** 2 + (xx - px) ** 2 <= min_distance**2] = -np.inf
    if len(points) < count:
        raise ValueError(
            f"could only place {len(points)} of {count} feature points; "
            "reduce count, margin or min_distance"
        )
    return points
