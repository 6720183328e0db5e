"""Intermediate view inference and dense light field reconstruction.

Free-space inference blends the two warped boundary views with the
viewpoint weights (1-k, k); occlusion-aware inference additionally weights
each side by its confidence map and renormalizes per pixel.  Dense
reconstruction runs the 1D model separably: first along u for the two
boundary rows, then along v for every target column.  Interior views reuse
the same boundary disparity estimates, rescaled per the linear blend; this
is what makes the pipeline cheap.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.ndimage import correlate

from .confidence import check_confidence, estimate_wcm_photometric
from .core import AngularGrid, LightField, view_at
from .disparity import (
    estimate_boundary_adm,
    estimate_boundary_adm_vertical,
    intermediate_adm_from_source,
)
from .scene import SceneSpec, oracle_adm, oracle_wcm
from .warping import warp

ESTIMATOR_CLASSICAL = "classical"
ESTIMATOR_ORACLE = "oracle"


def infer_free_space(
    l0: np.ndarray, l1: np.ndarray, a_k0: np.ndarray, a_k1: np.ndarray, k: float
) -> np.ndarray:
    """Blend the warped boundaries: (1-k) * warp(l0, a_k0) + k * warp(l1, a_k1)."""
    if not 0.0 <= k <= 1.0:
        raise ValueError(f"interpolation factor k must lie in [0, 1], got {k}")
    l0 = np.asarray(l0, dtype=np.float64)
    l1 = np.asarray(l1, dtype=np.float64)
    if l0.shape != l1.shape:
        raise ValueError(f"boundary image shapes differ: {l0.shape} vs {l1.shape}")
    w0 = warp(l0, a_k0)
    w1 = warp(l1, a_k1)
    return (1.0 - k) * w0 + k * w1


def infer_occlusion_aware(
    l0: np.ndarray,
    l1: np.ndarray,
    a_k0: np.ndarray,
    a_k1: np.ndarray,
    o_k0: np.ndarray,
    o_k1: np.ndarray,
    k: float,
    eps: float = 1e-8,
    diag: dict | None = None,
) -> np.ndarray:
    """Confidence-weighted blend of the warped boundaries.

    Per pixel: [ (1-k) O0 w0 + k O1 w1 ] / phi with phi = (1-k) O0 + k O1.
    phi is evaluated as O0 + k (O1 - O0) and the per-side weights are divided
    through before multiplying the radiance, so uniform 0.5 confidences
    reproduce infer_free_space bit-for-bit and a (0, 1) pixel returns the
    other side's warp exactly.  Pixels where phi falls below eps (both sides
    fully distrusted) fall back to an even blend and are counted in `diag`.
    """
    if not 0.0 <= k <= 1.0:
        raise ValueError(f"interpolation factor k must lie in [0, 1], got {k}")
    l0 = np.asarray(l0, dtype=np.float64)
    l1 = np.asarray(l1, dtype=np.float64)
    if l0.shape != l1.shape:
        raise ValueError(f"boundary image shapes differ: {l0.shape} vs {l1.shape}")
    o_k0 = check_confidence(o_k0, "o_k0")
    o_k1 = check_confidence(o_k1, "o_k1")
    if o_k0.shape != l0.shape[:2] or o_k1.shape != l1.shape[:2]:
        raise ValueError(
            f"confidence size {o_k0.shape}/{o_k1.shape} does not match image "
            f"size {l0.shape[:2]}"
        )
    w0 = warp(l0, a_k0)
    w1 = warp(l1, a_k1)
    phi = o_k0 + k * (o_k1 - o_k0)
    ok = phi >= eps
    safe = np.where(ok, phi, 1.0)
    m0 = np.where(ok, ((1.0 - k) * o_k0) / safe, 0.5)
    m1 = np.where(ok, (k * o_k1) / safe, 0.5)
    if diag is not None:
        diag["phi_fallback_px"] = int(np.count_nonzero(~ok))
    return m0[:, :, None] * w0 + m1[:, :, None] * w1


def _uniform_confidence(shape: tuple[int, int]) -> np.ndarray:
    return np.full(shape, 0.5)


def _synthesize_axis(
    l0: np.ndarray,
    l1: np.ndarray,
    ks: list[float],
    *,
    axis: str,
    estimator: str,
    scene: SceneSpec | None,
    b0: tuple[float, float],
    b1: tuple[float, float],
    target_of,
    use_wcm: bool,
    max_disp: int,
    window: int,
    sigma: float,
    sigma_d: float,
    eps: float,
    threads: int,
) -> list[np.ndarray]:
    """Synthesize views between a boundary pair at the given factors.

    Factors 0 and 1 pass the boundary images through untouched; `target_of`
    maps a factor to the (u, v) target coordinates for the oracle.
    """
    a_10 = a_01 = None
    if estimator == ESTIMATOR_CLASSICAL and any(0.0 < k < 1.0 for k in ks):
        if axis == "u":
            a_10, a_01 = estimate_boundary_adm(l0, l1, max_disp, window)
        else:
            a_10, a_01 = estimate_boundary_adm_vertical(l0, l1, max_disp, window)

    def synth(k: float) -> np.ndarray:
        if k == 0.0:
            return l0
        if k == 1.0:
            return l1
        if estimator == ESTIMATOR_ORACLE:
            target = target_of(k)
            a_k0 = oracle_adm(scene, b0, target)
            a_k1 = oracle_adm(scene, b1, target)
        else:
            a_k0, a_k1 = intermediate_adm_from_source(k, a_10, a_01)
        if not use_wcm:
            o0 = _uniform_confidence(l0.shape[:2])
            o1 = _uniform_confidence(l1.shape[:2])
        elif estimator == ESTIMATOR_ORACLE:
            o0, o1 = oracle_wcm(scene, b0, b1, target_of(k))
        else:
            o0, o1 = estimate_wcm_photometric(l0, l1, a_k0, a_k1, k, sigma, sigma_d, eps)
        out = infer_occlusion_aware(l0, l1, a_k0, a_k1, o0, o1, k, eps=eps)
        return np.clip(out, 0.0, 1.0)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(synth, ks))
    return [synth(k) for k in ks]


def reconstruct_dense(
    corner_lf: LightField,
    target_grid: AngularGrid,
    estimator: str = ESTIMATOR_CLASSICAL,
    scene: SceneSpec | None = None,
    *,
    use_wcm: bool = True,
    max_disp: int | None = None,
    window: int = 7,
    sigma: float = 0.05,
    sigma_d: float = 1.0,
    eps: float = 1e-8,
    threads: int = 1,
) -> LightField:
    """Reconstruct a dense light field from its four corner views.

    Runs the u-axis pass on the two boundary rows, then the v-axis pass on
    every target column of those results.  Corner positions of the target
    grid are passed through bit-identical.  The oracle estimator pulls
    ground-truth disparity and confidence maps from the scene; the classical
    estimator matches the boundary pairs and rescales.
    """
    if corner_lf.grid.rows != 2 or corner_lf.grid.cols != 2:
        raise ValueError(
            f"corner light field must be 2x2, got {corner_lf.grid.rows}x{corner_lf.grid.cols}"
        )
    if target_grid.rows < 2 or target_grid.cols < 2:
        raise ValueError(
            f"target grid must be at least 2x2, got {target_grid.rows}x{target_grid.cols}"
        )
    if estimator not in (ESTIMATOR_CLASSICAL, ESTIMATOR_ORACLE):
        raise ValueError(f"estimator must be 'classical' or 'oracle', got {estimator!r}")
    if estimator == ESTIMATOR_ORACLE and scene is None:
        raise ValueError("the oracle estimator needs the generating scene")
    if max_disp is None:
        max_disp = int(np.ceil(scene.baseline)) + 1 if scene is not None else 8

    opts = dict(
        estimator=estimator, scene=scene, use_wcm=use_wcm, max_disp=max_disp,
        window=window, sigma=sigma, sigma_d=sigma_d, eps=eps, threads=threads,
    )
    us = [target_grid.u(j) for j in range(target_grid.cols)]
    vs = [target_grid.v(i) for i in range(target_grid.rows)]

    top = _synthesize_axis(
        view_at(corner_lf, 0, 0), view_at(corner_lf, 0, 1), us, axis="u",
        b0=(0.0, 0.0), b1=(1.0, 0.0), target_of=lambda k: (k, 0.0), **opts,
    )
    bottom = _synthesize_axis(
        view_at(corner_lf, 1, 0), view_at(corner_lf, 1, 1), us, axis="u",
        b0=(0.0, 1.0), b1=(1.0, 1.0), target_of=lambda k: (k, 1.0), **opts,
    )

    views = np.empty(
        (target_grid.rows, target_grid.cols, corner_lf.height, corner_lf.width, corner_lf.channels)
    )
    for j, u in enumerate(us):
        column = _synthesize_axis(
            top[j], bottom[j], vs, axis="v",
            b0=(u, 0.0), b1=(u, 1.0), target_of=lambda k, u=u: (u, k), **opts,
        )
        for i in range(target_grid.rows):
            views[i, j] = column[i]
    return LightField(target_grid, views)


def separable_conv4d(
    lf: LightField,
    spatial_kernel: np.ndarray,
    angular_kernel: np.ndarray,
    scale: float = 1.0,
) -> LightField:
    """Fixed-weight separable 4D filter: spatial 3x3, then angular 3x3, then
    a scalar 1x1x1x1 scale.

    Kernels are applied as correlations with replicate padding, per channel.
    The cascade equals a full 4D convolution with the outer-product kernel
    Ka (x) Ks.  Grids smaller than 3x3 skip the angular pass (identity).
    Output radiance is clipped back to [0, 1].
    """
    ks = np.asarray(spatial_kernel, dtype=np.float64)
    ka = np.asarray(angular_kernel, dtype=np.float64)
    if ks.shape != (3, 3):
        raise ValueError(f"spatial kernel must be 3x3, got {ks.shape}")
    if ka.shape != (3, 3):
        raise ValueError(f"angular kernel must be 3x3, got {ka.shape}")
    data = correlate(lf.views, ks[None, None, :, :, None], mode="nearest")
    if lf.grid.rows >= 3 and lf.grid.cols >= 3:
        data = correlate(data, ka[:, :, None, None, None], mode="nearest")
    data *= float(scale)
    return LightField(lf.grid, np.clip(data, 0.0, 1.0))
