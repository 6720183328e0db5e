"""Procedural layered Lambertian scenes with closed-form light field geometry.

A scene is a stack of fronto-parallel opaque layers, back to front.  Layer
depth enters only through the disparity ratio alpha = Z/F > 1: moving the
viewpoint from u to u' translates the layer by (1 - 1/alpha) * baseline *
(u' - u) pixels (same along v).  The reference view sits at (0.5, 0.5) so
disparities are symmetric about the grid center.

Because layer geometry is exact, the module can emit ground-truth disparity
maps, occlusion masks and confidence maps alongside the rendered views,
which real captured light fields cannot provide.

Layer rasters are authored wider than the viewport by the baseline so every
view is fully covered; no border extrapolation ever enters ground truth.
Textures are sampled bilinearly (band-limited noise keeps the resampling
error below test tolerances); opacity masks are sampled nearest-neighbor so
visibility is binary and renders agree exactly with the geometric oracles.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter

from .core import AngularGrid, LightField
from .warping import sample_bilinear


@dataclass(frozen=True)
class TextureSpec:
    """Band-limited procedural texture: smoothed noise plus soft color blobs."""

    seed: int = 0
    smoothness: float = 6.0   # gaussian sigma of the noise band limit, px
    contrast: float = 0.35    # noise amplitude around mid gray
    blotches: int = 4         # count of seeded soft color blobs


@dataclass(frozen=True)
class MaskSpec:
    """Layer opacity mask, binary in the layer's reference frame.

    kinds: "full" (opaque everywhere), "rect" with params (x0, y0, x1, y1)
    as viewport fractions, "disk" with params (cx, cy, r), "blobs" with
    params (coverage,) thresholding seeded smooth noise.
    """

    kind: str = "full"
    params: tuple = ()
    seed: int = 0


@dataclass(frozen=True)
class LayerSpec:
    alpha: float                      # disparity ratio Z/F, > 1
    texture: TextureSpec = field(default_factory=TextureSpec)
    mask: MaskSpec = field(default_factory=MaskSpec)

    @property
    def shift_factor(self) -> float:
        return 1.0 - 1.0 / self.alpha


@dataclass(frozen=True)
class SceneSpec:
    """Layered scene; layers ordered back to front (larger shift on top)."""

    width: int
    height: int
    layers: tuple[LayerSpec, ...]
    channels: int = 3
    baseline: float = 4.0    # px displacement of a unit-shift layer across u in [0,1]
    seed: int = 0

    def __post_init__(self):
        if self.width < 2 or self.height < 2:
            raise ValueError(f"scene must be at least 2x2 px, got {self.width}x{self.height}")
        if self.channels not in (1, 3):
            raise ValueError(f"channels must be 1 or 3, got {self.channels}")
        if self.baseline < 0:
            raise ValueError(f"baseline must be >= 0, got {self.baseline}")
        if len(self.layers) < 1:
            raise ValueError("scene needs at least one layer")
        if self.layers[0].mask.kind != "full":
            raise ValueError("backmost layer must be fully opaque (mask kind 'full')")
        factors = []
        for idx, layer in enumerate(self.layers):
            if layer.alpha <= 1.0:
                raise ValueError(f"layer {idx}: alpha must be > 1, got {layer.alpha}")
            factors.append(abs(layer.shift_factor))
        if any(b <= a for a, b in zip(factors, factors[1:])):
            raise ValueError(
                "layers must be ordered back to front with strictly increasing "
                f"|1 - 1/alpha| shift, got factors {factors}"
            )

    @property
    def pad(self) -> int:
        # covers |u - 0.5| <= 0.5 shifts plus a bilinear guard pixel
        return int(np.ceil(self.baseline)) + 2

    def shift(self, layer_idx: int, u: float, v: float) -> tuple[float, float]:
        """Layer translation (sx, sy) in pixels at viewpoint (u, v)."""
        f = self.layers[layer_idx].shift_factor
        return f * self.baseline * (u - 0.5), f * self.baseline * (v - 0.5)


def _check_coords(u: float, v: float):
    if not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0):
        raise ValueError(f"angular coordinates must lie in [0,1]^2, got ({u}, {v})")


@functools.lru_cache(maxsize=128)
def _layer_raster(spec: SceneSpec, layer_idx: int) -> tuple[np.ndarray, np.ndarray]:
    """Padded (texture, mask) arrays for one layer; deterministic in the seeds."""
    layer = spec.layers[layer_idx]
    pad = spec.pad
    hp, wp = spec.height + 2 * pad, spec.width + 2 * pad

    tex = layer.texture
    rng = np.random.default_rng([spec.seed, layer_idx, tex.seed])
    noise = rng.standard_normal((hp, wp, spec.channels))
    noise = gaussian_filter(noise, sigma=(tex.smoothness, tex.smoothness, 0.0))
    std = noise.std()
    if std > 0:
        noise /= std
    img = 0.5 + tex.contrast * noise

    yy, xx = np.mgrid[0:hp, 0:wp].astype(np.float64)
    for _ in range(tex.blotches):
        cx = rng.uniform(0, wp)
        cy = rng.uniform(0, hp)
        radius = rng.uniform(0.08, 0.25) * min(spec.width, spec.height)
        color = rng.uniform(-0.3, 0.3, size=spec.channels)
        bump = np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2.0 * radius**2))
        img += bump[:, :, None] * color
    # rescale into range smoothly; hard clipping would put kinks in the
    # texture and blow up the bilinear resampling error budget
    dev = img - 0.5
    peak = np.abs(dev).max()
    if peak > 0.46:
        img = 0.5 + dev * (0.46 / peak)

    mask = _raster_mask(layer.mask, spec, hp, wp, layer_idx)
    img.setflags(write=False)
    mask.setflags(write=False)
    return img, mask


def _raster_mask(mspec: MaskSpec, spec: SceneSpec, hp: int, wp: int, layer_idx: int) -> np.ndarray:
    pad = spec.pad
    if mspec.kind == "full":
        return np.ones((hp, wp), dtype=bool)
    yy, xx = np.mgrid[0:hp, 0:wp].astype(np.float64)
    # world coordinates: viewport pixel (0,0) sits at array index (pad, pad)
    wx, wy = xx - pad, yy - pad
    if mspec.kind == "rect":
        x0, y0, x1, y1 = mspec.params
        return (
            (wx >= x0 * spec.width) & (wx < x1 * spec.width)
            & (wy >= y0 * spec.height) & (wy < y1 * spec.height)
        )
    if mspec.kind == "disk":
        cx, cy, r = mspec.params
        rad = r * min(spec.width, spec.height)
        return (wx - cx * spec.width) ** 2 + (wy - cy * spec.height) ** 2 <= rad**2
    if mspec.kind == "blobs":
        coverage = mspec.params[0] if mspec.params else 0.35
        rng = np.random.default_rng([spec.seed, layer_idx, mspec.seed, 7])
        noise = gaussian_filter(rng.standard_normal((hp, wp)), sigma=0.12 * min(hp, wp))
        return noise >= np.quantile(noise, 1.0 - coverage)
    raise ValueError(f"unknown mask kind {mspec.kind!r}")


def _mask_at(spec: SceneSpec, layer_idx: int, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    """Nearest-neighbor opacity of a layer at continuous world coordinates."""
    _, mask = _layer_raster(spec, layer_idx)
    pad = spec.pad
    ix = np.clip(np.rint(px).astype(np.intp) + pad, 0, mask.shape[1] - 1)
    iy = np.clip(np.rint(py).astype(np.intp) + pad, 0, mask.shape[0] - 1)
    return mask[iy, ix]


def visible_layer_index(spec: SceneSpec, u: float, v: float) -> np.ndarray:
    """(H, W) index of the layer visible at each viewport pixel of view (u, v)."""
    _check_coords(u, v)
    yy, xx = np.mgrid[0 : spec.height, 0 : spec.width].astype(np.float64)
    vis = np.zeros((spec.height, spec.width), dtype=np.intp)
    for idx in range(1, len(spec.layers)):
        sx, sy = spec.shift(idx, u, v)
        opaque = _mask_at(spec, idx, xx - sx, yy - sy)
        vis[opaque] = idx
    return vis


def _point_visible(spec, layer_idx, px, py, u, v):
    """Is the scene point (layer, world coord) unoccluded at view (u, v)?

    px/py are arrays of world coordinates of points on layer `layer_idx`.
    """
    visible = np.ones(px.shape, dtype=bool)
    sxl, syl = spec.shift(layer_idx, u, v)
    for idx in range(layer_idx + 1, len(spec.layers)):
        sx, sy = spec.shift(idx, u, v)
        # viewport position of the point, then into the occluder's frame
        blocked = _mask_at(spec, idx, px + sxl - sx, py + syl - sy)
        visible &= ~blocked
    return visible


def render_view(spec: SceneSpec, u: float, v: float) -> np.ndarray:
    """Render one (H, W, C) view: per-pixel topmost layer, bilinear texture."""
    _check_coords(u, v)
    yy, xx = np.mgrid[0 : spec.height, 0 : spec.width].astype(np.float64)
    pad = spec.pad
    out = np.zeros((spec.height, spec.width, spec.channels))
    vis = visible_layer_index(spec, u, v)
    for idx in range(len(spec.layers)):
        sel = vis == idx
        if not sel.any():
            continue
        tex, _ = _layer_raster(spec, idx)
        sx, sy = spec.shift(idx, u, v)
        sampled = sample_bilinear(tex, xx - sx + pad, yy - sy + pad)
        out[sel] = sampled[sel]
    return out


def render_lightfield(spec: SceneSpec, grid: AngularGrid) -> LightField:
    """Render one view per grid cell; deterministic given the spec seeds."""
    views = np.empty((grid.rows, grid.cols, spec.height, spec.width, spec.channels))
    for i in range(grid.rows):
        for j in range(grid.cols):
            u, vv = grid.coords(i, j)
            views[i, j] = render_view(spec, u, vv)
    return LightField(grid, views)


def oracle_adm(spec: SceneSpec, frm: tuple[float, float], to: tuple[float, float]) -> np.ndarray:
    """Ground-truth disparity map warping view `frm` onto the grid of view `to`.

    The returned (H, W, 2) map A satisfies warp(render(frm), A) == render(to)
    wherever the pixel visible at `to` is also visible at `frm`: the value at
    pixel x is the offset from x to the same scene point's position in `frm`,
    i.e. shift_factor * baseline * (u_frm - u_to, v_frm - v_to) of the layer
    visible at `to`.
    """
    _check_coords(*frm)
    _check_coords(*to)
    vis = visible_layer_index(spec, to[0], to[1])
    factors = np.array([layer.shift_factor for layer in spec.layers])
    f = factors[vis]
    adm = np.empty((spec.height, spec.width, 2))
    adm[:, :, 0] = f * spec.baseline * (frm[0] - to[0])
    adm[:, :, 1] = f * spec.baseline * (frm[1] - to[1])
    return adm


def occlusion_mask(
    spec: SceneSpec, target: tuple[float, float], source: tuple[float, float]
) -> np.ndarray:
    """(H, W) bool: pixel visible at `target` is occluded at `source`."""
    _check_coords(*target)
    _check_coords(*source)
    vis = visible_layer_index(spec, *target)
    yy, xx = np.mgrid[0 : spec.height, 0 : spec.width].astype(np.float64)
    occluded = np.zeros((spec.height, spec.width), dtype=bool)
    for idx in range(len(spec.layers) - 1):  # topmost layer is never occluded
        sel = vis == idx
        if not sel.any():
            continue
        sx, sy = spec.shift(idx, *target)
        vis_src = _point_visible(spec, idx, xx - sx, yy - sy, source[0], source[1])
        occluded |= sel & ~vis_src
    return occluded


def oracle_wcm(
    spec: SceneSpec,
    boundary0: tuple[float, float],
    boundary1: tuple[float, float],
    target: tuple[float, float],
) -> tuple[np.ndarray, np.ndarray]:
    """Ground-truth confidence pair (O_{k<-0}, O_{k<-1}) for one boundary pair.

    Pixels occluded at boundary0 get (0, 1), occluded at boundary1 get (1, 0),
    everything else (0.5, 0.5); the pair sums to one everywhere.
    """
    occ0 = occlusion_mask(spec, target, boundary0)
    occ1 = occlusion_mask(spec, target, boundary1)
    o0 = np.full((spec.height, spec.width), 0.5)
    o1 = np.full((spec.height, spec.width), 0.5)
    o0[occ0] = 0.0
    o1[occ0] = 1.0
    o0[occ1] = 1.0
    o1[occ1] = 0.0
    both = occ0 & occ1
    o0[both] = 0.5
    o1[both] = 0.5
    return o0, o1


def single_layer_scene(
    width: int = 128, height: int = 128, alpha: float = 4.0, baseline: float = 4.0,
    seed: int = 0, channels: int = 3,
) -> SceneSpec:
    """Occlusion-free scene: one opaque textured plane."""
    return SceneSpec(
        width=width,
        height=height,
        channels=channels,
        baseline=baseline,
        seed=seed,
        layers=(LayerSpec(alpha=alpha, texture=TextureSpec(seed=1)),),
    )


def two_layer_scene(
    width: int = 128, height: int = 128, alpha_back: float = 1.8, alpha_front: float = 8.0,
    baseline: float = 4.0, seed: int = 0, channels: int = 3,
    occluder: MaskSpec | None = None,
) -> SceneSpec:
    """Textured background plus a rectangular occluder with larger parallax."""
    if occluder is None:
        occluder = MaskSpec(kind="rect", params=(0.3, 0.25, 0.62, 0.7))
    return SceneSpec(
        width=width,
        height=height,
        channels=channels,
        baseline=baseline,
        seed=seed,
        layers=(
            LayerSpec(alpha=alpha_back, texture=TextureSpec(seed=1)),
            LayerSpec(alpha=alpha_front, texture=TextureSpec(seed=2, contrast=0.3), mask=occluder),
        ),
    )
