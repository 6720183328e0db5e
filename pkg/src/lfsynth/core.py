"""Core containers for 4D light fields sampled on a regular angular grid.

Conventions used across the package:

* a view image is a float64 array of shape (H, W, C), C in {1, 3},
  radiance normalized to [0, 1];
* a light field stacks the views as (rows, cols, H, W, C), row-major in
  the angular indices;
* angular coordinates are normalized: grid index (i, j) sits at
  u = j / (cols - 1), v = i / (rows - 1), so the boundary viewpoints are
  pinned at 0 and 1 and an interpolation factor k in (0, 1) is directly a
  grid fraction.  Degenerate single-sample axes map to coordinate 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

HORIZONTAL = "horizontal"
VERTICAL = "vertical"


@dataclass(frozen=True)
class AngularGrid:
    """Regular angular sampling grid (rows of v-samples, cols of u-samples)."""

    rows: int
    cols: int

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"angular grid must be at least 1x1, got {self.rows}x{self.cols}")

    def u(self, j: int) -> float:
        """Normalized u coordinate of column j (0 for a single-column grid)."""
        if not 0 <= j < self.cols:
            raise IndexError(f"grid column {j} out of range [0, {self.cols})")
        return j / (self.cols - 1) if self.cols > 1 else 0.0

    def v(self, i: int) -> float:
        """Normalized v coordinate of row i (0 for a single-row grid)."""
        if not 0 <= i < self.rows:
            raise IndexError(f"grid row {i} out of range [0, {self.rows})")
        return i / (self.rows - 1) if self.rows > 1 else 0.0

    def coords(self, i: int, j: int) -> tuple[float, float]:
        """(u, v) of grid cell (i, j)."""
        return self.u(j), self.v(i)

    @property
    def u_values(self) -> np.ndarray:
        return np.array([self.u(j) for j in range(self.cols)])

    @property
    def v_values(self) -> np.ndarray:
        return np.array([self.v(i) for i in range(self.rows)])


def as_view(image, name: str = "image", check_range: bool = True) -> np.ndarray:
    """Coerce to a float64 (H, W, C) view image, validating invariants."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3 or arr.shape[2] not in (1, 3):
        raise ValueError(f"{name} must have shape (H, W, 1|3), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    if check_range and (arr.min() < 0.0 or arr.max() > 1.0):
        raise ValueError(f"{name} values outside [0, 1]: min={arr.min()}, max={arr.max()}")
    return arr


class LightField:
    """Immutable 4D light field: one (H, W, C) view per angular grid cell."""

    def __init__(self, grid: AngularGrid, views: np.ndarray):
        views = np.array(views, dtype=np.float64)
        if views.ndim != 5:
            raise ValueError(f"views must have shape (rows, cols, H, W, C), got {views.shape}")
        if views.shape[:2] != (grid.rows, grid.cols):
            raise ValueError(
                f"views angular shape {views.shape[:2]} does not match grid "
                f"{grid.rows}x{grid.cols}"
            )
        if views.shape[4] not in (1, 3):
            raise ValueError(f"channel count must be 1 or 3, got {views.shape[4]}")
        if not np.all(np.isfinite(views)):
            raise ValueError("light field contains non-finite radiance values")
        if views.min() < 0.0 or views.max() > 1.0:
            raise ValueError(
                f"radiance outside [0, 1]: min={views.min()}, max={views.max()}"
            )
        views.setflags(write=False)
        self.grid = grid
        self.views = views

    @property
    def height(self) -> int:
        return self.views.shape[2]

    @property
    def width(self) -> int:
        return self.views.shape[3]

    @property
    def channels(self) -> int:
        return self.views.shape[4]

    def __repr__(self):
        return (
            f"LightField({self.grid.rows}x{self.grid.cols} views of "
            f"{self.height}x{self.width}x{self.channels})"
        )


def view_at(lf: LightField, i: int, j: int) -> np.ndarray:
    """Return the stored view at grid cell (i, j), unmodified."""
    if not 0 <= i < lf.grid.rows:
        raise IndexError(f"view row {i} out of range [0, {lf.grid.rows})")
    if not 0 <= j < lf.grid.cols:
        raise IndexError(f"view column {j} out of range [0, {lf.grid.cols})")
    return lf.views[i, j]


class CornerView(NamedTuple):
    i: int
    j: int
    u: float
    v: float
    image: np.ndarray


def corner_views(lf: LightField) -> list[CornerView]:
    """The four corner views with their normalized coordinates.

    Order: (0,0), (0,cols-1), (rows-1,0), (rows-1,cols-1), i.e. coordinates
    (0,0), (1,0), (0,1), (1,1) in (u, v).
    """
    g = lf.grid
    if g.rows < 2 or g.cols < 2:
        raise ValueError(f"corner views need a grid of at least 2x2, got {g.rows}x{g.cols}")
    out = []
    for i in (0, g.rows - 1):
        for j in (0, g.cols - 1):
            u, v = g.coords(i, j)
            out.append(CornerView(i, j, u, v, view_at(lf, i, j)))
    return out


@dataclass(frozen=True)
class EpiImage:
    """2D light field slice: angular axis first, spatial axis second.

    axis "horizontal" fixes (y, v) and varies (x, u); data has shape
    (cols, W, C).  axis "vertical" fixes (x, u) and varies (y, v); data has
    shape (rows, H, C).
    """

    axis: str
    fixed_spatial: int
    fixed_angular: int
    data: np.ndarray


def extract_epi(lf: LightField, axis: str, fixed_spatial: int, fixed_angular: int) -> EpiImage:
    """Slice an EPI out of the light field (lossless copy, no resampling)."""
    if axis == HORIZONTAL:
        if not 0 <= fixed_spatial < lf.height:
            raise IndexError(f"spatial row {fixed_spatial} out of range [0, {lf.height})")
        if not 0 <= fixed_angular < lf.grid.rows:
            raise IndexError(f"angular row {fixed_angular} out of range [0, {lf.grid.rows})")
        data = lf.views[fixed_angular, :, fixed_spatial, :, :].copy()
    elif axis == VERTICAL:
        if not 0 <= fixed_spatial < lf.width:
            raise IndexError(f"spatial column {fixed_spatial} out of range [0, {lf.width})")
        if not 0 <= fixed_angular < lf.grid.cols:
            raise IndexError(f"angular column {fixed_angular} out of range [0, {lf.grid.cols})")
        data = lf.views[:, fixed_angular, :, fixed_spatial, :].copy()
    else:
        raise ValueError(f"axis must be '{HORIZONTAL}' or '{VERTICAL}', got {axis!r}")
    return EpiImage(axis=axis, fixed_spatial=fixed_spatial, fixed_angular=fixed_angular, data=data)
