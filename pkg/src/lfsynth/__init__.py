"""Occlusion-aware light field view synthesis.

Disparity-map algebra between boundary views, confidence-weighted backward
warping, dense reconstruction from corner views, and the measurement
harness (PSNR/SSIM, loss terms, linearity statistics) to verify it all
against procedurally generated light fields with known geometry.
"""

__version__ = "0.1.0"

from .confidence import estimate_wcm_photometric, normalize_pair
from .core import (
    HORIZONTAL,
    VERTICAL,
    AngularGrid,
    EpiImage,
    LightField,
    corner_views,
    extract_epi,
    view_at,
)
from .disparity import (
    check_linearity,
    estimate_boundary_adm,
    estimate_boundary_adm_vertical,
    intermediate_adm_from_source,
    select_feature_points,
)
from .metrics import (
    LossWeights,
    capped_psnr,
    combined_loss_report,
    linear_fit_stats,
    loss_reconstruction,
    loss_smoothness,
    loss_warping,
    psnr,
    ssim,
)
from .scene import (
    LayerSpec,
    MaskSpec,
    SceneSpec,
    TextureSpec,
    occlusion_mask,
    oracle_adm,
    oracle_wcm,
    render_lightfield,
    render_view,
    single_layer_scene,
    two_layer_scene,
    visible_layer_index,
)
from .synthesis import (
    infer_free_space,
    infer_occlusion_aware,
    reconstruct_dense,
    separable_conv4d,
)
from .warping import warp, warp_residual

__all__ = [name for name in dir() if not name.startswith("_")]
