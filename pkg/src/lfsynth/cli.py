"""Command-line front end: generate, reconstruct, evaluate, linearity, export.

Reports are written as JSON with 6-significant-digit values; alongside each
report the CLI drops a CSV table of the per-item rows and a rendered PNG
figure (suppress with --no-figures).  Thread count for reconstruction is
taken from --threads or the LFSYNTH_THREADS environment variable.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import HORIZONTAL, AngularGrid, extract_epi, view_at
from .disparity import check_linearity, estimate_boundary_adm, select_feature_points
from .lfio import (
    load_adm,
    load_lightfield,
    load_scene_spec,
    read_pfm,
    save_adm,
    save_lightfield,
    save_report,
    sig6,
    write_pfm,
)
from .metrics import (
    capped_psnr,
    combined_loss_report,
    loss_reconstruction,
    loss_smoothness,
    ssim,
)
from .scene import occlusion_mask, oracle_adm, oracle_wcm, render_lightfield, render_view
from .synthesis import reconstruct_dense, separable_conv4d
from .viz import (
    adm_to_rgb,
    epi_to_image,
    render_linearity_figure,
    render_quality_figure,
    save_image,
    wcm_to_rgb,
)
from .warping import warp_residual


def _parse_grid(text: str) -> AngularGrid:
    m = re.fullmatch(r"(\d+)[xX](\d+)", text.strip())
    if m is None:
        raise ValueError(f"grid must look like ROWSxCOLS (e.g. 8x8), got {text!r}")
    return AngularGrid(int(m.group(1)), int(m.group(2)))


def _parse_coords(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"coordinates must look like U,V (e.g. 0.5,0.5), got {text!r}")
    u, v = float(parts[0]), float(parts[1])
    return u, v


def _default_threads() -> int:
    return max(1, int(os.environ.get("LFSYNTH_THREADS", "1")))


def _write_csv(path, fieldnames, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)


# --- generate ----------------------------------------------------------------

def cmd_generate(args) -> int:
    scene = load_scene_spec(args.spec)
    grid = _parse_grid(args.grid)
    lf = render_lightfield(scene, grid)
    save_lightfield(lf, args.out, bit_depth=args.bit_depth, baseline_px=scene.baseline)
    if args.oracle_out:
        odir = Path(args.oracle_out)
        odir.mkdir(parents=True, exist_ok=True)
        for i in range(grid.rows):
            for j in range(grid.cols):
                u, v = grid.coords(i, j)
                tag = f"{i:02d}_{j:02d}"
                save_adm(odir / f"adm_u0_{tag}", oracle_adm(scene, (0.0, v), (u, v)))
                save_adm(odir / f"adm_u1_{tag}", oracle_adm(scene, (1.0, v), (u, v)))
                o0, o1 = oracle_wcm(scene, (0.0, v), (1.0, v), (u, v))
                write_pfm(odir / f"wcm0_{tag}.pfm", o0)
                write_pfm(odir / f"wcm1_{tag}.pfm", o1)
                occ0 = occlusion_mask(scene, (u, v), (0.0, v))
                occ1 = occlusion_mask(scene, (u, v), (1.0, v))
                save_image(odir / f"occ0_{tag}.png", occ0.astype(np.float64))
                save_image(odir / f"occ1_{tag}.png", occ1.astype(np.float64))
    print(f"wrote {grid.rows * grid.cols} views to {args.out}")
    return 0


# --- reconstruct ---------------------------------------------------------------

def _load_refine_kernels(path):
    try:
        doc = json.loads(Path(path).read_text())
        spatial = np.asarray(doc["spatial"], dtype=np.float64)
        angular = np.asarray(doc["angular"], dtype=np.float64)
        scale = float(doc.get("scale", 1.0))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ValueError(f"malformed kernel file {path}: {exc}") from exc
    return spatial, angular, scale


def cmd_reconstruct(args) -> int:
    corner_lf, meta = load_lightfield(args.input)
    scene = load_scene_spec(args.scene) if args.scene else None
    max_disp = args.max_disp
    if max_disp is None and scene is None and meta.get("baseline_px") is not None:
        max_disp = int(np.ceil(meta["baseline_px"])) + 1
    target = _parse_grid(args.target)
    lf = reconstruct_dense(
        corner_lf,
        target,
        estimator=args.estimator,
        scene=scene,
        use_wcm=not args.no_wcm,
        max_disp=max_disp,
        sigma=args.sigma,
        sigma_d=args.sigma_d,
        threads=args.threads,
    )
    if args.refine:
        spatial, angular, scale = _load_refine_kernels(args.refine)
        lf = separable_conv4d(lf, spatial, angular, scale)
    save_lightfield(
        lf,
        args.out,
        bit_depth=meta["bit_depth"],
        baseline_px=meta.get("baseline_px"),
        source=meta.get("source", "synthetic"),
    )
    print(f"reconstructed {target.rows}x{target.cols} light field into {args.out}")
    return 0


# --- evaluate ----------------------------------------------------------------

def evaluate_lightfields(pred_lf, gt_lf, include_corners=False, with_losses=False, max_disp=4):
    """Per-view and mean PSNR/SSIM, optionally the loss terms, as a report dict.

    Losses compare each evaluated view pair directly: the displacement maps
    between prediction and reference are self-estimated, so the warping and
    smoothness terms vanish exactly when the prediction matches the
    reference.  Corner views are excluded by default (they are inputs, not
    synthesized views).
    """
    if pred_lf.grid != gt_lf.grid:
        raise ValueError(f"grids differ: {pred_lf.grid} vs {gt_lf.grid}")
    if pred_lf.views.shape != gt_lf.views.shape:
        raise ValueError(
            f"view shapes differ: {pred_lf.views.shape} vs {gt_lf.views.shape}"
        )
    g = pred_lf.grid
    corners = set()
    if g.rows >= 2 and g.cols >= 2:
        corners = {(0, 0), (0, g.cols - 1), (g.rows - 1, 0), (g.rows - 1, g.cols - 1)}

    per_view = []
    evaluated = []
    for i in range(g.rows):
        for j in range(g.cols):
            u, v = g.coords(i, j)
            p = view_at(pred_lf, i, j)
            t = view_at(gt_lf, i, j)
            synthesized = (i, j) not in corners
            entry = {
                "i": i,
                "j": j,
                "u": sig6(u),
                "v": sig6(v),
                "synthesized": synthesized,
                "psnr_db": sig6(capped_psnr(p, t)),
                "ssim": sig6(ssim(p, t)),
            }
            per_view.append(entry)
            if synthesized or include_corners:
                evaluated.append((entry, p, t))
    if not evaluated:
        raise ValueError("no views left to evaluate")

    mean_psnr = float(np.mean([e["psnr_db"] for e, _, _ in evaluated]))
    mean_ssim = float(np.mean([e["ssim"] for e, _, _ in evaluated]))
    report = {
        "psnr_db": sig6(mean_psnr),
        "ssim": sig6(mean_ssim),
        "l_r": "n/a",
        "l_w": "n/a",
        "l_s": "n/a",
        "l_total": "n/a",
        "perceptual": "n/a",
        "include_corners": bool(include_corners),
        "per_view": per_view,
    }
    if with_losses:
        preds = [p for _, p, _ in evaluated]
        gts = [t for _, _, t in evaluated]
        l_r = loss_reconstruction(preds, gts)
        l_w = 0.0
        l_s = 0.0
        for p, t in zip(preds, gts):
            a_10, a_01 = estimate_boundary_adm(t, p, max_disp)
            l_w += warp_residual(t, p, a_01) + warp_residual(p, t, a_10)
            l_s += loss_smoothness(a_01, a_10)
        l_w /= len(preds)
        l_s /= len(preds)
        combined = combined_loss_report(l_r, l_w, l_s)
        report["l_r"] = sig6(l_r)
        report["l_w"] = sig6(l_w)
        report["l_s"] = sig6(l_s)
        report["l_total"] = sig6(combined["l_total"])
    return report


def cmd_evaluate(args) -> int:
    pred_lf, _ = load_lightfield(args.pred)
    gt_lf, _ = load_lightfield(args.gt)
    report = evaluate_lightfields(
        pred_lf,
        gt_lf,
        include_corners=args.include_corners,
        with_losses=args.losses,
        max_disp=args.max_disp,
    )
    report_path = Path(args.report)
    save_report(report, report_path)
    _write_csv(
        report_path.with_suffix(".csv"),
        ["i", "j", "u", "v", "synthesized", "psnr_db", "ssim"],
        report["per_view"],
    )
    if not args.no_figures:
        render_quality_figure(report, report_path.with_suffix(".png"))
    print(f"mean PSNR {report['psnr_db']} dB, mean SSIM {report['ssim']} -> {report_path}")
    return 0


# --- linearity ------------------------------------------------------------------

def run_linearity_experiment(scene, intervals=6, points=9, estimator="classical", window=7):
    """Shift-vs-interval linear dependence of the boundary disparity estimates.

    Renders views along u at v = 0.5, estimates (or fetches) the map warping
    each view back onto the first one, and tracks the shift magnitude of
    corner-detected feature points across the aperture intervals.
    """
    if intervals < 3:
        raise ValueError(f"need at least 3 intervals for the line fit, got {intervals}")
    if estimator not in ("classical", "oracle"):
        raise ValueError(f"estimator must be 'classical' or 'oracle', got {estimator!r}")
    max_disp = int(np.ceil(scene.baseline)) + 1
    base = render_view(scene, 0.0, 0.5)
    pts = select_feature_points(base, points, margin=max_disp + window)
    maps = []
    for t in range(1, intervals + 1):
        u_t = t / intervals
        if estimator == "oracle":
            maps.append(oracle_adm(scene, (u_t, 0.5), (0.0, 0.5)))
        else:
            other = render_view(scene, u_t, 0.5)
            _, a_01 = estimate_boundary_adm(base, other, max_disp, window)
            maps.append(a_01)
    ticks = list(range(1, intervals + 1))
    result = check_linearity(maps, ticks, pts)
    per_point = []
    for entry in result.per_point:
        px, py = entry.point
        shifts = [float(np.hypot(m[py, px, 0], m[py, px, 1])) for m in maps]
        per_point.append(
            {
                "point": [px, py],
                "r2": sig6(entry.stats.r2),
                "adjusted_r2": sig6(entry.stats.adjusted_r2),
                "pcc": sig6(entry.stats.pcc),
                "intervals": ticks,
                "shifts": [sig6(s) for s in shifts],
            }
        )
    return {
        "estimator": estimator,
        "intervals": intervals,
        "points": points,
        "per_point": per_point,
        "average": {
            "r2": sig6(result.average.r2),
            "adjusted_r2": sig6(result.average.adjusted_r2),
            "pcc": sig6(result.average.pcc),
        },
    }


def cmd_linearity(args) -> int:
    scene = load_scene_spec(args.scene)
    report = run_linearity_experiment(
        scene, intervals=args.intervals, points=args.points, estimator=args.estimator
    )
    report_path = Path(args.report)
    save_report(report, report_path)
    rows = [
        {
            "point": idx + 1,
            "x": entry["point"][0],
            "y": entry["point"][1],
            "r2": entry["r2"],
            "adjusted_r2": entry["adjusted_r2"],
            "pcc": entry["pcc"],
        }
        for idx, entry in enumerate(report["per_point"])
    ]
    rows.append(
        {
            "point": "average",
            "x": "",
            "y": "",
            "r2": report["average"]["r2"],
            "adjusted_r2": report["average"]["adjusted_r2"],
            "pcc": report["average"]["pcc"],
        }
    )
    _write_csv(report_path.with_suffix(".csv"), ["point", "x", "y", "r2", "adjusted_r2", "pcc"], rows)
    if not args.no_figures:
        render_linearity_figure(report, report_path.with_suffix(".png"))
    avg = report["average"]
    print(f"average R2 {avg['r2']} / adjusted {avg['adjusted_r2']} / PCC {avg['pcc']} -> {report_path}")
    return 0


# --- exports ---------------------------------------------------------------------

def cmd_epi(args) -> int:
    lf, _ = load_lightfield(args.input)
    epi = extract_epi(lf, HORIZONTAL, args.row, args.view_row)
    save_image(args.out, epi_to_image(epi, upscale=args.upscale))
    print(f"wrote EPI ({epi.data.shape[0]} views x {epi.data.shape[1]} px) to {args.out}")
    return 0


def cmd_wcm_export(args) -> int:
    out = Path(args.out)
    if args.pfm:
        o = read_pfm(args.pfm)
        save_image(out.with_suffix(".png"), wcm_to_rgb(o))
        save_image(out.with_name(out.stem + "_gray.png"), o[:, :, None])
        print(f"wrote confidence map images for {args.pfm}")
        return 0
    if not args.scene or not args.target:
        raise ValueError("wcm-export needs either --pfm or both --scene and --target")
    scene = load_scene_spec(args.scene)
    u, v = _parse_coords(args.target)
    if args.axis == "u":
        b0, b1 = (0.0, v), (1.0, v)
    else:
        b0, b1 = (u, 0.0), (u, 1.0)
    o0, o1 = oracle_wcm(scene, b0, b1, (u, v))
    for name, o in (("o0", o0), ("o1", o1)):
        save_image(out.with_name(f"{out.stem}_{name}.png"), wcm_to_rgb(o))
        save_image(out.with_name(f"{out.stem}_{name}_gray.png"), o[:, :, None])
        if args.pfm_prefix:
            write_pfm(Path(args.pfm_prefix + f"_{name}.pfm"), o)
    print(f"wrote confidence maps for target ({u}, {v}) along {args.axis}")
    return 0


def cmd_adm_export(args) -> int:
    if args.prefix:
        adm = load_adm(args.prefix)
    else:
        if not args.scene or not args.frm or not args.to:
            raise ValueError("adm-export needs either --prefix or --scene with --from/--to")
        scene = load_scene_spec(args.scene)
        adm = oracle_adm(scene, _parse_coords(args.frm), _parse_coords(args.to))
        if args.pfm_prefix:
            save_adm(args.pfm_prefix, adm)
    save_image(args.out, adm_to_rgb(adm))
    print(f"wrote disparity color coding to {args.out}")
    return 0


# --- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lfsynth",
        description="Occlusion-aware light field view synthesis toolkit",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="render a procedural light field (plus oracles)")
    p.add_argument("--spec", required=True, help="scene spec JSON")
    p.add_argument("--grid", required=True, help="angular grid ROWSxCOLS")
    p.add_argument("--out", required=True, help="output light field directory")
    p.add_argument("--oracle-out", help="directory for oracle ADM/WCM/occlusion exports")
    p.add_argument("--bit-depth", type=int, default=16, choices=(8, 16))
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("reconstruct", help="dense reconstruction from 2x2 corner views")
    p.add_argument("--in", dest="input", required=True, help="2x2 corner light field directory")
    p.add_argument("--target", required=True, help="target grid ROWSxCOLS")
    p.add_argument("--estimator", choices=("classical", "oracle"), default="classical")
    p.add_argument("--scene", help="scene spec JSON (required for the oracle estimator)")
    p.add_argument("--no-wcm", action="store_true", help="uniform 0.5 confidences (ablation)")
    p.add_argument("--refine", help="separable 4D refinement kernel JSON")
    p.add_argument("--max-disp", type=int, default=None)
    p.add_argument("--sigma", type=float, default=0.05, help="photometric confidence width")
    p.add_argument("--sigma-d", type=float, default=1.0, help="disparity-conflict width, px")
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("evaluate", help="PSNR/SSIM (and losses) of one field against another")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--losses", action="store_true")
    p.add_argument("--include-corners", action="store_true")
    p.add_argument("--max-disp", type=int, default=4, help="search range of the loss displacement maps")
    p.add_argument("--report", required=True, help="report JSON path (CSV/PNG written alongside)")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("linearity", help="shift-vs-interval linear dependence experiment")
    p.add_argument("--scene", required=True)
    p.add_argument("--intervals", type=int, default=6)
    p.add_argument("--points", type=int, default=9)
    p.add_argument("--estimator", choices=("classical", "oracle"), default="classical")
    p.add_argument("--report", required=True)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_linearity)

    p = sub.add_parser("epi", help="export a horizontal EPI slice as PNG")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--row", type=int, required=True, help="fixed spatial row y")
    p.add_argument("--view-row", type=int, required=True, help="fixed angular row index")
    p.add_argument("--upscale", type=int, default=1, help="nearest-neighbor angular upscale")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_epi)

    p = sub.add_parser("wcm-export", help="export confidence maps (red/blue + grayscale)")
    p.add_argument("--scene")
    p.add_argument("--target", help="target coordinates U,V")
    p.add_argument("--axis", choices=("u", "v"), default="u")
    p.add_argument("--pfm", help="colorize an existing PFM confidence map instead")
    p.add_argument("--pfm-prefix", help="also dump the oracle maps as PFM")
    p.add_argument("--out", required=True, help="output PNG path or prefix")
    p.set_defaults(func=cmd_wcm_export)

    p = sub.add_parser("adm-export", help="export a disparity map color coding")
    p.add_argument("--scene")
    p.add_argument("--from", dest="frm", help="source view coordinates U,V")
    p.add_argument("--to", help="target view coordinates U,V")
    p.add_argument("--prefix", help="read an existing PFM pair <prefix>_dx/_dy instead")
    p.add_argument("--pfm-prefix", help="also dump the oracle map as PFM")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_adm_export)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
