"""Command-line front end: ``hybridlf <subcommand> [options]``.

Every config key is also a flag (``flow_alpha`` -> ``--flow-alpha``).
Outputs go to ``--out`` (a directory, or a file for single-output stages).
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from pathlib import Path

import numpy as np
from scipy import ndimage

from .config import KEYS, Config, ConfigError
from .core import LightField, as_image, lfc_read, lfc_write, png_read, png_write, png_write16, resize_bicubic
from .decode import LensletGrid, decode_rect_lenslet, vignette_gain
from .depth import (DepthErrorModel, StereoGeometry, disparity_block_match, disparity_from_flow,
                    disparity_profile, max_range)
from .flow import FlowParams, flow_estimate, residual, warp_backward
from .fusion import EnhanceInfo, FusionParams, enhance_lightfield, photomatch_hr, upsample_lightfield
from .occlusion import OcclusionParams, occlusion_fill, occlusion_mask
from .photometric import imf_apply, imf_estimate
from .refocus import RefocusParams, corner_mask, epi_horizontal, epi_vertical, refocus, sharpness_vol
from .synth import (PSNR_CAP, RigSpec, default_scene, planar_scene, psnr, staircase_scene,
                    synth_hybrid_capture)

PROG = "hybridlf"
SUBCOMMANDS = ("synth", "decode", "photomatch", "flow", "enhance", "refocus", "epi", "depth",
               "occlusion", "pipeline")


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"{stage}: {_describe(cause)}")
        self.stage = stage


def _describe(exc: BaseException) -> str:
    if isinstance(exc, FileNotFoundError):
        return f"missing input file {exc.filename or exc}"
    return str(exc) or type(exc).__name__


# ---------------------------------------------------------------------------
# parameter builders
# ---------------------------------------------------------------------------

def flow_params(cfg: Config) -> FlowParams:
    return FlowParams(alpha=cfg.float("flow_alpha"), scale=cfg.float("flow_scale"),
                      min_size=cfg.int("flow_min_size"), outer_iterations=cfg.int("flow_outer"),
                      inner_iterations=cfg.int("flow_inner"), sor_sweeps=cfg.int("flow_sor"),
                      omega=cfg.float("flow_omega"), eps=cfg.float("flow_eps"))


def fusion_params(cfg: Config) -> FusionParams:
    return FusionParams(method=cfg.str("fusion_method"), w_hr=cfg.float("w_hr"), w_lr=cfg.float("w_lr"),
                        levels=cfg.int("wavelet_levels"))


def rig_spec(cfg: Config) -> RigSpec:
    return RigSpec(U=cfg.int("U"), V=cfg.int("V"), delta_b=cfg.float("delta_b"),
                   hr_offset=cfg.float("hr_offset"), k=cfg.int("k"), hr_height=cfg.int("hr_height"),
                   hr_width=cfg.int("hr_width"), hr_gamma=cfg.float("hr_gamma"), vignette=cfg.float("vignette"))


def scene_spec(cfg: Config):
    name = cfg.str("scene")
    h, w, f, seed = cfg.int("hr_height"), cfg.int("hr_width"), cfg.float("focal_px"), cfg.int("seed")
    if name == "default":
        return default_scene(h, w, focal_px=f, seed=seed)
    if name == "planar":
        return planar_scene(h, w, cfg.float("plane_depth"), f, seed=seed)
    if name == "staircase":
        return staircase_scene(focal_px=f, height=h, width=w, seed=seed)
    raise ConfigError(f"unknown scene preset {name!r}")


def _reg_sigma(cfg: Config):
    s = cfg.float("reg_sigma")
    return None if s < 0 else s


def _refocus_mask(cfg: Config, lf: LightField):
    return corner_mask(lf.U, lf.V) if cfg.flag("exclude_corners") else None


def slopes(cfg: Config) -> list[float]:
    lo, hi, step = cfg.float("slope_min"), cfg.float("slope_max"), cfg.float("slope_step")
    if step <= 0 or hi < lo:
        raise ConfigError("slope sweep needs slope_step > 0 and slope_max >= slope_min")
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + i * step, 10) for i in range(n)]


# ---------------------------------------------------------------------------
# I/O helpers
# ---------------------------------------------------------------------------

def load_image(path) -> np.ndarray:
    """PNG, or the centre view of an LFC light field."""
    path = Path(path)
    if path.suffix.lower() == ".lfc":
        return np.array(lfc_read(path).center_view())
    return png_read(path)


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _fmt(x) -> str:
    return f"{x:.6g}" if isinstance(x, float) else str(x)


def _out_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def write_labels(labels: np.ndarray, path):
    png_write(((labels + 1) / 255.0)[:, :, None], path)


def read_labels(path) -> np.ndarray:
    return np.round(png_read(path)[:, :, 0].astype(np.float64) * 255).astype(np.int64) - 1


def read_planes(path) -> dict[int, float]:
    with open(path, newline="") as fh:
        return {int(r["plane"]): float(r["depth_m"]) for r in csv.DictReader(fh)}


def object_masks(labels: np.ndarray, planes: dict[int, float], erode: int = 3):
    """Per-plane masks of what the reference camera sees, eroded away from silhouettes."""
    out = []
    for idx, z in sorted(planes.items(), key=lambda kv: kv[1]):
        m = labels == idx
        if erode:
            m = ndimage.binary_erosion(m, iterations=erode)
        if m.any():
            out.append((z, m))
    return out


def write_disparity(disp: np.ndarray, valid: np.ndarray, out: Path, stem: str = "disparity"):
    """16-bit affine disparity visualization plus the scale needed to invert it."""
    d = np.where(valid, disp, np.nan)
    lo = float(np.nanmin(d)) if np.isfinite(d).any() else 0.0
    hi = float(np.nanmax(d)) if np.isfinite(d).any() else 0.0
    span = hi - lo if hi > lo else 1.0
    png_write16(np.nan_to_num((d - lo) / span, nan=0.0)[:, :, None], out / f"{stem}.png")
    _write_csv(out / f"{stem}_scale.csv", ["offset_px", "scale_px_per_count", "max_count"],
               [[_fmt(lo), _fmt(span / 65535.0), 65535]])


# ---------------------------------------------------------------------------
# stages
# ---------------------------------------------------------------------------

def run_synth(cfg: Config, out: Path):
    scene = scene_spec(cfg)
    rig = rig_spec(cfg)
    cap = synth_hybrid_capture(scene, rig)
    lfc_write(cap.lf, out / "lf.lfc")
    lfc_write(cap.gt_views, out / "gt.lfc")
    png_write(cap.hr, out / "hr.png")
    png_write(cap.lf.center_view(), out / "center.png")
    write_labels(cap.labels, out / "labels.png")
    f = scene.focal_px
    _write_csv(out / "geometry.csv", ["key", "value"], [
        ["focal_px", _fmt(f)], ["delta_b_m", _fmt(rig.delta_b)], ["hr_offset_m", _fmt(rig.hr_offset)],
        ["U", rig.U], ["V", rig.V], ["k", rig.k], ["hr_height", rig.hr_height], ["hr_width", rig.hr_width]])
    _write_csv(out / "planes.csv", ["plane", "depth_m", "hr_disparity_px", "per_step_disparity_px"],
               [[i, _fmt(p.depth), _fmt(f * rig.hr_offset / p.depth), _fmt(f * rig.delta_b / p.depth)]
                for i, p in enumerate(scene.planes)])
    return cap


def run_decode(cfg: Config, raw_path, out: Path):
    raw = png_read(raw_path)
    U, V = cfg.int("lenslet_u"), cfg.int("lenslet_v")
    oy, ox = cfg.int("offset_y"), cfg.int("offset_x")
    grid = LensletGrid((raw.shape[0] - oy) // U, (raw.shape[1] - ox) // V, U, V, oy, ox)
    lf = decode_rect_lenslet(raw, grid)
    lfc_write(lf, out)
    gains = vignette_gain(lf)
    _write_csv(out.with_suffix(".vignette.csv"), ["u", "v", "gain"],
               [[u, v, _fmt(float(gains[u, v]))] for u in range(lf.U) for v in range(lf.V)])
    return lf


def run_photomatch(cfg: Config, hr_path, target_path, out: Path):
    hr = png_read(hr_path)
    if Path(target_path).suffix.lower() == ".lfc":
        matched = photomatch_hr(hr, lfc_read(target_path))
    else:
        matched = imf_apply(hr, imf_estimate(hr, png_read(target_path)))
    png_write(matched, out)
    return matched


def run_flow(cfg: Config, src_path, dst_path, out: Path):
    src, dst = load_image(src_path), load_image(dst_path)
    if dst.shape[:2] != src.shape[:2]:
        src = resize_bicubic(src, *dst.shape[:2])
    f = flow_estimate(src, dst, flow_params(cfg))
    lfc_write(f[None, None], out)
    pre = residual(src, dst)
    post = residual(src, warp_backward(dst, f))
    _write_csv(out.with_suffix(".residual.csv"), ["stage", "mean", "max"],
               [["pre_warp", _fmt(pre.mean), _fmt(pre.max)], ["post_warp", _fmt(post.mean), _fmt(post.max)]])
    return f


def run_enhance(cfg: Config, lf: LightField, hr: np.ndarray, out: Path, apply_imf=None, info=None):
    enhanced = enhance_lightfield(
        lf, hr, flow_params(cfg), fusion_params(cfg),
        apply_imf=cfg.flag("apply_imf") if apply_imf is None else apply_imf,
        apply_vignette=cfg.flag("apply_vignette"), threads=cfg.threads(), info=info,
        reg_sigma=_reg_sigma(cfg))
    lfc_write(enhanced, out)
    if cfg.flag("write_views"):
        vdir = _out_dir(out.with_suffix(""))
        for u, v, img in enhanced.views():
            png_write(img, vdir / f"view_{u:02d}_{v:02d}.png")
    return enhanced


def run_refocus(cfg: Config, lf: LightField, out: Path):
    mask = _refocus_mask(cfg, lf)
    norm = cfg.flag("normalize")
    values = slopes(cfg) if cfg.flag("sweep") else [cfg.float("slope")]
    rows = []
    for i, s in enumerate(values):
        img = refocus(lf, RefocusParams(slope=s, mask=mask, normalize=norm))
        name = f"refocus_{i:03d}.png" if len(values) > 1 else "refocus.png"
        png_write(img, out / name)
        rows.append([i, _fmt(float(s)), _fmt(sharpness_vol(img)), name])
    _write_csv(out / "sharpness.csv", ["index", "slope", "sharpness", "file"], rows)
    return rows


def run_epi(cfg: Config, lf: LightField, out: Path):
    H, W = lf.spatial_shape
    row = cfg.int("epi_row") if cfg.int("epi_row") >= 0 else H // 2
    col = cfg.int("epi_col") if cfg.int("epi_col") >= 0 else W // 2
    u = cfg.int("epi_u") if cfg.int("epi_u") >= 0 else None
    v = cfg.int("epi_v") if cfg.int("epi_v") >= 0 else None
    png_write(epi_horizontal(lf, row, u), out / "epi_horizontal.png")
    png_write(epi_vertical(lf, col, v), out / "epi_vertical.png")


def estimate_disparity(cfg: Config, left, right):
    if cfg.str("depth_method") == "block":
        return disparity_block_match(left, right, cfg.int("max_disparity"), cfg.int("bm_window"))
    if cfg.str("depth_method") != "flow":
        raise ConfigError(f"unknown depth method {cfg.str('depth_method')!r}")
    return disparity_from_flow(left, right, flow_params(cfg), cfg.float("max_vertical"))


def run_depth(cfg: Config, left, right, g: StereoGeometry, out: Path, objects=None):
    if left.shape[:2] != right.shape[:2]:
        left = resize_bicubic(left, *right.shape[:2])
    disp = estimate_disparity(cfg, left, right)
    write_disparity(disp.disparity, disp.valid, out)
    m = DepthErrorModel(cfg.float("eps_d"))
    bound = cfg.float("error_bound")
    _write_csv(out / "range.csv", ["focal_px", "baseline_m", "eps_d", "error_bound_m", "max_range_m"],
               [[_fmt(g.focal_px), _fmt(g.baseline_m), _fmt(m.eps_d), _fmt(bound), _fmt(max_range(g, m, bound))]])
    rows = []
    if objects:
        rows = disparity_profile(disp, g, objects)
        _write_csv(out / "profile.csv", ["depth_m", "predicted_px", "measured_px"],
                   [[_fmt(r.depth), _fmt(r.predicted), _fmt(r.measured)] for r in rows])
    return disp, rows


def run_occlusion(cfg: Config, enhanced, lr, out: Path):
    """Images or light fields; LR input is bicubically resized to the enhanced size."""
    p = OcclusionParams(cfg.float("tau"), cfg.int("dilate"))
    if isinstance(enhanced, LightField):
        if lr.angular_shape != enhanced.angular_shape:
            raise ValueError(f"angular mismatch: {enhanced.angular_shape} vs {lr.angular_shape}")
        if lr.spatial_shape != enhanced.spatial_shape:
            lr = upsample_lightfield(lr, *enhanced.spatial_shape)
        views, rows = [], []
        for u, v, img in enhanced.views():
            mask = occlusion_mask(img, lr.view(u, v), p)
            views.append(occlusion_fill(img, lr.view(u, v), mask))
            rows.append([u, v, int(mask.sum())])
            if (u, v) == enhanced.center:
                png_write(mask[:, :, None].astype(np.float32), out / "mask.png")
        filled = LightField(np.stack(views).reshape(enhanced.data.shape))
        lfc_write(filled, out / "filled.lfc")
        png_write(filled.center_view(), out / "filled.png")
        _write_csv(out / "occlusion.csv", ["u", "v", "masked_pixels"], rows)
        return filled
    enhanced, lr = as_image(enhanced), as_image(lr)
    if lr.shape[:2] != enhanced.shape[:2]:
        lr = resize_bicubic(lr, *enhanced.shape[:2])
    mask = occlusion_mask(enhanced, lr, p)
    filled = occlusion_fill(enhanced, lr, mask)
    png_write(mask[:, :, None].astype(np.float32), out / "mask.png")
    png_write(filled, out / "filled.png")
    return filled


def run_pipeline(cfg: Config, out: Path, lf_path=None, hr_path=None, stage_hook=None):
    """synth/ingest -> photomatch -> enhance -> refocus sweep -> depth profile -> occlusion fill."""
    timings = []
    t_total = time.perf_counter()
    state = {}

    def stage(name, fn):
        if stage_hook:
            stage_hook(name)
        t0 = time.perf_counter()
        try:
            result = fn()
        except Exception as exc:
            raise StageError(name, exc) from exc
        timings.append((name, time.perf_counter() - t0))
        return result

    def ingest():
        if lf_path is not None:
            state["lf"] = lfc_read(lf_path)
            state["hr"] = png_read(hr_path)
            state["g"] = StereoGeometry(cfg.float("focal_px"), cfg.float("baseline_m"))
            state["objects"] = None
        else:
            cap = run_synth(cfg, _out_dir(out / "synth"))
            state.update(lf=cap.lf, hr=cap.hr, cap=cap,
                         g=StereoGeometry(cap.scene.focal_px, cap.rig.hr_offset),
                         objects=object_masks(cap.labels, {i: p.depth for i, p in enumerate(cap.scene.planes)}))

    stage("ingest" if lf_path is not None else "synth", ingest)

    def photomatch():
        hr = photomatch_hr(state["hr"], state["lf"]) if cfg.flag("apply_imf") else as_image(state["hr"])
        png_write(hr, out / "hr_matched.png")
        state["hr_m"] = hr

    stage("photomatch", photomatch)

    def enhance():
        info = EnhanceInfo()
        state["enh"] = run_enhance(cfg, state["lf"], state["hr_m"], out / "enhanced.lfc", apply_imf=False, info=info)
        state["info"] = info
        if "cap" in state:
            gt, lr_up, enh = state["cap"].gt_views, info.lr_up, state["enh"]
            rows = [[u, v, _fmt(psnr(lr_up.view(u, v), gt.view(u, v), PSNR_CAP)),
                     _fmt(psnr(enh.view(u, v), gt.view(u, v), PSNR_CAP))] for u, v, _ in gt.views()]
            _write_csv(out / "psnr.csv", ["u", "v", "bicubic_db", "enhanced_db"], rows)

    stage("enhance", enhance)

    def sweep():
        run_refocus(cfg.override(sweep="1"), state["enh"], _out_dir(out / "refocus"))

    stage("refocus", sweep)

    def depth():
        lr_center = state["info"].lr_up.center_view()
        run_depth(cfg, lr_center, state["hr_m"], state["g"], _out_dir(out / "depth"), state["objects"])

    stage("depth", depth)

    def occlusion():
        run_occlusion(cfg, state["enh"], state["info"].lr_up, _out_dir(out / "occlusion"))

    stage("occlusion", occlusion)

    total = time.perf_counter() - t_total
    _write_csv(out / "manifest.csv", ["stage", "seconds"],
               [[n, f"{s:.3f}"] for n, s in timings] + [["total", f"{total:.3f}"]])
    return timings, total


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _flag_name(key: str) -> str:
    return "--" + key.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file")
    keys = common.add_argument_group("config keys (override the config file)")
    for key in KEYS.values():
        keys.add_argument(_flag_name(key.name), dest=key.name, default=None, metavar=key.kind.upper(),
                          help=f"{key.help} [default {key.default}]")

    parser = argparse.ArgumentParser(prog=PROG, description="Hybrid light field toolkit.")
    sub = parser.add_subparsers(dest="command", metavar="{" + ",".join(SUBCOMMANDS) + "}")
    sub.required = True

    def add(name, help_, *args):
        p = sub.add_parser(name, parents=[common], help=help_)
        for flag, kw in args:
            p.add_argument(flag, **kw)
        return p

    req = dict(required=True)
    add("synth", "render a synthetic hybrid capture", ("--out", req))
    add("decode", "decode a rectangular-lenslet raw PNG", ("--raw", req), ("--out", req))
    add("photomatch", "map an HR image into a light field's colour space",
        ("--hr", req), ("--target", dict(required=True, help="LFC (centre view) or PNG")), ("--out", req))
    add("flow", "estimate flow between two images", ("--src", req), ("--dst", req), ("--out", req))
    add("enhance", "fuse an HR image into a light field", ("--lf", req), ("--hr", req), ("--out", req))
    add("refocus", "shift-and-sum refocus (single slope or --sweep 1)", ("--lf", req), ("--out", req))
    add("epi", "extract horizontal and vertical EPIs", ("--lf", req), ("--out", req))
    add("depth", "disparity and depth profile of a rectified pair",
        ("--left", req), ("--right", req), ("--out", req),
        ("--labels", dict(help="label PNG from synth")), ("--planes", dict(help="planes.csv from synth")))
    add("occlusion", "threshold residual occlusions and fill from the LR field",
        ("--enhanced", req), ("--lr", req), ("--out", req))
    add("pipeline", "run the full chain and write a timing manifest",
        ("--out", req), ("--lf", dict(help="ingest this LFC instead of synthesizing")), ("--hr", {}))
    return parser


def make_config(ns: argparse.Namespace) -> Config:
    cfg = Config.load(ns.config) if ns.config else Config()
    return cfg.override(**{k: getattr(ns, k) for k in KEYS})


def dispatch(ns: argparse.Namespace, cfg: Config):
    cmd = ns.command
    if cmd == "synth":
        run_synth(cfg, _out_dir(ns.out))
    elif cmd == "decode":
        run_decode(cfg, ns.raw, Path(ns.out))
    elif cmd == "photomatch":
        run_photomatch(cfg, ns.hr, ns.target, Path(ns.out))
    elif cmd == "flow":
        run_flow(cfg, ns.src, ns.dst, Path(ns.out))
    elif cmd == "enhance":
        run_enhance(cfg, lfc_read(ns.lf), png_read(ns.hr), Path(ns.out))
    elif cmd == "refocus":
        run_refocus(cfg, lfc_read(ns.lf), _out_dir(ns.out))
    elif cmd == "epi":
        run_epi(cfg, lfc_read(ns.lf), _out_dir(ns.out))
    elif cmd == "depth":
        objects = None
        if ns.labels or ns.planes:
            if not (ns.labels and ns.planes):
                raise ValueError("--labels and --planes must be given together")
            objects = object_masks(read_labels(ns.labels), read_planes(ns.planes))
        g = StereoGeometry(cfg.float("focal_px"), cfg.float("baseline_m"))
        run_depth(cfg, load_image(ns.left), load_image(ns.right), g, _out_dir(ns.out), objects)
    elif cmd == "occlusion":
        lfc_in = Path(ns.enhanced).suffix.lower() == ".lfc"
        enh = lfc_read(ns.enhanced) if lfc_in else png_read(ns.enhanced)
        lr = lfc_read(ns.lr) if lfc_in else load_image(ns.lr)
        run_occlusion(cfg, enh, lr, _out_dir(ns.out))
    elif cmd == "pipeline":
        if (ns.lf is None) != (ns.hr is None):
            raise ValueError("--lf and --hr must be given together")
        timings, total = run_pipeline(cfg, _out_dir(ns.out), ns.lf, ns.hr)
        for name, secs in timings:
            print(f"{name:12s} {secs:8.3f} s")
        print(f"{'total':12s} {total:8.3f} s")


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = make_config(ns)
    except ConfigError as exc:
        print(f"{PROG}: config: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"{PROG}: config: {_describe(exc)}", file=sys.stderr)
        return 2
    try:
        dispatch(ns, cfg)
    except StageError as exc:
        print(f"{PROG}: {ns.command}: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"{PROG}: config: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"{PROG}: {ns.command}: {_describe(exc)}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
