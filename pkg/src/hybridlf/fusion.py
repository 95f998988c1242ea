"""Resolution enhancement: Haar wavelet and alpha-blend fusion of warped HR and LR views."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import cv2
import numpy as np
from scipy import ndimage

from .core import LightField, as_image, resize_bicubic
from .decode import vignette_gain
from .flow import (FlowParams, flow_compose, flow_estimate, flow_negate_approx,
                   grid_interpolate, warp_backward_masked, zero_flow)
from .photometric import imf_apply, imf_estimate

__all__ = [
    "FusionParams", "SubbandLevel", "SubbandPyramid", "dwt_haar2", "idwt_haar2",
    "fuse_alpha", "fuse_wavelet", "fuse", "Registration", "register", "enhance_lightfield",
    "EnhanceInfo", "upsample_lightfield", "registration_inputs", "photomatch_hr", "area_resize",
]

ALPHA_BLEND = "alpha_blend"
WAVELET = "wavelet"


@dataclass(frozen=True)
class FusionParams:
    method: str = ALPHA_BLEND
    w_hr: float = 0.55
    w_lr: float = 0.45
    levels: int = 2

    def __post_init__(self):
        if self.method not in (ALPHA_BLEND, WAVELET):
            raise ValueError(f"unknown fusion method {self.method!r}")
        if not (0.0 <= self.w_hr <= 1.0 and 0.0 <= self.w_lr <= 1.0) or abs(self.w_hr + self.w_lr - 1.0) > 1e-9:
            raise ValueError(f"fusion weights must lie in [0, 1] and sum to 1, got {self.w_hr}, {self.w_lr}")
        if self.levels < 1:
            raise ValueError("wavelet levels must be >= 1")


# ---------------------------------------------------------------------------
# orthonormal 2-D Haar
# ---------------------------------------------------------------------------

@dataclass
class SubbandLevel:
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray
    shape: tuple[int, int]  # size of the input to this level, before padding


@dataclass
class SubbandPyramid:
    ll: np.ndarray
    levels: list[SubbandLevel] = field(default_factory=list)  # finest first


def dwt_haar2(img, levels: int) -> SubbandPyramid:
    """Multi-level Haar transform of a 2-D array.

    Odd sizes are padded by replicating the last row/column before each
    level; :func:`idwt_haar2` crops it back off.
    """
    a = np.asarray(img, dtype=np.float64)
    if a.ndim == 3 and a.shape[2] == 1:
        a = a[:, :, 0]
    if a.ndim != 2 or a.size == 0:
        raise ValueError(f"dwt needs a non-empty 2-D array, got shape {a.shape}")
    if levels < 1:
        raise ValueError("levels must be >= 1")
    out = []
    for _ in range(levels):
        h, w = a.shape
        if h % 2:
            a = np.vstack([a, a[-1:]])
        if w % 2:
            a = np.hstack([a, a[:, -1:]])
        p, q = a[0::2, 0::2], a[0::2, 1::2]
        r, s = a[1::2, 0::2], a[1::2, 1::2]
        ll = (p + q + r + s) / 2.0
        out.append(SubbandLevel(lh=(p - q + r - s) / 2.0, hl=(p + q - r - s) / 2.0,
                                hh=(p - q - r + s) / 2.0, shape=(h, w)))
        a = ll
    return SubbandPyramid(ll=a, levels=out)


def idwt_haar2(pyr: SubbandPyramid) -> np.ndarray:
    a = np.asarray(pyr.ll, dtype=np.float64)
    for lev in reversed(pyr.levels):
        if not (a.shape == lev.lh.shape == lev.hl.shape == lev.hh.shape):
            raise ValueError("malformed subband pyramid")
        h, w = lev.shape
        if not (math.ceil(h / 2), math.ceil(w / 2)) == a.shape:
            raise ValueError("malformed subband pyramid")
        full = np.empty((2 * a.shape[0], 2 * a.shape[1]))
        full[0::2, 0::2] = (a + lev.lh + lev.hl + lev.hh) / 2.0
        full[0::2, 1::2] = (a - lev.lh + lev.hl - lev.hh) / 2.0
        full[1::2, 0::2] = (a + lev.lh - lev.hl - lev.hh) / 2.0
        full[1::2, 1::2] = (a - lev.lh - lev.hl + lev.hh) / 2.0
        a = full[:h, :w]
    return a


# ---------------------------------------------------------------------------
# fusion
# ---------------------------------------------------------------------------

def _pair(hr, lr):
    hr = as_image(hr)
    lr = as_image(lr)
    if hr.shape != lr.shape:
        raise ValueError(f"dimension mismatch: {hr.shape} vs {lr.shape}")
    return hr, lr


def fuse_alpha(hr_warped, lr_up, params: FusionParams = FusionParams()) -> np.ndarray:
    hr, lr = _pair(hr_warped, lr_up)
    out = params.w_hr * hr.astype(np.float64) + params.w_lr * lr.astype(np.float64)
    return np.clip(out, 0.0, 1.0).astype(np.float32)


def fuse_wavelet(hr_warped, lr_up, params: FusionParams = FusionParams(method=WAVELET)) -> np.ndarray:
    """Keep the LR view's coarsest approximation band, take every detail band from HR."""
    hr, lr = _pair(hr_warped, lr_up)
    out = np.empty(hr.shape, dtype=np.float64)
    for c in range(hr.shape[2]):
        p_hr = dwt_haar2(hr[:, :, c], params.levels)
        p_lr = dwt_haar2(lr[:, :, c], params.levels)
        p_hr.ll = p_lr.ll
        out[:, :, c] = idwt_haar2(p_hr)
    return np.clip(out, 0.0, 1.0).astype(np.float32)


def fuse(hr_warped, lr_up, params: FusionParams) -> np.ndarray:
    if params.method == WAVELET:
        return fuse_wavelet(hr_warped, lr_up, params)
    return fuse_alpha(hr_warped, lr_up, params)


# ---------------------------------------------------------------------------
# registration and the enhancement pipeline
# ---------------------------------------------------------------------------

FlowEstimator = Callable[[np.ndarray, np.ndarray, FlowParams], np.ndarray]


def upsample_lightfield(lf: LightField, h: int, w: int) -> LightField:
    return lf.map_views(lambda im: resize_bicubic(im, h, w))


@dataclass
class Registration:
    """Centre->HR flow plus the four centre->extreme flows of an upsampled light field."""

    angular_shape: tuple[int, int]
    center_to_hr: np.ndarray
    left: np.ndarray
    right: np.ndarray
    top: np.ndarray
    bottom: np.ndarray
    intra_estimates: int = 0
    cross_estimates: int = 0

    def center_to_view(self, u: int, v: int) -> np.ndarray:
        return grid_interpolate(self.left, self.right, self.top, self.bottom, u, v, self.angular_shape)

    def view_to_hr(self, u: int, v: int) -> np.ndarray:
        """Warp field on view (u, v)'s grid pointing into the HR image."""
        to_center = flow_negate_approx(self.center_to_view(u, v))
        return flow_compose(to_center, self.center_to_hr)


def register(src: LightField, hr, flow_params: FlowParams = FlowParams(),
             estimator: FlowEstimator = flow_estimate) -> Registration:
    """Estimate the centre->HR flow and the four centre->extreme flows."""
    U, V = src.angular_shape
    u0, v0 = src.center
    center = src.center_view()
    h, w = src.spatial_shape
    intra = 0

    def extreme(u, v):
        nonlocal intra
        if (u, v) == (u0, v0):
            return zero_flow(h, w)
        intra += 1
        return estimator(center, src.view(u, v), flow_params)

    left, right = extreme(u0, 0), extreme(u0, V - 1)
    top, bottom = extreme(0, v0), extreme(U - 1, v0)
    c2hr = estimator(center, hr, flow_params)
    return Registration((U, V), c2hr, left, right, top, bottom, intra_estimates=intra, cross_estimates=1)


@dataclass
class EnhanceInfo:
    intra_estimates: int = 0
    cross_estimates: int = 0
    registration: Registration | None = None
    lr_up: LightField | None = None
    hr_matched: np.ndarray | None = None


def area_resize(img, h: int, w: int) -> np.ndarray:
    """Pixel-area averaging resize (for shrinking)."""
    img = as_image(img)
    return cv2.resize(img, (w, h), interpolation=cv2.INTER_AREA).reshape(h, w, img.shape[2])


def photomatch_hr(hr, lf: LightField) -> np.ndarray:
    """Map ``hr`` into the colour space of the centre view.

    Histograms are compared at the view resolution so the LR blur does not
    read as a contrast difference.
    """
    hr = as_image(hr)
    h, w = lf.spatial_shape
    return imf_apply(hr, imf_estimate(area_resize(hr, h, w), lf.center_view()))


def registration_inputs(lf_up: LightField, hr: np.ndarray, lr_shape, sigma: float | None = None):
    """Images the flows are estimated on.

    The HR image is area-averaged down to the LR view size and bicubically
    resized back so both sides share the LR blur; then both sides get a
    Gaussian prefilter (default sigma 0.5 x the scale ratio) that damps
    the aliased band of the box-sampled views.
    """
    H, W = hr.shape[:2]
    h, w = lr_shape
    ratio = max(H / h, W / w)
    if sigma is None:
        sigma = 0.5 * ratio if ratio > 1 else 0.0
    hr_reg = hr
    if (h, w) != (H, W):
        hr_reg = resize_bicubic(area_resize(hr, h, w), H, W)
    if sigma > 0:
        blur = lambda im: ndimage.gaussian_filter(im, (sigma, sigma, 0), mode="nearest").astype(np.float32)
        return lf_up.map_views(blur), blur(hr_reg)
    return lf_up, hr_reg


def enhance_lightfield(lf: LightField, hr, flow_params: FlowParams = FlowParams(),
                       fusion_params: FusionParams = FusionParams(), apply_imf: bool = True,
                       apply_vignette: bool = False, threads: int = 1,
                       estimator: FlowEstimator = flow_estimate,
                       info: EnhanceInfo | None = None, reg_sigma: float | None = None) -> LightField:
    """Fuse ``hr`` into every view of ``lf``; the result has ``hr``'s spatial size.

    Pixels whose warp source falls outside the HR frame keep the upsampled
    LR value, since the HR camera did not see them.
    """
    hr = as_image(hr)
    H, W = hr.shape[:2]
    h, w = lf.spatial_shape
    if H < h or W < w:
        raise ValueError(f"HR image {H}x{W} is smaller than the views {h}x{w}")
    if hr.shape[2] != lf.channels:
        raise ValueError(f"channel mismatch: HR {hr.shape[2]}, light field {lf.channels}")

    if apply_imf:
        hr = photomatch_hr(hr, lf)
    lf_up = upsample_lightfield(lf, H, W)
    flow_views = lf_up
    if apply_vignette:
        gains = vignette_gain(lf_up)
        flow_views = LightField(np.clip(lf_up.data * gains[:, :, None, None, None], 0.0, 1.0))
    flow_views, hr_reg = registration_inputs(flow_views, hr, (h, w), reg_sigma)
    reg = register(flow_views, hr_reg, flow_params, estimator)

    def one(uv):
        u, v = uv
        lr = lf_up.view(u, v)
        warped, inside = warp_backward_masked(hr, reg.view_to_hr(u, v))
        fused = fuse(warped, lr, fusion_params)
        return np.where(inside[:, :, None], fused, lr)

    coords = [(u, v) for u in range(lf.U) for v in range(lf.V)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, coords))
    else:
        results = [one(uv) for uv in coords]
    out = np.stack(results).reshape(lf.U, lf.V, H, W, lf.channels)

    if info is not None:
        info.intra_estimates = reg.intra_estimates
        info.cross_estimates = reg.cross_estimates
        info.registration = reg
        info.lr_up = lf_up
        info.hr_matched = hr
    return LightField(out)
