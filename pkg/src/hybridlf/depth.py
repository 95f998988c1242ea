"""Disparity estimation, triangulation and the stereo depth-error model.

Disparity is positive when the right image's content sits to the right of
the left image's, so ``d = f*b/z`` for a rig with the right camera offset by
``b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .core import gray
from .flow import FlowParams, flow_estimate
from .kernels import sad_disparity

__all__ = [
    "StereoGeometry", "DepthErrorModel", "DisparityMap", "ProfileRow", "disparity_from_flow",
    "disparity_block_match", "depth_from_disparity", "disparity_from_depth", "depth_error",
    "max_range", "disparity_profile", "depth_rmse",
]


@dataclass(frozen=True)
class StereoGeometry:
    focal_px: float
    baseline_m: float

    def __post_init__(self):
        if self.focal_px <= 0 or self.baseline_m <= 0:
            raise ValueError("focal length and baseline must be positive")

    @property
    def fb(self) -> float:
        return self.focal_px * self.baseline_m


@dataclass(frozen=True)
class DepthErrorModel:
    eps_d: float = 1.0

    def __post_init__(self):
        if self.eps_d < 0:
            raise ValueError("disparity error must be >= 0")


class DisparityMap(NamedTuple):
    disparity: np.ndarray
    valid: np.ndarray


def disparity_from_flow(left, right, params: FlowParams = FlowParams(), max_vertical: float = 1.0) -> DisparityMap:
    """Horizontal flow component; pixels with more than 1 px vertical motion are invalid."""
    f = flow_estimate(left, right, params)
    return DisparityMap(f[:, :, 0].astype(np.float64), np.abs(f[:, :, 1]) <= max_vertical)


def disparity_block_match(left, right, max_d: int, window: int = 5) -> DisparityMap:
    """Integer SAD block matching over ``[0, max_d]``."""
    left = gray(left)
    right = gray(right)
    if left.shape != right.shape:
        raise ValueError(f"dimension mismatch: {left.shape} vs {right.shape}")
    if window < 3 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 3, got {window}")
    if window > min(left.shape[:2]):
        raise ValueError(f"window {window} exceeds image size {left.shape[:2]}")
    if max_d < 0:
        raise ValueError("max_d must be >= 0")
    disp, valid = sad_disparity(left, right, max_d, window // 2)
    return DisparityMap(disp.astype(np.float64), valid)


def depth_from_disparity(d: DisparityMap, g: StereoGeometry) -> np.ndarray:
    """``z = f*b/d`` where valid and positive, NaN elsewhere."""
    disp = np.asarray(d.disparity, dtype=np.float64)
    ok = np.asarray(d.valid, dtype=bool) & (disp > 0)
    z = np.full(disp.shape, np.nan)
    z[ok] = g.fb / disp[ok]
    return z


def disparity_from_depth(z, g: StereoGeometry):
    z_arr = np.asarray(z, dtype=np.float64)
    if np.any(z_arr <= 0):
        raise ValueError("depth must be positive")
    d = g.fb / z_arr
    return float(d) if d.ndim == 0 else d


def depth_error(z, g: StereoGeometry, m: DepthErrorModel = DepthErrorModel(), mode: str = "exact"):
    """Depth uncertainty caused by a disparity error of ``eps_d`` pixels.

    ``exact``: ``fb/d - fb/(d + eps_d)`` with ``d = fb/z``.
    ``approx``: ``z**2 * eps_d / (f*b)``.
    """
    z_arr = np.asarray(z, dtype=np.float64)
    if np.any(z_arr <= 0):
        raise ValueError("depth must be positive")
    if mode == "exact":
        d = g.fb / z_arr
        err = g.fb / d - g.fb / (d + m.eps_d)
    elif mode == "approx":
        err = z_arr ** 2 * m.eps_d / g.fb
    else:
        raise ValueError(f"mode must be 'exact' or 'approx', got {mode!r}")
    return float(err) if err.ndim == 0 else err


def max_range(g: StereoGeometry, m: DepthErrorModel, error_bound: float) -> float:
    """Largest depth whose approximate error stays within ``error_bound`` metres."""
    if error_bound <= 0:
        raise ValueError("error bound must be positive")
    if m.eps_d == 0:
        return math.inf
    return math.sqrt(error_bound * g.fb / m.eps_d)


class ProfileRow(NamedTuple):
    depth: float
    predicted: float
    measured: float


def disparity_profile(disp: DisparityMap, g: StereoGeometry,
                      objects: Sequence[tuple[float, np.ndarray]]) -> list[ProfileRow]:
    """Predicted ``f*b/z`` against the median measured disparity inside each object mask."""
    if not objects:
        raise ValueError("need at least one target depth")
    rows = []
    for z, mask in objects:
        sel = np.asarray(mask, dtype=bool) & np.asarray(disp.valid, dtype=bool)
        measured = float(np.median(disp.disparity[sel])) if sel.any() else math.nan
        rows.append(ProfileRow(float(z), g.fb / float(z), measured))
    return rows


def depth_rmse(depth: np.ndarray, gt_depth: np.ndarray, mask: np.ndarray) -> float:
    """RMSE over the finite entries of ``depth`` inside ``mask``."""
    sel = np.asarray(mask, dtype=bool) & np.isfinite(depth)
    if not sel.any():
        return math.nan
    return float(np.sqrt(np.mean((depth[sel] - gt_depth[sel]) ** 2)))
