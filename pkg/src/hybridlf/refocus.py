"""Shift-and-sum refocusing, epipolar-plane images and a focus metric."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import LightField, gray
from .kernels import bilinear_sample

__all__ = ["RefocusParams", "refocus", "epi_horizontal", "epi_vertical", "sharpness_vol", "corner_mask"]


@dataclass(frozen=True)
class RefocusParams:
    slope: float = 0.0
    mask: np.ndarray | None = None  # (U, V) bool, None = every view
    normalize: bool = True


def corner_mask(U: int, V: int) -> np.ndarray:
    """Every view except the four angular corners."""
    m = np.ones((U, V), dtype=bool)
    if U > 1 or V > 1:
        for u, v in ((0, 0), (0, V - 1), (U - 1, 0), (U - 1, V - 1)):
            m[u, v] = False
    return m


def refocus(lf: LightField, params: RefocusParams = RefocusParams()) -> np.ndarray:
    """Average views sampled at ``(x + s*(v - v0), y + s*(u - u0))``.

    With ``normalize`` each sample counts only where its unclamped source
    position lies inside the view; pixels no view reaches fall back to the
    plain clamped average.
    """
    mask = np.ones(lf.angular_shape, dtype=bool) if params.mask is None else np.asarray(params.mask, dtype=bool)
    if mask.shape != lf.angular_shape:
        raise ValueError(f"mask shape {mask.shape} does not match {lf.angular_shape}")
    if not mask.any():
        raise ValueError("refocus mask selects no views")
    H, W = lf.spatial_shape
    u0, v0 = lf.center
    s = float(params.slope)
    acc = np.zeros((H, W, lf.channels))
    acc_all = np.zeros((H, W, lf.channels))
    weight = np.zeros((H, W))
    n = 0
    for u, v, img in lf.views():
        if not mask[u, v]:
            continue
        dx = np.full((H, W), s * (v - v0))
        dy = np.full((H, W), s * (u - u0))
        sample, inside = bilinear_sample(img, dx, dy)
        acc_all += sample
        n += 1
        if params.normalize:
            acc += sample * inside[:, :, None]
            weight += inside
    if not params.normalize:
        return (acc_all / n).astype(np.float32)
    out = np.where(weight[:, :, None] > 0, acc / np.maximum(weight, 1)[:, :, None], acc_all / n)
    return out.astype(np.float32)


def epi_horizontal(lf: LightField, y: int, u: int | None = None) -> np.ndarray:
    """V x W slice: row ``y`` of each view along angular row ``u`` (default centre)."""
    u = lf.center[0] if u is None else u
    H = lf.spatial_shape[0]
    if not (0 <= u < lf.U and 0 <= y < H):
        raise IndexError(f"EPI row {y} / angular row {u} out of range")
    return np.ascontiguousarray(lf.data[u, :, y, :, :])


def epi_vertical(lf: LightField, x: int, v: int | None = None) -> np.ndarray:
    """U x H slice: column ``x`` of each view along angular column ``v`` (default centre)."""
    v = lf.center[1] if v is None else v
    W = lf.spatial_shape[1]
    if not (0 <= v < lf.V and 0 <= x < W):
        raise IndexError(f"EPI column {x} / angular column {v} out of range")
    return np.ascontiguousarray(lf.data[:, v, :, x, :])


def sharpness_vol(img) -> float:
    """Variance of the 4-neighbour Laplacian of the luma, interior pixels only."""
    g = gray(img)[:, :, 0].astype(np.float64)
    if g.shape[0] < 3 or g.shape[1] < 3:
        return 0.0
    lap = (g[:-2, 1:-1] + g[2:, 1:-1] + g[1:-1, :-2] + g[1:-1, 2:] - 4.0 * g[1:-1, 1:-1])
    return float(lap.var())
