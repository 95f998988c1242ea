"""Residual-threshold occlusion detection and fill from the original view."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import as_image

__all__ = ["OcclusionParams", "occlusion_mask", "occlusion_fill"]


@dataclass(frozen=True)
class OcclusionParams:
    tau: float = 0.175
    dilate: int = 0

    def __post_init__(self):
        if not 0.0 < self.tau < 1.0:
            raise ValueError(f"threshold must be in (0, 1), got {self.tau}")
        if self.dilate < 0:
            raise ValueError("dilation radius must be >= 0")


def _pair(a, b):
    a = as_image(a)
    b = as_image(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a, b


def occlusion_mask(enhanced, lr_up, params: OcclusionParams = OcclusionParams()) -> np.ndarray:
    """True where any channel differs by strictly more than ``tau``."""
    a, b = _pair(enhanced, lr_up)
    diff = np.abs(a.astype(np.float64) - b.astype(np.float64)).max(axis=2)
    mask = diff > params.tau
    if params.dilate:
        mask = ndimage.binary_dilation(mask, iterations=params.dilate)
    return mask


def occlusion_fill(enhanced, lr_up, mask) -> np.ndarray:
    a, b = _pair(enhanced, lr_up)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != a.shape[:2]:
        raise ValueError(f"mask {mask.shape} does not match image {a.shape[:2]}")
    return np.where(mask[:, :, None], b, a)
