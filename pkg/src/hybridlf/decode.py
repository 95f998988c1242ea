"""Rectangular lenslet multiplexing/demultiplexing and per-view vignetting gains."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import LightField, as_image, gray

__all__ = ["LensletGrid", "mux_rect_lenslet", "decode_rect_lenslet", "vignette_gain"]

VIGNETTE_EPS = 1e-4


@dataclass(frozen=True)
class LensletGrid:
    lenslets_y: int
    lenslets_x: int
    pixels_y: int
    pixels_x: int
    offset_y: int = 0
    offset_x: int = 0

    def __post_init__(self):
        if min(self.lenslets_y, self.lenslets_x, self.pixels_y, self.pixels_x) < 1:
            raise ValueError("lenslet grid counts must be >= 1")
        if self.offset_y < 0 or self.offset_x < 0:
            raise ValueError("lenslet grid offsets must be >= 0")

    @property
    def raw_shape(self) -> tuple[int, int]:
        return (self.lenslets_y * self.pixels_y + self.offset_y,
                self.lenslets_x * self.pixels_x + self.offset_x)


def mux_rect_lenslet(lf: LightField, grid: LensletGrid) -> np.ndarray:
    """Interleave views into a raw mosaic: ``raw[oy + i*U + u, ox + j*V + v] = lf[u, v][i, j]``."""
    U, V, H, W, C = lf.data.shape
    if (U, V) != (grid.pixels_y, grid.pixels_x) or (H, W) != (grid.lenslets_y, grid.lenslets_x):
        raise ValueError(f"light field {lf.data.shape[:4]} does not match grid {grid}")
    rh, rw = grid.raw_shape
    raw = np.zeros((rh, rw, C), dtype=np.float32)
    block = lf.data.transpose(2, 0, 3, 1, 4).reshape(H * U, W * V, C)
    raw[grid.offset_y:, grid.offset_x:] = block
    return raw


def decode_rect_lenslet(raw, grid: LensletGrid) -> LightField:
    """Exact inverse of :func:`mux_rect_lenslet`."""
    raw = as_image(raw)
    if raw.shape[:2] != grid.raw_shape:
        if grid.offset_y >= raw.shape[0] or grid.offset_x >= raw.shape[1]:
            raise ValueError(f"grid offset ({grid.offset_y}, {grid.offset_x}) outside raw image")
        raise ValueError(f"raw image {raw.shape[:2]} does not match grid size {grid.raw_shape}")
    U, V = grid.pixels_y, grid.pixels_x
    H, W = grid.lenslets_y, grid.lenslets_x
    block = raw[grid.offset_y:, grid.offset_x:]
    data = block.reshape(H, U, W, V, raw.shape[2]).transpose(1, 3, 0, 2, 4)
    return LightField(np.ascontiguousarray(data))


def vignette_gain(lf: LightField, eps: float = VIGNETTE_EPS) -> np.ndarray:
    """``(U, V)`` gains that bring each view's mean luma to the centre view's."""
    means = np.array([[float(gray(lf.view(u, v)).astype(np.float64).mean()) for v in range(lf.V)]
                      for u in range(lf.U)])
    center = means[lf.center]
    gains = center / np.maximum(means, eps)
    gains[lf.center] = 1.0
    return gains
