"""Histogram-based intensity matching between two cameras."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import as_image

__all__ = ["N_BINS", "IntensityMatchFunction", "histogram256", "imf_estimate", "imf_apply"]

N_BINS = 256


@dataclass(frozen=True)
class IntensityMatchFunction:
    """Per-channel 256-entry lookup tables, ``lut[c, i]`` is the target intensity of bin i."""

    lut: np.ndarray

    def __post_init__(self):
        lut = np.asarray(self.lut, dtype=np.float64)
        if lut.ndim != 2 or lut.shape[1] != N_BINS:
            raise ValueError(f"lookup must be (C, {N_BINS}), got {lut.shape}")
        if np.any(np.diff(lut, axis=1) < 0) or lut.min() < 0 or lut.max() > 1:
            raise ValueError("lookup must be monotone with entries in [0, 1]")
        lut.setflags(write=False)
        object.__setattr__(self, "lut", lut)

    @property
    def channels(self) -> int:
        return self.lut.shape[0]

    @classmethod
    def identity(cls, channels: int = 3) -> "IntensityMatchFunction":
        return cls(np.tile(bin_centers(), (channels, 1)))


def bin_centers() -> np.ndarray:
    return (np.arange(N_BINS) + 0.5) / N_BINS


def histogram256(img, channel: int = 0) -> np.ndarray:
    img = as_image(img)
    v = img[:, :, channel].astype(np.float64).ravel()
    idx = np.clip(np.floor(v * N_BINS), 0, N_BINS - 1).astype(np.intp)
    return np.bincount(idx, minlength=N_BINS)


def _match_channel(src_hist: np.ndarray, dst_hist: np.ndarray) -> np.ndarray:
    cdf_s = np.cumsum(src_hist) / src_hist.sum()
    cdf_t = np.cumsum(dst_hist) / dst_hist.sum()
    # small slack so equal CDFs computed by different sums still match
    j = np.searchsorted(cdf_t, cdf_s - 1e-12, side="left")
    lut = (np.minimum(j, N_BINS - 1) + 0.5) / N_BINS

    # empty source bins: interpolate between occupied neighbours, hold the
    # end values outside the occupied range
    occupied = np.flatnonzero(src_hist)
    filled = np.interp(np.arange(N_BINS), occupied, lut[occupied])
    return np.maximum.accumulate(np.clip(filled, 0.0, 1.0))


def imf_estimate(source, target) -> IntensityMatchFunction:
    """CDF matching from ``source`` intensities onto ``target``'s distribution."""
    source = as_image(source)
    target = as_image(target)
    if source.shape[2] != target.shape[2]:
        raise ValueError(f"channel mismatch: {source.shape[2]} vs {target.shape[2]}")
    luts = [_match_channel(histogram256(source, c), histogram256(target, c))
            for c in range(source.shape[2])]
    return IntensityMatchFunction(np.stack(luts))


def imf_apply(img, imf: IntensityMatchFunction) -> np.ndarray:
    """Map each pixel through the lookup, interpolating linearly between bin centres.

    Values outside the outermost bin centres continue the end segments, then
    the result is clamped to [0, 1].
    """
    img = as_image(img)
    if img.shape[2] != imf.channels:
        raise ValueError(f"channel mismatch: image {img.shape[2]}, lookup {imf.channels}")
    pos = img.astype(np.float64) * N_BINS - 0.5
    i0 = np.clip(np.floor(pos), 0, N_BINS - 2).astype(np.intp)
    t = pos - i0
    out = np.empty(img.shape, dtype=np.float64)
    for c in range(img.shape[2]):
        lut = imf.lut[c]
        a = lut[i0[:, :, c]]
        b = lut[i0[:, :, c] + 1]
        out[:, :, c] = a + t[:, :, c] * (b - a)
    return np.clip(out, 0.0, 1.0).astype(np.float32)
