"""Pixel containers, resampling primitives and file I/O.

Images are plain ``float32`` arrays of shape ``(H, W, C)`` with C in {1, 3}
(flow fields reuse the layout with C = 2).  A :class:`LightField` wraps a
``(U, V, H, W, C)`` array; ``u`` indexes angular rows top to bottom and
``v`` angular columns left to right.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np

from .kernels import bilinear_sample

__all__ = [
    "LightField", "ImageIOError", "MalformedPNGError", "UnsupportedChannelsError",
    "LFCFormatError", "as_image", "png_read", "png_write", "lfc_read", "lfc_write",
    "luma", "resize_bicubic", "sample_bilinear", "box_downsample",
]

LFC_MAGIC = b"LFC1"
LFC_MAX_BYTES = 1 << 36
_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


class ImageIOError(Exception):
    """Base class for file format errors."""


class MalformedPNGError(ImageIOError):
    pass


class UnsupportedChannelsError(ImageIOError):
    pass


class LFCFormatError(ImageIOError):
    pass


def as_image(data) -> np.ndarray:
    """Coerce ``data`` to a float32 ``(H, W, C)`` array (2-D input gains C=1)."""
    arr = np.asarray(data, dtype=np.float32)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3 or arr.shape[0] < 1 or arr.shape[1] < 1 or arr.shape[2] < 1:
        raise ValueError(f"expected an (H, W, C) image, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class LightField:
    """U x V grid of equally sized views stored as one ``(U, V, H, W, C)`` array."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float32)
        if arr.ndim != 5 or min(arr.shape) < 1:
            raise ValueError(f"light field must be (U, V, H, W, C), got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_views(cls, views) -> "LightField":
        """Build from a nested list ``views[u][v]`` of images."""
        return cls(np.stack([np.stack([as_image(im) for im in row]) for row in views]))

    @property
    def U(self) -> int:
        return self.data.shape[0]

    @property
    def V(self) -> int:
        return self.data.shape[1]

    @property
    def angular_shape(self) -> tuple[int, int]:
        return self.data.shape[0], self.data.shape[1]

    @property
    def spatial_shape(self) -> tuple[int, int]:
        return self.data.shape[2], self.data.shape[3]

    @property
    def channels(self) -> int:
        return self.data.shape[4]

    @property
    def center(self) -> tuple[int, int]:
        return self.U // 2, self.V // 2

    def view(self, u: int, v: int) -> np.ndarray:
        if not (0 <= u < self.U and 0 <= v < self.V):
            raise IndexError(f"view ({u}, {v}) outside {self.U}x{self.V} grid")
        return self.data[u, v]

    def center_view(self) -> np.ndarray:
        return self.view(*self.center)

    def views(self):
        """Yield ``(u, v, image)`` in row-major angular order."""
        for u in range(self.U):
            for v in range(self.V):
                yield u, v, self.data[u, v]

    def map_views(self, fn) -> "LightField":
        return LightField.from_views([[fn(self.data[u, v]) for v in range(self.V)] for u in range(self.U)])


# ---------------------------------------------------------------------------
# PNG
# ---------------------------------------------------------------------------

def png_read(path) -> np.ndarray:
    """Read an 8- or 16-bit grey or RGB PNG into a unit-interval image."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(path)
    raw = path.read_bytes()
    if not raw.startswith(_PNG_SIGNATURE):
        raise MalformedPNGError(f"{path}: not a PNG file")
    arr = cv2.imdecode(np.frombuffer(raw, np.uint8), cv2.IMREAD_UNCHANGED)
    if arr is None:
        raise MalformedPNGError(f"{path}: could not decode PNG")
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.shape[2] == 3:
        arr = arr[:, :, ::-1]
    elif arr.shape[2] != 1:
        raise UnsupportedChannelsError(f"{path}: {arr.shape[2]} channels (need 1 or 3)")
    if arr.dtype == np.uint8:
        scale = 255.0
    elif arr.dtype == np.uint16:
        scale = 65535.0
    else:  # pragma: no cover
        raise MalformedPNGError(f"{path}: unsupported sample type {arr.dtype}")
    return (arr.astype(np.float64) / scale).astype(np.float32)


def quantize8(img) -> np.ndarray:
    """Clamp to [0, 1] and map to bytes with round-half-away-from-zero."""
    v = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0) * 255.0
    return np.floor(v + 0.5).astype(np.uint8)


def _encode_png(arr: np.ndarray, path: Path):
    if arr.shape[2] == 3:
        arr = arr[:, :, ::-1]
    elif arr.shape[2] != 1:
        raise UnsupportedChannelsError(f"cannot write {arr.shape[2]}-channel PNG")
    ok, buf = cv2.imencode(".png", np.ascontiguousarray(arr))
    if not ok:  # pragma: no cover
        raise ImageIOError(f"PNG encoding failed for {path}")
    path.write_bytes(buf.tobytes())


def png_write(img, path):
    """Write an 8-bit PNG."""
    _encode_png(quantize8(as_image(img)), Path(path))


def png_write16(img, path):
    """Write a 16-bit PNG (used for disparity visualizations only)."""
    v = np.clip(np.asarray(as_image(img), dtype=np.float64), 0.0, 1.0) * 65535.0
    _encode_png(np.floor(v + 0.5).astype(np.uint16), Path(path))


# ---------------------------------------------------------------------------
# LFC container
# ---------------------------------------------------------------------------

def lfc_write(lf: LightField | np.ndarray, path):
    """Write the raw float32 payload behind a 28-byte header."""
    data = lf.data if isinstance(lf, LightField) else np.asarray(lf, dtype=np.float32)
    if data.ndim != 5:
        raise ValueError("LFC payload must be 5-D (U, V, H, W, C)")
    header = LFC_MAGIC + struct.pack("<6I", *data.shape, 0)
    payload = np.ascontiguousarray(data, dtype="<f4").tobytes()
    Path(path).write_bytes(header + payload)


def lfc_read(path) -> LightField:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(path)
    raw = path.read_bytes()
    if len(raw) < 28 or raw[:4] != LFC_MAGIC:
        raise LFCFormatError(f"{path}: bad magic")
    U, V, H, W, C, reserved = struct.unpack("<6I", raw[4:28])
    if reserved != 0:
        raise LFCFormatError(f"{path}: reserved header field is {reserved}")
    if min(U, V, H, W, C) < 1:
        raise LFCFormatError(f"{path}: zero dimension in {(U, V, H, W, C)}")
    n_bytes = U * V * H * W * C * 4
    if n_bytes > LFC_MAX_BYTES:
        raise LFCFormatError(f"{path}: dimensions {(U, V, H, W, C)} overflow the size limit")
    if len(raw) - 28 != n_bytes:
        raise LFCFormatError(f"{path}: payload is {len(raw) - 28} bytes, header implies {n_bytes}")
    data = np.frombuffer(raw, dtype="<f4", offset=28).reshape(U, V, H, W, C)
    return LightField(data.astype(np.float32))


# ---------------------------------------------------------------------------
# pixel operations
# ---------------------------------------------------------------------------

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


def luma(img) -> np.ndarray:
    img = as_image(img)
    if img.shape[2] != 3:
        raise ValueError(f"luma needs 3 channels, got {img.shape[2]}")
    y = img.astype(np.float64) @ LUMA_WEIGHTS
    return y[:, :, None].astype(np.float32)


def gray(img) -> np.ndarray:
    """Single-channel version of ``img`` (luma for RGB, passthrough for grey)."""
    img = as_image(img)
    return img if img.shape[2] == 1 else luma(img)


def _cubic_weights(t, a=-0.5):
    t = np.abs(t)
    w = np.where(t <= 1.0, ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0, 0.0)
    w = np.where((t > 1.0) & (t < 2.0), ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a, w)
    return w


def _resample_matrix(n_in: int, n_out: int) -> np.ndarray:
    scale = n_in / n_out
    src = (np.arange(n_out) + 0.5) * scale - 0.5
    base = np.floor(src).astype(np.intp)
    m = np.zeros((n_out, n_in))
    rows = np.arange(n_out)
    for k in range(-1, 3):
        idx = base + k
        w = _cubic_weights(src - idx)
        np.add.at(m, (rows, np.clip(idx, 0, n_in - 1)), w)
    return m


def resize_bicubic(img, out_h: int, out_w: int) -> np.ndarray:
    """Separable Catmull-Rom resampling with edge clamp and pixel-centre alignment."""
    if out_h < 1 or out_w < 1:
        raise ValueError(f"output size must be positive, got {out_h}x{out_w}")
    img = as_image(img)
    h, w, _ = img.shape
    if (h, w) == (out_h, out_w):
        return img.copy()
    ry = _resample_matrix(h, out_h)
    rx = _resample_matrix(w, out_w)
    out = np.einsum("ai,ijc,bj->abc", ry, img.astype(np.float64), rx, optimize=True)
    return out.astype(np.float32)


def sample_bilinear(img, x: float, y: float) -> np.ndarray:
    """Per-channel bilinear sample at column ``x``, row ``y`` (clamped)."""
    img = as_image(img)
    h, w, _ = img.shape
    x = min(max(float(x), 0.0), w - 1.0)
    y = min(max(float(y), 0.0), h - 1.0)
    out, _ = bilinear_sample(img[int(y) : int(y) + 2, int(x) : int(x) + 2],
                             np.array([[x - int(x)]]), np.array([[y - int(y)]]))
    return out[0, 0].astype(np.float32)


def box_downsample(img, k: int) -> np.ndarray:
    """Average non-overlapping k x k blocks; dimensions must divide by k."""
    img = as_image(img)
    h, w, c = img.shape
    if h % k or w % k:
        raise ValueError(f"{h}x{w} not divisible by {k}")
    out = img.astype(np.float64).reshape(h // k, k, w // k, k, c).mean(axis=(1, 3))
    return out.astype(np.float32)
