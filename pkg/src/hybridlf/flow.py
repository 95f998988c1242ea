"""Coarse-to-fine variational optical flow and flow-field utilities.

A flow field is a float32 ``(H, W, 2)`` array on the source grid holding
``(dx, dy)`` in pixels: ``src(x, y)`` corresponds to ``dst(x + dx, y + dy)``.

The estimator minimizes a Charbonnier-penalized brightness constancy term
plus ``alpha`` times a Charbonnier-penalized flow gradient magnitude.  Each
pyramid level runs a few warping (outer) iterations; every outer iteration
linearizes the data term around the current flow and solves for the
increment with iteratively reweighted least squares, each reweighting
solved by red-black SOR.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .core import as_image, gray, resize_bicubic
from .kernels import bilinear_sample, sor_sweeps

__all__ = [
    "FlowParams", "pyramid", "flow_estimate", "flow_compose", "flow_negate_approx",
    "grid_interpolate", "warp_backward", "residual", "Residual", "zero_flow",
    "endpoint_error", "gaussian_blur",
]

_GAUSS5 = np.exp(-0.5 * np.arange(-2, 3) ** 2)
_GAUSS5 /= _GAUSS5.sum()
_DERIV5 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0


@dataclass(frozen=True)
class FlowParams:
    alpha: float = 0.02
    scale: float = 0.5
    min_size: int = 16
    outer_iterations: int = 3
    inner_iterations: int = 3
    sor_sweeps: int = 30
    omega: float = 1.8
    eps: float = 1e-3

    def __post_init__(self):
        if not 0.0 < self.scale < 1.0:
            raise ValueError(f"pyramid scale must be in (0, 1), got {self.scale}")
        if min(self.min_size, self.outer_iterations, self.inner_iterations, self.sor_sweeps) < 1:
            raise ValueError("flow iteration counts and min_size must be >= 1")
        if self.alpha <= 0 or self.eps <= 0:
            raise ValueError("alpha and eps must be positive")

    def with_(self, **kw) -> "FlowParams":
        return replace(self, **kw)


def zero_flow(h: int, w: int) -> np.ndarray:
    return np.zeros((h, w, 2), dtype=np.float32)


def _filter_axis(a: np.ndarray, taps: np.ndarray, axis: int) -> np.ndarray:
    """Correlate along ``axis`` with replicated borders."""
    r = len(taps) // 2
    n = a.shape[axis]
    idx = np.clip(np.arange(-r, n + r), 0, n - 1)
    padded = np.take(a, idx, axis=axis)
    out = np.zeros_like(a, dtype=np.float64)
    for k, t in enumerate(taps):
        if t != 0.0:
            out += t * np.take(padded, np.arange(k, k + n), axis=axis)
    return out


def gaussian_blur(img: np.ndarray) -> np.ndarray:
    """Separable 5-tap Gaussian (sigma 1) with replicated borders, any trailing channels."""
    a = np.asarray(img, dtype=np.float64)
    return _filter_axis(_filter_axis(a, _GAUSS5, 0), _GAUSS5, 1)


def pyramid(img, params: FlowParams = FlowParams()) -> list[np.ndarray]:
    """Gaussian pyramid, finest level first.

    A coarser level is added while its smaller side stays >= ``min_size``.
    """
    img = as_image(img)
    if img.shape[2] != 1:
        raise ValueError("pyramid expects a single-channel image")
    levels = [img]
    while True:
        h, w = levels[-1].shape[:2]
        nh, nw = int(round(h * params.scale)), int(round(w * params.scale))
        if min(nh, nw) < params.min_size:
            break
        levels.append(resize_bicubic(gaussian_blur(levels[-1]), nh, nw))
    return levels


def _gradients(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return _filter_axis(img, _DERIV5, 1), _filter_axis(img, _DERIV5, 0)


def _warp2d(img: np.ndarray, u: np.ndarray, v: np.ndarray):
    out, inside = bilinear_sample(img[:, :, None], u, v)
    return out[:, :, 0], inside


def _solve_level(i1: np.ndarray, i2: np.ndarray, u: np.ndarray, v: np.ndarray, p: FlowParams):
    eps2 = p.eps * p.eps
    h, w = i1.shape
    for _ in range(p.outer_iterations):
        i2w, inside = _warp2d(i2, u, v)
        ix1, iy1 = _gradients(i1)
        ix2, iy2 = _gradients(i2w)
        ix = 0.5 * (ix1 + ix2)
        iy = 0.5 * (iy1 + iy2)
        it = i2w - i1
        valid = inside.astype(np.float64)

        du = np.zeros((h, w))
        dv = np.zeros((h, w))
        for _ in range(p.inner_iterations):
            uu = u + du
            vv = v + dv
            ux = np.zeros((h, w))
            uy = np.zeros((h, w))
            vx = np.zeros((h, w))
            vy = np.zeros((h, w))
            ux[:, :-1] = uu[:, 1:] - uu[:, :-1]
            vx[:, :-1] = vv[:, 1:] - vv[:, :-1]
            uy[:-1, :] = uu[1:, :] - uu[:-1, :]
            vy[:-1, :] = vv[1:, :] - vv[:-1, :]
            phi_s = 0.5 / np.sqrt(ux * ux + uy * uy + vx * vx + vy * vy + eps2)
            r = it + ix * du + iy * dv
            psi_d = valid * 0.5 / np.sqrt(r * r + eps2)

            wx = p.alpha * phi_s
            wy = p.alpha * phi_s
            wx[:, -1] = 0.0
            wy[-1, :] = 0.0
            # smoothness of the flow at the start of this outer iteration
            # enters the right-hand side; the increment stays on the left
            u0x = np.zeros((h, w))
            u0y = np.zeros((h, w))
            v0x = np.zeros((h, w))
            v0y = np.zeros((h, w))
            u0x[:, :-1] = u[:, 1:] - u[:, :-1]
            u0y[:-1, :] = u[1:, :] - u[:-1, :]
            v0x[:, :-1] = v[:, 1:] - v[:, :-1]
            v0y[:-1, :] = v[1:, :] - v[:-1, :]
            div_u = _divergence(wx * u0x, wy * u0y)
            div_v = _divergence(wx * v0x, wy * v0y)

            a11 = psi_d * ix * ix
            a12 = psi_d * ix * iy
            a22 = psi_d * iy * iy
            b1 = -psi_d * ix * it + div_u
            b2 = -psi_d * iy * it + div_v
            sor_sweeps(du, dv, a11, a12, a22, b1, b2, wx, wy, p.sor_sweeps, p.omega)
        u = u + du
        v = v + dv
    return u, v


def _divergence(ex: np.ndarray, ey: np.ndarray) -> np.ndarray:
    """Backward-difference divergence of forward-edge fluxes."""
    div = ex + ey
    div[:, 1:] -= ex[:, :-1]
    div[1:, :] -= ey[:-1, :]
    return div


def flow_estimate(src, dst, params: FlowParams = FlowParams()) -> np.ndarray:
    """Dense flow from ``src`` to ``dst`` (same size; RGB is reduced to luma)."""
    src = gray(src)
    dst = gray(dst)
    if src.shape != dst.shape:
        raise ValueError(f"dimension mismatch: {src.shape} vs {dst.shape}")
    p1 = pyramid(src, params)
    p2 = pyramid(dst, params)
    h, w = p1[-1].shape[:2]
    u = np.zeros((h, w))
    v = np.zeros((h, w))
    for level in range(len(p1) - 1, -1, -1):
        i1 = p1[level][:, :, 0].astype(np.float64)
        i2 = p2[level][:, :, 0].astype(np.float64)
        lh, lw = i1.shape
        if u.shape != (lh, lw):
            sy, sx = lh / u.shape[0], lw / u.shape[1]
            u = resize_bicubic(u, lh, lw)[:, :, 0].astype(np.float64) * sx
            v = resize_bicubic(v, lh, lw)[:, :, 0].astype(np.float64) * sy
        u, v = _solve_level(i1, i2, u, v, params)
    return np.stack([u, v], axis=-1).astype(np.float32)


def _check_flow(f) -> np.ndarray:
    f = np.asarray(f, dtype=np.float32)
    if f.ndim != 3 or f.shape[2] != 2:
        raise ValueError(f"flow field must be (H, W, 2), got {f.shape}")
    return f


def flow_compose(f_ab, f_bc) -> np.ndarray:
    """Chain A->B and B->C: ``f_ac(x) = f_ab(x) + f_bc(x + f_ab(x))``."""
    f_ab = _check_flow(f_ab)
    f_bc = _check_flow(f_bc)
    if f_ab.shape != f_bc.shape:
        raise ValueError(f"dimension mismatch: {f_ab.shape} vs {f_bc.shape}")
    sampled, _ = bilinear_sample(f_bc, f_ab[:, :, 0], f_ab[:, :, 1])
    return (f_ab.astype(np.float64) + sampled).astype(np.float32)


def flow_negate_approx(f) -> np.ndarray:
    """Pointwise negation; an inverse only for small, smooth motion."""
    return -_check_flow(f)


def grid_interpolate(f_left, f_right, f_top, f_bottom, u: int, v: int, angular_shape) -> np.ndarray:
    """Centre->(u, v) flow from the four centre->extreme flows.

    The horizontal part scales the left or right extreme by the fractional
    angular offset of ``v``; the vertical part does the same with top/bottom
    for ``u``.  The two parts add.
    """
    U, V = angular_shape
    if not (0 <= u < U and 0 <= v < V):
        raise IndexError(f"view ({u}, {v}) outside {U}x{V} grid")
    u0, v0 = U // 2, V // 2
    fields = [_check_flow(f) for f in (f_left, f_right, f_top, f_bottom)]
    if any(f.shape != fields[0].shape for f in fields):
        raise ValueError("extreme flows must share one shape")
    f_left, f_right, f_top, f_bottom = fields
    out = np.zeros(f_left.shape, dtype=np.float64)
    if v > v0:
        out += (v - v0) / (V - 1 - v0) * f_right
    elif v < v0:
        out += (v0 - v) / v0 * f_left
    if u > u0:
        out += (u - u0) / (U - 1 - u0) * f_bottom
    elif u < u0:
        out += (u0 - u) / u0 * f_top
    return out.astype(np.float32)


def warp_backward(img, f) -> np.ndarray:
    """Resample ``img`` at ``x + f(x)`` for every pixel ``x`` of the flow's grid."""
    out, _ = warp_backward_masked(img, f)
    return out


def warp_backward_masked(img, f):
    """:func:`warp_backward` that also returns the in-bounds mask of the sample points."""
    img = as_image(img)
    f = _check_flow(f)
    if f.shape[:2] != img.shape[:2]:
        raise ValueError(f"flow grid {f.shape[:2]} does not match image {img.shape[:2]}")
    out, inside = bilinear_sample(img, f[:, :, 0], f[:, :, 1])
    return out.astype(np.float32), inside


class Residual(NamedTuple):
    image: np.ndarray
    mean: float
    max: float


def residual(a, b) -> Residual:
    a = as_image(a)
    b = as_image(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    r = np.abs(a.astype(np.float64) - b.astype(np.float64))
    return Residual(r.astype(np.float32), float(r.mean()), float(r.max()))


def endpoint_error(f, g, border: int = 0) -> float:
    """Mean Euclidean distance between two flow fields, optionally ignoring a border."""
    d = np.asarray(f, dtype=np.float64) - np.asarray(g, dtype=np.float64)
    if border:
        d = d[border:-border, border:-border]
    return float(np.sqrt((d ** 2).sum(axis=-1)).mean())
