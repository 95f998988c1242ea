"""Layered fronto-parallel scenes rendered for a camera grid and an offset HR camera.

Every plane is a textured rectangle at depth ``z``.  A camera displaced by
``(ox, oy)`` metres sees the plane's content shifted right by ``f*ox/z``
and down by ``f*oy/z`` pixels.  The zero-offset camera sees each texture
with its top-left corner at the plane's placement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from .core import LightField, as_image, box_downsample

__all__ = [
    "Plane", "SceneSpec", "RigSpec", "RenderedView", "HybridCapture", "make_texture",
    "render_view", "synth_hybrid_capture", "psnr", "default_scene", "planar_scene",
    "staircase_scene", "PSNR_CAP",
]

PSNR_CAP = 99.0


@dataclass(frozen=True)
class Plane:
    depth: float
    texture: np.ndarray
    x: float = 0.0
    y: float = 0.0

    @property
    def size(self) -> tuple[int, int]:
        return self.texture.shape[0], self.texture.shape[1]


@dataclass(frozen=True)
class SceneSpec:
    """Planes ordered near to far in front of a background at infinity."""

    planes: tuple[Plane, ...]
    focal_px: float
    background: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "planes", tuple(self.planes))
        if not self.planes:
            raise ValueError("scene needs at least one plane")
        depths = [p.depth for p in self.planes]
        if depths[0] <= 0 or any(b <= a for a, b in zip(depths, depths[1:])):
            raise ValueError(f"plane depths must be positive and strictly increasing, got {depths}")
        if self.focal_px <= 0:
            raise ValueError("focal length must be positive")

    @property
    def channels(self) -> int:
        return self.background.shape[2]


@dataclass(frozen=True)
class RigSpec:
    U: int = 9
    V: int = 9
    delta_b: float = 0.0005
    hr_offset: float = 0.04
    k: int = 4
    hr_height: int = 384
    hr_width: int = 384
    hr_gamma: float = 1.0
    vignette: float = 0.0

    def __post_init__(self):
        if self.delta_b <= 0 or self.hr_offset <= 0 or self.k < 1 or self.U < 1 or self.V < 1:
            raise ValueError("rig needs positive baselines, k >= 1 and a non-empty grid")
        if self.hr_height % self.k or self.hr_width % self.k:
            raise ValueError(f"HR size {self.hr_height}x{self.hr_width} must divide by k={self.k}")

    @property
    def center(self) -> tuple[int, int]:
        return self.U // 2, self.V // 2

    def view_offset(self, u: int, v: int) -> tuple[float, float]:
        u0, v0 = self.center
        return (v - v0) * self.delta_b, (u - u0) * self.delta_b


class RenderedView(NamedTuple):
    image: np.ndarray
    disparity: np.ndarray  # horizontal shift vs the zero-offset camera, px
    depth: np.ndarray      # metres, inf on the background
    label: np.ndarray      # index of the visible plane, -1 on the background


@dataclass
class HybridCapture:
    lf: LightField          # low-resolution light field
    hr: np.ndarray          # regular camera image
    gt_views: LightField    # views rendered at HR resolution
    gt_disparity: np.ndarray  # centre view -> HR camera, on the centre view's grid
    gt_depth: np.ndarray
    labels: np.ndarray
    scene: SceneSpec
    rig: RigSpec = field(default_factory=RigSpec)

    def per_step_disparity(self, depth: float) -> float:
        """Disparity between neighbouring views in HR pixels."""
        return self.scene.focal_px * self.rig.delta_b / depth


def make_texture(rng: np.random.Generator, h: int, w: int, channels: int = 3,
                 fine: float = 0.45, sigma_fine: float = 1.0, sigma_coarse: float = 4.0) -> np.ndarray:
    """Smooth random colour texture in [0, 1] mixing a fine and a coarse noise scale."""
    base = rng.random((h, w))
    coarse = ndimage.gaussian_filter(base, sigma_coarse, mode="reflect")
    detail = ndimage.gaussian_filter(rng.random((h, w)), sigma_fine, mode="reflect")
    lum = (1 - fine) * _normalize(coarse) + fine * _normalize(detail)
    if channels == 1:
        return _normalize(lum, 0.1, 0.9)[:, :, None].astype(np.float32)
    tint = ndimage.gaussian_filter(rng.random((h, w, channels)), (sigma_coarse * 2, sigma_coarse * 2, 0))
    img = 0.75 * lum[:, :, None] + 0.25 * _normalize(tint)
    return _normalize(img, 0.05, 0.95).astype(np.float32)


def _normalize(a, lo=0.0, hi=1.0):
    a = np.asarray(a, dtype=np.float64)
    span = a.max() - a.min()
    if span == 0:
        return np.full_like(a, 0.5 * (lo + hi))
    return lo + (hi - lo) * (a - a.min()) / span


def _sample(tex: np.ndarray, ty: np.ndarray, tx: np.ndarray) -> np.ndarray:
    out = np.empty(ty.shape + (tex.shape[2],), dtype=np.float64)
    for c in range(tex.shape[2]):
        out[..., c] = ndimage.map_coordinates(tex[:, :, c].astype(np.float64), [ty, tx], order=1, mode="nearest")
    return out


def render_view(scene: SceneSpec, offset, resolution) -> RenderedView:
    """Paint planes far to near for a camera at lateral ``offset`` metres.

    ``offset`` is a horizontal scalar or an ``(ox, oy)`` pair.
    """
    ox, oy = (float(offset), 0.0) if np.isscalar(offset) else map(float, offset)
    H, W = resolution
    f = scene.focal_px
    yy, xx = np.mgrid[0:H, 0:W].astype(np.float64)
    bg = as_image(scene.background)
    img = _sample(bg, np.clip(yy, 0, bg.shape[0] - 1), np.clip(xx, 0, bg.shape[1] - 1))
    disparity = np.zeros((H, W))
    depth = np.full((H, W), np.inf)
    label = np.full((H, W), -1, dtype=np.int64)
    for idx in range(len(scene.planes) - 1, -1, -1):
        p = scene.planes[idx]
        sx, sy = f * ox / p.depth, f * oy / p.depth
        tx = xx - p.x - sx
        ty = yy - p.y - sy
        th, tw = p.size
        cover = (tx >= -0.5) & (tx < tw - 0.5) & (ty >= -0.5) & (ty < th - 0.5)
        if not cover.any():
            continue
        img[cover] = _sample(as_image(p.texture), ty[cover], tx[cover])
        disparity[cover] = sx
        depth[cover] = p.depth
        label[cover] = idx
    return RenderedView(image=img.astype(np.float32), disparity=disparity, depth=depth, label=label)


def synth_hybrid_capture(scene: SceneSpec, rig: RigSpec = RigSpec()) -> HybridCapture:
    """Render all views at HR, box-downsample them into the LR light field, add the HR camera."""
    res = (rig.hr_height, rig.hr_width)
    views = [[render_view(scene, rig.view_offset(u, v), res).image for v in range(rig.V)] for u in range(rig.U)]
    gt = LightField.from_views(views)
    u0, v0 = rig.center
    lr = []
    for u in range(rig.U):
        row = []
        for v in range(rig.V):
            im = box_downsample(gt.view(u, v), rig.k)
            if rig.vignette:
                r2 = ((u - u0) / max(u0, 1)) ** 2 + ((v - v0) / max(v0, 1)) ** 2
                im = im * np.float32(max(1.0 - rig.vignette * r2 / 2.0, 0.0))
            row.append(im)
        lr.append(row)
    hr = render_view(scene, rig.hr_offset, res).image
    if rig.hr_gamma != 1.0:
        hr = np.power(hr, rig.hr_gamma, dtype=np.float32)
    center = render_view(scene, 0.0, res)
    disp_hr = np.where(np.isfinite(center.depth), scene.focal_px * rig.hr_offset / center.depth, 0.0)
    return HybridCapture(lf=LightField.from_views(lr), hr=hr, gt_views=gt, gt_disparity=disp_hr,
                         gt_depth=center.depth, labels=center.label, scene=scene, rig=rig)


def psnr(a, b, cap: float | None = None) -> float:
    """PSNR in dB for unit-interval images; identical inputs give ``inf`` (or ``cap``)."""
    a = as_image(a)
    b = as_image(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    mse = float(np.mean((a.astype(np.float64) - b.astype(np.float64)) ** 2))
    value = math.inf if mse == 0 else 10.0 * math.log10(1.0 / mse)
    return min(value, cap) if cap is not None else value


# ---------------------------------------------------------------------------
# preset scenes
# ---------------------------------------------------------------------------

def default_scene(height: int = 384, width: int = 384, focal_px: float = 1000.0, channels: int = 3,
                  seed: int = 0) -> SceneSpec:
    """Two textured boards in front of a textured wall, desk scale."""
    rng = np.random.default_rng(seed)
    sy, sx = height / 384, width / 384
    margin = int(math.ceil(48 * max(sy, sx)))
    wall = Plane(4.0, make_texture(rng, height + 2 * margin, width + 2 * margin, channels), -margin, -margin)
    near = Plane(1.6, make_texture(rng, int(120 * sy), int(140 * sx), channels), 60 * sx, 70 * sy)
    mid = Plane(2.4, make_texture(rng, int(150 * sy), int(150 * sx), channels), 190 * sx, 170 * sy)
    bg = make_texture(rng, height, width, channels)
    return SceneSpec(planes=(near, mid, wall), focal_px=focal_px, background=bg)


def planar_scene(height: int, width: int, depth: float, focal_px: float, channels: int = 3,
                 seed: int = 0, margin: int = 64) -> SceneSpec:
    """A single textured plane filling the frame (with ``margin`` spare pixels per side)."""
    rng = np.random.default_rng(seed)
    tex = make_texture(rng, height + 2 * margin, width + 2 * margin, channels)
    return SceneSpec(planes=(Plane(depth, tex, -margin, -margin),), focal_px=focal_px,
                     background=make_texture(rng, height, width, channels))


def staircase_scene(depths=(0.4, 0.8, 1.2, 1.6, 2.0, 2.4), wall_depth: float = 3.5, focal_px: float = 700.0,
                    height: int = 160, width: int = 480, block_m: float = 0.06, channels: int = 3,
                    seed: int = 0) -> SceneSpec:
    """Equal-sized blocks (``block_m`` metres wide) at increasing depth, left to right, before a wall.

    Image size of each block follows perspective, ``focal_px * block_m / z``.
    """
    rng = np.random.default_rng(seed)
    sizes = [max(int(round(focal_px * block_m / z)), 4) for z in depths]
    gap = (width - sum(sizes)) / (len(depths) + 1)
    if gap < 0 or max(sizes) > height:
        raise ValueError("blocks do not fit in the frame")
    planes = []
    x = gap
    for z, n in zip(depths, sizes):
        y = (height - n) / 2
        # coarse structure keeps near blocks trackable at the top of the flow pyramid
        tex = make_texture(rng, n, n, channels, fine=0.3, sigma_coarse=max(n / 16, 1.5))
        planes.append(Plane(float(z), tex, x, y))
        x += n + gap
    margin = 64
    planes.append(Plane(wall_depth, make_texture(rng, height + 2 * margin, width + 2 * margin, channels),
                        -margin, -margin))
    return SceneSpec(planes=tuple(planes), focal_px=focal_px, background=make_texture(rng, height, width, channels))
