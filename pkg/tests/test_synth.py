import math

import numpy as np
import pytest

from hybridlf.core import resize_bicubic
from hybridlf.synth import (PSNR_CAP, Plane, RigSpec, SceneSpec, default_scene, planar_scene, psnr,
                            render_view, staircase_scene, synth_hybrid_capture)


def _scene(rng, planes, f=500.0, h=40, w=60):
    return SceneSpec(planes=planes, focal_px=f, background=rng.random((h, w, 1)).astype(np.float32))


def test_scene_validation(rng):
    tex = np.zeros((4, 4, 1), np.float32)
    with pytest.raises(ValueError):
        _scene(rng, (Plane(2.0, tex), Plane(1.0, tex)))
    with pytest.raises(ValueError):
        _scene(rng, ())
    with pytest.raises(ValueError):
        RigSpec(delta_b=0)
    with pytest.raises(ValueError):
        RigSpec(hr_height=385)


def test_zero_offset_places_textures(rng):
    tex = rng.random((5, 7, 1)).astype(np.float32)
    scene = _scene(rng, (Plane(1.0, tex, x=10, y=3),))
    r = render_view(scene, 0.0, (40, 60))
    np.testing.assert_allclose(r.image[3:8, 10:17], tex, atol=1e-6)
    assert np.all(r.disparity == 0)
    assert np.all(r.label[3:8, 10:17] == 0) and r.label[0, 0] == -1
    assert np.isinf(r.depth[0, 0]) and r.depth[4, 12] == 1.0


def test_single_plane_uniform_disparity(rng):
    scene = planar_scene(32, 32, 2.0, 800.0)
    r = render_view(scene, 0.01, (32, 32))
    np.testing.assert_allclose(r.disparity, 800 * 0.01 / 2.0)
    # shifted content: view at offset b equals the reference moved right by fb/z
    ref = render_view(scene, 0.0, (32, 32)).image
    np.testing.assert_allclose(r.image[:, 4:], ref[:, :-4], atol=1e-6)


def test_painter_order_oracle(rng):
    """Enumerate plane coverage directly and check which plane wins each pixel."""
    near = Plane(1.0, np.full((10, 10, 1), 0.9, np.float32), x=20, y=10)
    far = Plane(2.0, np.full((12, 20, 1), 0.1, np.float32), x=22, y=9)
    scene = _scene(rng, (near, far))
    off = 0.02  # near shifts 10 px, far 5 px
    r = render_view(scene, off, (40, 60))
    xx = np.arange(60)[None, :].repeat(40, 0)
    yy = np.arange(40)[:, None].repeat(60, 1)
    expect = np.full((40, 60), np.inf)
    for p in (far, near):
        s = 500 * off / p.depth
        tx, ty = xx - p.x - s, yy - p.y
        cov = (tx >= -0.5) & (tx < p.size[1] - 0.5) & (ty >= -0.5) & (ty < p.size[0] - 0.5)
        expect[cov] = p.depth
    np.testing.assert_array_equal(r.depth, expect)
    both = np.isfinite(expect) & (expect == 1.0)
    assert np.all(r.image[both] == np.float32(0.9))


def test_capture_k1_and_geometry():
    scene = planar_scene(32, 32, 1.0, 1000.0)
    cap = synth_hybrid_capture(scene, RigSpec(U=3, V=3, k=1, hr_height=32, hr_width=32))
    assert cap.lf.data.tobytes() == cap.gt_views.data.tobytes()
    assert cap.per_step_disparity(1.0) == pytest.approx(1000 * 0.0005)
    np.testing.assert_allclose(cap.gt_disparity, 1000 * 0.04 / 1.0)


def test_lr_loses_information():
    cap = synth_hybrid_capture(planar_scene(64, 64, 2.0, 1000.0), RigSpec(U=3, V=3, hr_height=64, hr_width=64))
    up = resize_bicubic(cap.lf.center_view(), 64, 64)
    assert psnr(up, cap.gt_views.center_view()) < PSNR_CAP
    assert np.isfinite(psnr(up, cap.gt_views.center_view()))


def test_psnr():
    a = np.random.default_rng(0).random((8, 8, 3)).astype(np.float32)
    assert math.isinf(psnr(a, a)) and psnr(a, a, cap=PSNR_CAP) == 99.0
    b = np.clip(a + 0.1, 0, 1)
    assert psnr(a, b) == psnr(b, a)
    assert psnr(np.zeros((10, 10, 1)), np.full((10, 10, 1), 0.1)) == pytest.approx(20.0)
    with pytest.raises(ValueError):
        psnr(a, a[:4])


def test_presets_valid():
    s = default_scene(96, 96)
    assert [p.depth for p in s.planes] == [1.6, 2.4, 4.0]
    st = staircase_scene()
    assert [p.depth for p in st.planes][:6] == pytest.approx([0.4, 0.8, 1.2, 1.6, 2.0, 2.4])
    with pytest.raises(ValueError):
        staircase_scene(width=100)


def test_vignette_and_gamma_options():
    scene = planar_scene(32, 32, 1.0, 1000.0)
    cap = synth_hybrid_capture(scene, RigSpec(U=3, V=3, hr_height=32, hr_width=32, vignette=0.5, hr_gamma=2.0))
    assert cap.lf.view(0, 0).mean() < 0.8 * cap.lf.center_view().mean()
    ref = render_view(scene, 0.04, (32, 32)).image
    np.testing.assert_allclose(cap.hr, ref ** 2, atol=1e-6)
