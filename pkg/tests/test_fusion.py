import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from scipy import ndimage

from conftest import smooth_texture
from hybridlf.core import LightField, box_downsample, resize_bicubic
from hybridlf.fusion import (EnhanceInfo, FusionParams, SubbandLevel, SubbandPyramid, dwt_haar2,
                             enhance_lightfield, fuse, fuse_alpha, fuse_wavelet, idwt_haar2)
from hybridlf.synth import RigSpec, planar_scene, psnr, synth_hybrid_capture


# --- Haar ----------------------------------------------------------------------

def test_haar_hand_cases():
    p = dwt_haar2(np.full((2, 2), 0.3), 1)
    assert p.ll[0, 0] == pytest.approx(0.6)
    lev = p.levels[0]
    assert lev.lh[0, 0] == lev.hl[0, 0] == lev.hh[0, 0] == 0
    p = dwt_haar2(np.array([[0.0, 1.0], [0.0, 1.0]]), 1)
    lev = p.levels[0]
    assert (p.ll[0, 0], lev.lh[0, 0], lev.hl[0, 0], lev.hh[0, 0]) == (1.0, -1.0, 0.0, 0.0)
    np.testing.assert_allclose(idwt_haar2(p), [[0, 1], [0, 1]])


def test_haar_subband_sizes():
    p = dwt_haar2(np.zeros((33, 47)), 3)
    assert [lv.lh.shape for lv in p.levels] == [(17, 24), (9, 12), (5, 6)]
    assert p.ll.shape == (5, 6)


def test_haar_zero_pyramid_and_ramp():
    p = dwt_haar2(np.zeros((7, 5)), 2)
    assert np.all(idwt_haar2(p) == 0)
    ramp = np.add.outer(np.arange(9.0), 0.5 * np.arange(13.0))
    np.testing.assert_allclose(idwt_haar2(dwt_haar2(ramp, 2)), ramp, atol=1e-9)


@given(arrays(np.float64, st.tuples(st.integers(1, 40), st.integers(1, 40)), elements=st.floats(-2, 2)),
       st.integers(1, 4))
def test_haar_perfect_reconstruction(img, levels):
    assert np.abs(idwt_haar2(dwt_haar2(img, levels)) - img).max() <= 1e-6


def test_haar_energy_preserved_on_even_sizes(rng):
    img = rng.standard_normal((16, 8))
    p = dwt_haar2(img, 1)
    lev = p.levels[0]
    energy = (p.ll ** 2).sum() + (lev.lh ** 2).sum() + (lev.hl ** 2).sum() + (lev.hh ** 2).sum()
    assert energy == pytest.approx((img ** 2).sum())


def test_haar_errors():
    with pytest.raises(ValueError):
        dwt_haar2(np.zeros((0, 3)), 1)
    with pytest.raises(ValueError):
        dwt_haar2(np.zeros((4, 4)), 0)
    bad = SubbandPyramid(np.zeros((2, 2)), [SubbandLevel(np.zeros((3, 3)), np.zeros((2, 2)), np.zeros((2, 2)), (4, 4))])
    with pytest.raises(ValueError):
        idwt_haar2(bad)


# --- fusion rules ----------------------------------------------------------------

def test_fusion_params_validation():
    with pytest.raises(ValueError):
        FusionParams(w_hr=0.6, w_lr=0.6)
    with pytest.raises(ValueError):
        FusionParams(method="median")
    with pytest.raises(ValueError):
        FusionParams(levels=0)


def test_alpha_examples(rng):
    x = rng.random((5, 6, 3)).astype(np.float32)
    np.testing.assert_allclose(fuse_alpha(x, x), x, atol=1e-6)
    out = fuse_alpha(np.ones((3, 3, 1)), np.zeros((3, 3, 1)))
    np.testing.assert_allclose(out, 0.55, atol=1e-7)
    np.testing.assert_array_equal(fuse_alpha(x, 1 - x, FusionParams(w_hr=1.0, w_lr=0.0)), x)
    with pytest.raises(ValueError):
        fuse_alpha(x, x[:4])


@given(st.integers(0, 2 ** 31))
def test_alpha_between_inputs(seed):
    rng = np.random.default_rng(seed)
    a, b = rng.random((4, 4, 3)), rng.random((4, 4, 3))
    out = fuse_alpha(a, b)
    assert np.all(out >= np.minimum(a, b) - 1e-6) and np.all(out <= np.maximum(a, b) + 1e-6)


def test_wavelet_examples(rng):
    x = rng.random((21, 18, 3)).astype(np.float32)
    np.testing.assert_allclose(fuse_wavelet(x, x), x, atol=1e-6)
    lr = np.full((32, 32, 1), 0.4, np.float32)
    hr = np.clip(0.4 + (rng.random((32, 32, 1)) - 0.5) * 0.3, 0, 1).astype(np.float32)
    out = fuse_wavelet(hr, lr)
    assert abs(out.mean() - 0.4) <= 1e-3


@given(st.integers(0, 2 ** 31))
def test_wavelet_preserves_lr_mean(seed):
    rng = np.random.default_rng(seed)
    lr = (0.2 + 0.6 * rng.random((24, 24, 3))).astype(np.float32)
    hr = np.clip(lr + (rng.random(lr.shape) - 0.5) * 0.2, 0, 1).astype(np.float32)
    out = fuse_wavelet(hr, lr)
    np.testing.assert_allclose(out.mean(axis=(0, 1)), lr.mean(axis=(0, 1)), atol=1e-3)


def test_fusions_idempotent(rng):
    x = rng.random((10, 10, 1)).astype(np.float32)
    assert np.allclose(fuse(x, x, FusionParams()), x, atol=1e-6)
    assert np.allclose(fuse(x, x, FusionParams(method="wavelet")), x, atol=1e-6)


def test_wavelet_beats_blurred_lr(rng):
    gt = ndimage.gaussian_filter(rng.random((64, 64)), 1.0)[:, :, None].astype(np.float32)
    lr_up = resize_bicubic(box_downsample(gt, 4), 64, 64)
    out = fuse_wavelet(gt, lr_up)
    assert psnr(out, gt) > psnr(lr_up, gt)


# --- enhancement -------------------------------------------------------------

def test_single_view_identity(rng):
    view = smooth_texture(rng, 48, 48, channels=3)
    lf = LightField(view[None, None])
    hr = resize_bicubic(view, 96, 96)
    for method in ("alpha_blend", "wavelet"):
        out = enhance_lightfield(lf, hr, fusion_params=FusionParams(method=method), apply_imf=False)
        assert out.angular_shape == (1, 1) and out.spatial_shape == (96, 96)
        # exact up to the residual flow noise of registering an image with itself
        np.testing.assert_allclose(out.view(0, 0), hr, atol=5e-3)


def test_zero_disparity_center_equals_plain_fusion():
    scene = planar_scene(96, 96, 1e6, 1000.0, seed=2)
    cap = synth_hybrid_capture(scene, RigSpec(U=3, V=3, hr_height=96, hr_width=96))
    info = EnhanceInfo()
    out = enhance_lightfield(cap.lf, cap.hr, info=info)
    assert np.abs(info.registration.center_to_hr).mean() < 0.05
    expected = fuse(info.hr_matched, info.lr_up.center_view(), FusionParams())
    assert np.abs(out.center_view() - expected).mean() < 2e-3


def test_enhance_shapes_and_errors(rng):
    lf = LightField(rng.random((3, 3, 8, 8, 3)).astype(np.float32))
    with pytest.raises(ValueError):
        enhance_lightfield(lf, rng.random((4, 4, 3)))
    with pytest.raises(ValueError):
        enhance_lightfield(lf, rng.random((16, 16, 1)))


def test_enhance_thread_invariant():
    scene = planar_scene(64, 64, 1.0, 1000.0, seed=3)
    cap = synth_hybrid_capture(scene, RigSpec(U=3, V=3, hr_height=64, hr_width=64))
    a = enhance_lightfield(cap.lf, cap.hr, threads=1)
    b = enhance_lightfield(cap.lf, cap.hr, threads=3)
    assert a.data.tobytes() == b.data.tobytes()
