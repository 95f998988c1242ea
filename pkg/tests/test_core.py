import struct

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from hybridlf.core import (LFCFormatError, LightField, MalformedPNGError, UnsupportedChannelsError,
                           as_image, box_downsample, lfc_read, lfc_write, luma, png_read, png_write,
                           png_write16, quantize8, resize_bicubic, sample_bilinear)

import cv2


def _cubic(t, a=-0.5):
    t = abs(t)
    if t <= 1:
        return (a + 2) * t ** 3 - (a + 3) * t ** 2 + 1
    if t < 2:
        return a * t ** 3 - 5 * a * t ** 2 + 8 * a * t - 4 * a
    return 0.0


def bicubic_oracle(img, oh, ow):
    """Direct per-pixel Catmull-Rom evaluation with clamped taps."""
    h, w = img.shape
    out = np.zeros((oh, ow))
    for i in range(oh):
        sy = (i + 0.5) * h / oh - 0.5
        for j in range(ow):
            sx = (j + 0.5) * w / ow - 0.5
            acc = 0.0
            for m in range(int(np.floor(sy)) - 1, int(np.floor(sy)) + 3):
                for n in range(int(np.floor(sx)) - 1, int(np.floor(sx)) + 3):
                    acc += _cubic(sy - m) * _cubic(sx - n) * img[min(max(m, 0), h - 1), min(max(n, 0), w - 1)]
            out[i, j] = acc
    return out


# --- PNG ---------------------------------------------------------------------

def test_png_full_scale_and_zero(tmp_path):
    for value, expect in ((255, 1.0), (0, 0.0)):
        cv2.imwrite(str(tmp_path / "p.png"), np.array([[value]], np.uint8))
        img = png_read(tmp_path / "p.png")
        assert img.shape == (1, 1, 1) and img[0, 0, 0] == expect


def test_png_16bit_input(tmp_path):
    cv2.imwrite(str(tmp_path / "p.png"), np.array([[65535, 0]], np.uint16))
    assert png_read(tmp_path / "p.png")[0, :, 0].tolist() == [1.0, 0.0]


def test_png_round_trip_within_one_level(tmp_path, rng):
    img = rng.random((16, 16, 3)).astype(np.float32)
    png_write(img, tmp_path / "r.png")
    back = png_read(tmp_path / "r.png")
    assert back.shape == img.shape
    assert np.abs(back - img).max() <= 1 / 255 + 1e-7
    np.testing.assert_array_equal(back, quantize8(img) / np.float32(255))


def test_png_rgb_channel_order(tmp_path):
    img = np.zeros((1, 1, 3), np.float32)
    img[0, 0] = (1.0, 0.0, 0.0)
    png_write(img, tmp_path / "c.png")
    assert png_read(tmp_path / "c.png")[0, 0].tolist() == [1.0, 0.0, 0.0]


def test_quantization_rules():
    q = quantize8(np.array([[[0.5], [1.0], [-0.2], [1.7]]]))
    assert q[0, :, 0].tolist() == [128, 255, 0, 255]


def test_png_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        png_read(tmp_path / "missing.png")
    (tmp_path / "bad.png").write_bytes(b"not a png at all")
    with pytest.raises(MalformedPNGError):
        png_read(tmp_path / "bad.png")
    (tmp_path / "trunc.png").write_bytes(b"\x89PNG\r\n\x1a\n" + b"\0" * 10)
    with pytest.raises(MalformedPNGError):
        png_read(tmp_path / "trunc.png")
    cv2.imwrite(str(tmp_path / "rgba.png"), np.zeros((2, 2, 4), np.uint8))
    with pytest.raises(UnsupportedChannelsError):
        png_read(tmp_path / "rgba.png")
    with pytest.raises(OSError):
        png_write(np.zeros((2, 2, 1)), tmp_path / "no" / "such" / "dir.png")
    # the error kinds are distinct
    assert len({FileNotFoundError, MalformedPNGError, UnsupportedChannelsError}) == 3


def test_png16_writer(tmp_path):
    png_write16(np.array([[[0.0], [1.0], [0.5]]]), tmp_path / "d.png")
    raw = cv2.imread(str(tmp_path / "d.png"), cv2.IMREAD_UNCHANGED)
    assert raw.dtype == np.uint16 and raw.ravel().tolist() == [0, 65535, 32768]


# --- LFC ---------------------------------------------------------------------

def test_lfc_header_and_payload_length(tmp_path):
    lf = LightField(np.zeros((3, 3, 4, 4, 1), np.float32))
    lfc_write(lf, tmp_path / "a.lfc")
    raw = (tmp_path / "a.lfc").read_bytes()
    assert raw[:4] == b"LFC1"
    assert struct.unpack("<6I", raw[4:28]) == (3, 3, 4, 4, 1, 0)
    assert len(raw) - 28 == 3 * 3 * 4 * 4 * 1 * 4


@given(arrays(np.float32, st.tuples(st.integers(1, 3), st.integers(1, 3), st.integers(1, 5),
                                    st.integers(1, 5), st.sampled_from([1, 2, 3])),
              elements=st.floats(-1e6, 1e6, width=32)))
def test_lfc_round_trip_bit_exact(tmp_path_factory, data):
    path = tmp_path_factory.mktemp("lfc") / "x.lfc"
    lfc_write(LightField(data), path)
    back = lfc_read(path).data
    assert back.dtype == np.float32
    assert back.tobytes() == np.ascontiguousarray(data).tobytes()


def test_lfc_errors(tmp_path, rng):
    lf = LightField(rng.random((2, 2, 3, 3, 1)).astype(np.float32))
    p = tmp_path / "a.lfc"
    lfc_write(lf, p)
    raw = p.read_bytes()
    (tmp_path / "magic.lfc").write_bytes(b"XFC1" + raw[4:])
    (tmp_path / "trunc.lfc").write_bytes(raw[:-4])
    (tmp_path / "huge.lfc").write_bytes(b"LFC1" + struct.pack("<6I", 65535, 65535, 65535, 65535, 3, 0))
    (tmp_path / "zero.lfc").write_bytes(b"LFC1" + struct.pack("<6I", 0, 1, 1, 1, 1, 0))
    (tmp_path / "resv.lfc").write_bytes(b"LFC1" + struct.pack("<6I", 2, 2, 3, 3, 1, 7) + raw[28:])
    for name in ("magic", "trunc", "huge", "zero", "resv"):
        with pytest.raises(LFCFormatError):
            lfc_read(tmp_path / f"{name}.lfc")
    with pytest.raises(FileNotFoundError):
        lfc_read(tmp_path / "none.lfc")


# --- light field -------------------------------------------------------------

def test_lightfield_views_and_center(rng):
    data = rng.random((3, 5, 4, 6, 3)).astype(np.float32)
    lf = LightField(data)
    assert lf.center == (1, 2)
    np.testing.assert_array_equal(lf.center_view(), data[1, 2])
    np.testing.assert_array_equal(lf.view(0, 2), data[0, 2])  # topmost extreme
    with pytest.raises(IndexError):
        lf.view(3, 0)
    with pytest.raises(IndexError):
        lf.view(0, -1)
    assert [(u, v) for u, v, _ in lf.views()][:3] == [(0, 0), (0, 1), (0, 2)]
    assert not lf.data.flags.writeable


def test_lightfield_even_center_and_single_view(rng):
    assert LightField(np.zeros((4, 2, 1, 1, 1))).center == (2, 1)
    one = rng.random((1, 1, 3, 3, 1)).astype(np.float32)
    np.testing.assert_array_equal(LightField(one).view(0, 0), one[0, 0])


def test_lightfield_rejects_bad_shapes():
    with pytest.raises(ValueError):
        LightField(np.zeros((2, 2, 2)))
    with pytest.raises(ValueError):
        LightField(np.zeros((0, 1, 2, 2, 1)))
    with pytest.raises(ValueError):
        as_image(np.zeros((2, 2, 2, 2)))


# --- luma / resampling ---------------------------------------------------------

def test_luma_examples(rng):
    assert luma(np.ones((1, 1, 3)))[0, 0, 0] == pytest.approx(1.0)
    assert luma(np.array([[[1.0, 0, 0]]]))[0, 0, 0] == pytest.approx(0.299)
    y = luma(rng.random((8, 8, 3)))
    assert y.shape == (8, 8, 1) and y.min() >= 0 and y.max() <= 1
    with pytest.raises(ValueError):
        luma(np.ones((2, 2, 1)))


@given(st.lists(st.floats(0, 1), min_size=3, max_size=3), st.integers(0, 2), st.floats(0, 0.5))
def test_luma_monotone(rgb, channel, bump):
    a = np.array([[rgb]], dtype=np.float64)
    b = a.copy()
    b[0, 0, channel] += bump
    assert luma(b)[0, 0, 0] >= luma(a)[0, 0, 0]


def test_resize_identity_and_constant(rng):
    img = rng.random((7, 9, 3)).astype(np.float32)
    np.testing.assert_array_equal(resize_bicubic(img, 7, 9), img)
    const = np.full((5, 6, 1), 0.3, np.float32)
    np.testing.assert_allclose(resize_bicubic(const, 13, 4), 0.3, atol=1e-6)
    with pytest.raises(ValueError):
        resize_bicubic(img, 0, 3)


def test_resize_ramp_2x():
    x = np.arange(16, dtype=np.float64)
    ramp = np.tile(x, (16, 1))[:, :, None]
    up = resize_bicubic(ramp, 32, 32)[:, :, 0]
    xs = (np.arange(32) + 0.5) / 2 - 0.5  # analytic sample positions
    np.testing.assert_allclose(up[4:-4, 4:-4], np.tile(xs, (32, 1))[4:-4, 4:-4], atol=1e-5)


@pytest.mark.parametrize("shape,out", [((5, 7), (11, 3)), ((6, 6), (24, 24)), ((9, 4), (4, 9))])
def test_resize_matches_direct_evaluation(rng, shape, out):
    img = rng.random(shape)
    np.testing.assert_allclose(resize_bicubic(img, *out)[:, :, 0], bicubic_oracle(img, *out), atol=1e-6)


@given(arrays(np.float64, st.tuples(st.integers(2, 8), st.integers(2, 8)), elements=st.floats(0, 1)),
       st.integers(1, 20), st.integers(1, 20))
def test_resize_overshoot_bound(img, oh, ow):
    out = resize_bicubic(img, oh, ow)
    assert out.min() >= -0.25 - 1e-6 and out.max() <= 1.25 + 1e-6


def test_sample_bilinear_examples():
    img = np.array([[0.0, 1.0, 2.0], [3.0, 4.0, 5.0]])[:, :, None]
    assert sample_bilinear(img, 2, 1)[0] == 5.0
    assert sample_bilinear(img, 0.5, 0)[0] == pytest.approx(0.5)
    assert sample_bilinear(img, 100, -100)[0] == 2.0
    assert sample_bilinear(img, -3, 7)[0] == 3.0


@given(st.floats(-2, 5), st.floats(-2, 4), st.floats(-1e-3, 1e-3))
def test_sample_bilinear_continuity(x, y, eps):
    img = np.arange(12, dtype=np.float64).reshape(3, 4, 1) ** 1.5
    a = sample_bilinear(img, x, y)[0]
    b = sample_bilinear(img, x + eps, y + eps)[0]
    lip = np.abs(np.diff(img, axis=0)).max() + np.abs(np.diff(img, axis=1)).max()
    assert abs(a - b) <= lip * abs(eps) + 1e-4


def test_box_downsample_then_bicubic_preserves_constants():
    img = np.full((12, 8, 3), 0.7, np.float32)
    small = box_downsample(img, 4)
    assert small.shape == (3, 2, 3)
    np.testing.assert_allclose(resize_bicubic(small, 12, 8), 0.7, atol=1e-6)
    with pytest.raises(ValueError):
        box_downsample(np.zeros((5, 4, 1)), 2)
