import numpy as np
import pytest
from hypothesis import given, strategies as st

from hybridlf.occlusion import OcclusionParams, occlusion_fill, occlusion_mask


def test_examples(rng):
    lr = rng.random((6, 6, 3)).astype(np.float32) * 0.5
    assert not occlusion_mask(lr, lr).any()
    enh = lr.copy()
    enh[2, 3, 1] += 0.3
    m = occlusion_mask(enh, lr, OcclusionParams(0.175))
    assert m.sum() == 1 and m[2, 3]
    exact = np.zeros((1, 2, 1), np.float64)
    other = exact.copy()
    other[0, 0, 0] = 0.25
    assert not occlusion_mask(other, exact, OcclusionParams(0.25)).any()


def test_fill_examples(rng):
    enh, lr = rng.random((5, 5, 3)).astype(np.float32), rng.random((5, 5, 3)).astype(np.float32)
    np.testing.assert_array_equal(occlusion_fill(enh, lr, np.zeros((5, 5), bool)), enh)
    np.testing.assert_array_equal(occlusion_fill(enh, lr, np.ones((5, 5), bool)), lr)
    out = occlusion_fill(enh, lr, occlusion_mask(enh, lr))
    assert not occlusion_mask(out, lr).any()


def test_dilation_and_errors(rng):
    lr = np.zeros((7, 7, 1), np.float32)
    enh = lr.copy()
    enh[3, 3] = 1.0
    assert occlusion_mask(enh, lr, OcclusionParams(dilate=1)).sum() == 5
    with pytest.raises(ValueError):
        OcclusionParams(tau=1.0)
    with pytest.raises(ValueError):
        occlusion_mask(enh, lr[:3])
    with pytest.raises(ValueError):
        occlusion_fill(enh, lr, np.zeros((3, 3), bool))


@given(st.integers(0, 2 ** 31), st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_properties(seed, t1, t2):
    rng = np.random.default_rng(seed)
    enh, lr = rng.random((8, 8, 3)), rng.random((8, 8, 3))
    lo, hi = sorted((t1, t2))
    m_lo = occlusion_mask(enh, lr, OcclusionParams(lo))
    m_hi = occlusion_mask(enh, lr, OcclusionParams(hi))
    assert m_hi.sum() <= m_lo.sum() and not (m_hi & ~m_lo).any()
    once = occlusion_fill(enh, lr, m_lo)
    twice = occlusion_fill(once, lr, occlusion_mask(once, lr, OcclusionParams(lo)))
    np.testing.assert_array_equal(once, twice)
    assert np.abs(once - lr).max() <= lo
