import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def smooth_texture(rng, h, w, sigma=2.0, channels=1):
    from scipy import ndimage

    a = ndimage.gaussian_filter(rng.random((h, w, channels)), (sigma, sigma, 0), mode="reflect")
    a = (a - a.min()) / (a.max() - a.min())
    return (0.1 + 0.8 * a).astype(np.float32)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:  # pragma: no cover
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in RESULTS:
        terminalreporter.write_line(line)
