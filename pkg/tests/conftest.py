import numpy as np
import pytest

import spinmaser as sm


@pytest.fixture(scope="session")
def base_params():
    """Relaxation/polarization constants with alpha left at zero."""
    return sm.PhysicalParams(**sm.DEFAULT_PARAMS, alpha=0.0)


@pytest.fixture(scope="session")
def omega_c():
    return sm.DEFAULT_OMEGA_C


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def assert_close(a, b, rtol=0.0, atol=0.0, msg=""):
    __tracebackhide__ = True
    if not np.allclose(a, b, rtol=rtol, atol=atol):
        raise AssertionError(f"{msg}: {a!r} !~ {b!r} (rtol={rtol}, atol={atol})")
