import numpy as np
import pytest

from fdxsim import OfdmConfig, PllParams, default_profile


@pytest.fixture
def ofdm():
    return OfdmConfig()


@pytest.fixture
def profile():
    return default_profile()


@pytest.fixture
def reference_pll():
    """Reference oscillator example: -76 dBc/Hz measured at 10 kHz offset
    (flicker region) and -120 dBc/Hz at 1 MHz (thermal region)."""
    return PllParams(l_f=-76.0, l_w=-120.0, f_lf=10e3, f_lw=1e6)


@pytest.fixture
def headline_pll():
    """High-quality oscillator at the standard measurement offsets."""
    return PllParams(l_f=-60.0, l_w=-120.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
