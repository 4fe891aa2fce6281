import numpy as np
import pytest

from quantmimo import core


@pytest.fixture
def demo_channel():
    """Real-coefficient 2x2 toy channel used by the worked example."""
    return np.array([[0.5, 1.0], [1.0, 0.0]], dtype=complex)


@pytest.fixture
def demo_cfg():
    """One-bit quantizer with step 2 restricted to the real components."""
    return core.QuantizerConfig(bits=1, step=2.0, real_mode=True)


@pytest.fixture
def demo_book():
    return core.enumerate_symbols(core.bpsk(), 2)
