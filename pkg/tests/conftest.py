import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from macwt import InputDistribution, MacWiretapChannel, builder_adder_bsc  # noqa: E402


@pytest.fixture
def adder():
    return builder_adder_bsc(0.05, 0.2)


@pytest.fixture
def uniform2():
    return InputDistribution.uniform(2)


@pytest.fixture
def identity_channel():
    """X1 uniform on 4 symbols copied to Y; X2 and Z trivial."""
    t = np.zeros((4, 1, 4, 1))
    for a in range(4):
        t[a, 0, a, 0] = 1.0
    return MacWiretapChannel(t)


@pytest.fixture
def pair_channel():
    """Noiseless MAC that reveals both inputs: y = 2 x1 + x2; Z is constant."""
    t = np.zeros((2, 2, 4, 1))
    for a in range(2):
        for b in range(2):
            t[a, b, 2 * a + b, 0] = 1.0
    return MacWiretapChannel(t)
