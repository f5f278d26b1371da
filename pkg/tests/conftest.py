import os

os.environ["env"] = "testing"

import numpy as np
import pytest

from channel import NoiseModel
from eve import AttackKind
from protocols import ProtocolConfig


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def make_config():
    def _make(n_pairs=16, attack=AttackKind.NONE, noise_p=0.0, **kwargs):
        return ProtocolConfig(
            n_pairs=n_pairs, attack=attack, noise=NoiseModel.pauli(noise_p), audit=True, **kwargs
        )

    return _make
