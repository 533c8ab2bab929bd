"""Shared fixtures: `src/` on the path plus tiny experiment configurations."""

import copy
import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))
sys.path.insert(0, str(ROOT))

# RS [3,1] keeps blocks at B = 24 so full trials finish in well under a second.
TINY_SISO = {
    "experiment": {
        "name": "tiny_siso",
        "scenario": "siso_linear",
        "receiver": "viterbinet",
        "regime": "meta",
        "regimes": ["joint", "online", "meta"],
        "seeds": [1, 2],
        "snr_db": 10,
        "snr_list": [10],
    },
    "protocol": {"pilot_blocks": 4, "data_blocks": 6, "block_length": 24},
    "code": {"n": 3, "k": 1},
    "channel": {"memory": 2, "users": 1, "antennas": 1},
    "receiver": {"hidden_dims": [8, 4]},
    "training": {
        "sgd_iterations": 4,
        "meta_iterations": 3,
        "meta_frequency": 2,
        "batch_size": 16,
        "joint_iterations": 6,
        "buffer_size": 5,
    },
}

TINY_MIMO = {
    "experiment": {
        "name": "tiny_mimo",
        "scenario": "mimo_linear",
        "receiver": "deepsic",
        "regime": "meta",
        "regimes": ["online", "meta"],
        "seeds": [1],
        "snr_db": 12,
        "snr_list": [12],
    },
    "protocol": {"pilot_blocks": 3, "data_blocks": 4, "block_length": 24},
    "code": {"n": 3, "k": 1},
    "channel": {"users": 2, "antennas": 2, "mobile_user": 2},
    "receiver": {"iterations": 2, "hidden_dims": [6]},
    "training": {
        "sgd_iterations": 3,
        "meta_iterations": 2,
        "meta_frequency": 2,
        "batch_size": 16,
        "joint_iterations": 4,
        "buffer_size": 4,
    },
}


def merged(base, **sections):
    raw = copy.deepcopy(base)
    for section, values in sections.items():
        raw.setdefault(section, {}).update(values)
    return raw


@pytest.fixture
def tiny_siso_raw():
    return copy.deepcopy(TINY_SISO)


@pytest.fixture
def tiny_mimo_raw():
    return copy.deepcopy(TINY_MIMO)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
