"""Shared fixtures: small grids and a fast experiment configuration.

The suite leans on 8x8 instances for Monte Carlo oracles (cheap enough for
1e5 joint draws) and on a 16x16 kernel-scaled profile for pipeline-level
checks that must finish in seconds.
"""

import numpy as np
import pytest

from baedeblur import make_grid


@pytest.fixture
def grid8():
    return make_grid(8, 8)


@pytest.fixture
def grid4():
    return make_grid(4, 4)


@pytest.fixture
def base_config_dict(tmp_path):
    """Valid experiment config on a small grid; tests override fields."""
    return {
        "grid": {"nx": 12, "ny": 12},
        "phantom": {
            "blocks": [
                {"x0": 0.16, "y0": 0.16, "x1": 0.44, "y1": 0.44, "value": 1.0},
                {"x0": 0.56, "y0": 0.56, "x1": 0.84, "y1": 0.84, "value": -1.0},
            ]
        },
        "kernel": {"kappa": 1.2},
        "prior": {"c1": 0.1, "c2": 20.0},
        "multiplicative_noise": {"law": "gamma", "shape": 1.0},
        "additive_noise": {"fraction_of_range": 0.01},
        "band_factor": 3.0,
        "seeds": {"data": 1234, "validation": 5678},
        "output_dir": str(tmp_path / "run"),
        "method": "bae",
    }


def pytest_configure(config):
    # Monte Carlo assertions budget 5 standard errors; keep numpy quiet
    # about the benign underflows that exp(-d^2) kernels produce.
    np.seterr(under="ignore")
