import numpy as np
import pytest

from periodica import build_medium


def reference_config():
    """d=1 working medium used across the suite: G, w, a with mixed harmonics."""
    return {
        "dimension": 1,
        "G": {"type": "cosine-series", "mean": 1.0,
              "terms": [{"amplitude": 0.5, "wavevector": [1]}]},
        "w": {"type": "expression", "expr": "1 + 0.25*sin(2*pi*x)"},
        "a": {"type": "cosine-series", "mean": 1.0,
              "terms": [{"amplitude": 0.9, "wavevector": [1]}]},
    }


def constant_config(g=1.0, w=1.0, a=1.0):
    return {"dimension": 1, "G": g, "w": w, "a": a}


@pytest.fixture(scope="session")
def ref_medium():
    return build_medium(reference_config())


@pytest.fixture(scope="session")
def const_medium():
    return build_medium(constant_config())


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
