import os
import sys

import numpy as np
import pytest

# allow running the suite from a fresh checkout without installing
_SRC = os.path.join(os.path.dirname(__file__), os.pardir, "src")
try:
    import qslgeo  # noqa: F401
except ImportError:
    sys.path.insert(0, os.path.abspath(_SRC))

from qslgeo import BlochVector, DensityOperator, from_bloch


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_density(rng, dim=2) -> DensityOperator:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = g @ g.conj().T
    return DensityOperator(m / np.trace(m).real)


def random_hermitian(rng, dim=2) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (g + g.conj().T)


def random_bloch(rng, r_max=0.999) -> BlochVector:
    return BlochVector(
        rng.uniform(0.0, r_max),
        rng.uniform(0.0, np.pi),
        rng.uniform(0.0, 2.0 * np.pi * 0.9999),
    )


def random_mixed_state(rng, r_max=0.999) -> DensityOperator:
    return from_bloch(random_bloch(rng, r_max))
