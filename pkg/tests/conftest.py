import numpy as np
import pytest

from uhlmann import matcore
from uhlmann.matcore import dagger


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_complex(rng, rows, cols):
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))


def random_hermitian(rng, d, norm=1.0):
    h = random_complex(rng, d, d)
    h = (h + dagger(h)) / 2
    return h / max(matcore.op_norm(h), 1e-30) * norm


def random_psd(rng, d, rank=None):
    rank = rank if rank is not None else d
    a = random_complex(rng, d, rank)
    return a @ dagger(a)


def random_density(rng, d, rank=None):
    p = random_psd(rng, d, rank)
    return p / np.trace(p).real


def random_unitary(rng, d):
    q, r = np.linalg.qr(random_complex(rng, d, d))
    phase = np.diag(r).copy()
    phase /= np.abs(phase)
    return q * phase
