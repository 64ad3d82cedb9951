"""Seeded counter-based Gaussian sampling shared across modules."""
import os

import numpy as np

SEED_ENV = "SCHATTENLRA_SEED"
_FALLBACK_SEED = 20240601


def default_seed() -> int:
    """Default seed, overridable through the ``SCHATTENLRA_SEED`` environment variable."""
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return _FALLBACK_SEED
    return int(raw, 0)


def generator(seed, *stream) -> np.random.Generator:
    """
    Philox generator keyed by ``seed`` and an optional stream path.

    Distinct stream paths give statistically independent sequences, so
    different stages of one run never share random numbers.
    """
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF,
                                spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))


def gaussian(seed, shape, *stream) -> np.ndarray:
    return generator(seed, *stream).standard_normal(shape)


def random_orthonormal(seed, n, k, *stream) -> np.ndarray:
    """n x k matrix with orthonormal columns, Haar-distributed."""
    G = gaussian(seed, (n, k), *stream)
    Q, R = np.linalg.qr(G)
    return Q * np.sign(np.where(np.diag(R) == 0, 1.0, np.diag(R)))
