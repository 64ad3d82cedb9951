"""Synthetic test matrices."""
import numpy as np

from . import rng
from .linop import DenseOperator, DiagonalOperator


def power_law_spectrum(d, alpha=1.0):
    return np.arange(1, d + 1, dtype=float) ** (-float(alpha))


def power_law_matrix(n, d, alpha=1.0, seed=0) -> np.ndarray:
    """n x d matrix with singular values i^(-alpha) and Haar-random singular vectors."""
    r = min(n, d)
    U = rng.random_orthonormal(seed, n, r, 21)
    V = rng.random_orthonormal(seed, d, r, 22)
    return (U * power_law_spectrum(r, alpha)) @ V.T


def power_law_operator(n, d, alpha=1.0, seed=0) -> DenseOperator:
    return DenseOperator(power_law_matrix(n, d, alpha, seed))


def power_law_diagonal(d, alpha=1.0) -> DiagonalOperator:
    return DiagonalOperator(power_law_spectrum(d, alpha))


def low_rank_matrix(n, d, rank, seed=0) -> np.ndarray:
    G = rng.gaussian(seed, (n, rank), 23)
    H = rng.gaussian(seed, (rank, d), 24)
    return G @ H
