"""
Block Krylov iteration over a counted operator, with the iteration schedules
used to pick its depth.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .linop import LedgerSnapshot, LinearOperator
from .spectral import check_orthonormal

__all__ = [
    "DEFAULT_C",
    "KrylovParams",
    "SubspaceResult",
    "ceil_count",
    "gap_independent_schedule",
    "gap_dependent_schedule",
    "block_krylov",
    "per_vector_errors",
]

DEFAULT_C = 4.0
RANK_TOL = 1e-12


def ceil_count(x: float) -> int:
    """ceil(x), minimum 1, ignoring float noise of a few ulps above an integer."""
    r = round(x)
    if abs(x - r) <= 1e-9 * max(1.0, abs(x)):
        x = r
    return max(1, math.ceil(x))


def gap_independent_schedule(d, gamma, c=DEFAULT_C) -> int:
    """q = ceil(c ln(d/gamma) / sqrt(gamma))."""
    if not 0 < gamma <= 1:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    return ceil_count(c * math.log(d / gamma) / math.sqrt(gamma))


def gap_dependent_schedule(n, gamma, sigma_high, sigma_low, c=DEFAULT_C) -> int:
    """q = ceil(c ln(n/gamma) sqrt(sigma_high / (sigma_high - sigma_low)))."""
    if not 0 < gamma <= 1:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    if not sigma_low >= 0:
        raise ValueError("sigma_low must be non-negative")
    if not sigma_high > sigma_low:
        raise ValueError("no spectral gap (sigma_high <= sigma_low); use the gap-independent schedule")
    return ceil_count(c * math.log(n / gamma) * math.sqrt(sigma_high / (sigma_high - sigma_low)))


@dataclass(frozen=True)
class KrylovParams:
    k: int
    s: int
    q: int
    seed: int = 0
    c: float = DEFAULT_C

    def validate(self, d: int) -> None:
        if self.k < 1:
            raise ValueError("target rank k must be positive")
        if not self.k <= self.s <= d:
            raise ValueError(f"block size must satisfy k <= s <= d ({self.k} <= {self.s} <= {d})")
        if self.q < 1:
            raise ValueError("iteration count q must be positive")


@dataclass(frozen=True)
class SubspaceResult:
    basis: np.ndarray
    rayleigh_values: np.ndarray
    queries_used: LedgerSnapshot
    dense_fallback: bool = False
    krylov_dim: int = 0

    @property
    def k(self) -> int:
        return self.basis.shape[1]


def _orthonormalize_against(X, Q, scale):
    """Block Gram-Schmidt of X against Q (twice), then rank-revealing orthonormalization."""
    if Q is not None and Q.shape[1]:
        for _ in range(2):
            X = X - Q @ (Q.T @ X)
    if X.shape[1] == 0:
        return X
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    keep = s > RANK_TOL * max(scale, 1e-300)
    U = U[:, keep]
    if Q is not None and Q.shape[1] and U.shape[1]:
        U = U - Q @ (Q.T @ U)
        U, _ = np.linalg.qr(U)
    return U


def _complete_basis(Z, d, seed):
    """Extend Z (d x m, orthonormal) to d x k columns using random complement directions."""
    G = rng.gaussian(seed, (d, d), 99)
    G = G - Z @ (Z.T @ G)
    G = G - Z @ (Z.T @ G)
    U, _, _ = np.linalg.svd(G, full_matrices=False)
    return U


def block_krylov(op: LinearOperator, params: KrylovParams, start=None) -> SubspaceResult:
    """
    Top-k Rayleigh-Ritz directions of A^T A over the block Krylov space
    span[A^T U, (A^T A) A^T U, ..., (A^T A)^q A^T U].

    U is an n x s Gaussian block drawn from ``params.seed`` unless ``start``
    supplies it. Each new block is orthogonalized against all earlier ones
    before the next product. If s(q+1) >= d the space is all of R^d and the
    operator is materialized with d products instead.

    Query cost: s(2q+2) products (the last block needs A Q to form the
    projected Gram matrix), or d products on the dense route.
    """
    n, d = op.shape
    params.validate(d)
    k, s, q = params.k, params.s, params.q
    before = op.snapshot()

    if s * (q + 1) >= d:
        Q = np.eye(d)
        AQ = op.matmat(Q)
        fallback = True
    else:
        if start is None:
            U0 = rng.gaussian(params.seed, (n, s))
        else:
            U0 = np.asarray(start, dtype=float).reshape(n, -1)
            if U0.shape[1] != s:
                raise ValueError(f"start block has {U0.shape[1]} columns, expected {s}")
        X = op.rmatmat(U0)
        scale = np.linalg.norm(X, 2) if X.size else 0.0
        block = _orthonormalize_against(X, None, scale)
        blocks, images = [], []
        for it in range(q + 1):
            if block.shape[1] == 0:
                break
            blocks.append(block)
            Y = op.matmat(block)
            images.append(Y)
            if it == q:
                break
            X = op.rmatmat(Y)
            scale = max(scale, np.linalg.norm(X, 2))
            block = _orthonormalize_against(X, np.hstack(blocks), scale)
        Q = np.hstack(blocks) if blocks else np.zeros((d, 0))
        AQ = np.hstack(images) if images else np.zeros((n, 0))
        fallback = False

    used = op.snapshot() - before
    if Q.shape[1]:
        _, sv, Vt = np.linalg.svd(AQ, full_matrices=False)
        order = np.argsort(-sv, kind="stable")
        sv, Vt = sv[order], Vt[order]
        Z = Q @ Vt.T[:, :k]
        vals = sv[:k] ** 2
        if sv.size and sv[0] > 0:
            vals = np.where(sv[:k] < RANK_TOL * sv[0], 0.0, vals)
    else:
        Z = np.zeros((d, 0))
        vals = np.zeros(0)
    if Z.shape[1] < k:
        extra = _complete_basis(Z, d, params.seed)[:, : k - Z.shape[1]]
        Z = np.hstack([Z, extra])
        vals = np.concatenate([vals, np.zeros(extra.shape[1])])
    return SubspaceResult(Z, vals, used, fallback, Q.shape[1])


def per_vector_errors(matrix, Z) -> np.ndarray:
    """sigma_i^2(A) - ||A Z[:, i]||^2 for each column of Z (dense diagnostic)."""
    A = np.asarray(matrix, dtype=float)
    Z = check_orthonormal(Z)
    k = Z.shape[1]
    s = np.linalg.svd(A, compute_uv=False)
    sk = np.zeros(k)
    sk[: min(k, s.size)] = s[:k]
    return sk ** 2 - np.sum((A @ Z) ** 2, axis=0)
