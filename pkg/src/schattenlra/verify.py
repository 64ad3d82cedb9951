"""
Randomized property suites for the operator inequalities and the basis transfer
bounds. Each trial returns a signed margin: non-negative means the property
held (after the floating-point tolerance); the worst margin is reported.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .krylov import KrylovParams, block_krylov
from .linop import DenseOperator
from .lra import orth
from .spectral import (alt_slack, dense_svd, pinching_slack, schatten_norm, schatten_pow,
                       slack_tolerance, svd_2x2)

__all__ = ["SuiteResult", "SUITES", "run_verify", "format_report"]

PINCHING_P = (1.0, 1.5, 2.0, 4.0, 9.0)
ALT_R = (0.25, 0.5, 0.75, 1.0, 1.5, 2.0)
BLOCK_P = (2.0, 3.0, 4.0, 8.0)


@dataclass(frozen=True)
class SuiteResult:
    name: str
    trials: int
    failures: int
    worst_slack: float

    @property
    def status(self) -> str:
        if self.trials == 0:
            return "no trials"
        return "pass" if self.failures == 0 else "FAIL"


def _sv(M):
    return np.linalg.svd(M, compute_uv=False)


def _within(lhs, rhs, direction):
    """Margin of lhs >= rhs (direction=+1) or lhs <= rhs (direction=-1)."""
    return direction * (lhs - rhs) + slack_tolerance(lhs, rhs)


def _pinching(seed):
    g = rng.generator(seed, 1)
    out = []
    for p in PINCHING_P:
        A = g.standard_normal((12, 10))
        P = np.linalg.qr(g.standard_normal((12, 3)))[0]
        Q = np.linalg.qr(g.standard_normal((10, 3)))[0]
        s = pinching_slack(A, P, Q, p)
        out.append(s.slack + s.tolerance)
    return out


def _random_psd(g, d):
    G = g.standard_normal((d, d)) / np.sqrt(d)
    return G @ G.T


def _alt(seed):
    g = rng.generator(seed, 2)
    out = []
    for r in ALT_R:
        d = int(g.integers(2, 7))
        s = alt_slack(_random_psd(g, d), _random_psd(g, d), r)
        tol = s.tolerance
        if r < 1:
            out.append(s.slack + tol)
        elif r > 1:
            out.append(tol - s.slack)
        else:
            out.append(tol - abs(s.slack))
    return out


def _holder(seed):
    g = rng.generator(seed, 3)
    A = g.standard_normal((6, 5))
    B = g.standard_normal((5, 7))
    q = 1.0 + 4.0 * g.random()
    r = 1.0 + 4.0 * g.random()
    p = 1.0 / (1.0 / q + 1.0 / r)
    if p < 1:
        return []
    lhs = schatten_norm(_sv(A @ B), p)
    rhs = schatten_norm(_sv(A), q) * schatten_norm(_sv(B), r)
    return [_within(lhs, rhs, -1)]


def _unitary(seed):
    g = rng.generator(seed, 4)
    A = g.standard_normal((7, 5))
    U = rng.random_orthonormal(seed, 9, 7, 41)
    V = rng.random_orthonormal(seed, 5, 5, 42)
    out = []
    for p in (1.0, 2.5, np.inf):
        a, b = schatten_norm(_sv(A), p), schatten_norm(_sv(U @ A @ V.T), p)
        out.append(1e-9 * max(a, b) - abs(a - b))
    return out


def _monotone(seed):
    g = rng.generator(seed, 5)
    s = np.abs(g.standard_normal(8))
    ps = [1.0, 1.5, 2.0, 3.0, 7.0, np.inf]
    vals = [schatten_norm(s, p) for p in ps]
    return [_within(a, b, +1) for a, b in zip(vals, vals[1:])]


def _aligned_compression(seed):
    g = rng.generator(seed, 6)
    out = []
    for p in BLOCK_P:
        a1, a2, b1, b2 = g.standard_normal(4)
        X = g.standard_normal((3, 4))
        Y = g.standard_normal((2, 4))
        M = np.block([[a1 * X, a2 * X], [b1 * Y, b2 * Y]])
        nx, ny = schatten_norm(_sv(X), p), schatten_norm(_sv(Y), p)
        C = svd_2x2(abs(a1) * nx, abs(a2) * nx, abs(b1) * ny, abs(b2) * ny)
        out.append(_within(schatten_norm(_sv(M), p), schatten_norm(C, p), -1))
    return out


def block_compression(A, u, p):
    """(||A||_p, ||C||_p) for the 2x2 compression built from u and v = Au/||Au||."""
    u = u / np.linalg.norm(u)
    v = A @ u
    v = v / np.linalg.norm(v)
    Pu = np.outer(u, u)
    Pv = np.outer(v, v)
    In, Id = np.eye(A.shape[0]), np.eye(A.shape[1])
    top = schatten_norm(_sv(Pv @ A @ Pu), p)
    cross = schatten_norm(_sv(Pv @ A @ (Id - Pu)), p)
    rest = schatten_norm(_sv((In - Pv) @ A @ (Id - Pu)), p)
    return schatten_norm(_sv(A), p), schatten_norm(svd_2x2(top, cross, 0.0, rest), p)


def _block(seed):
    g = rng.generator(seed, 7)
    A = g.standard_normal((8, 6))
    u = g.standard_normal(6)
    return [_within(*block_compression(A, u, p), -1) for p in BLOCK_P]


def hard_matrix(g, n):
    X = g.standard_normal((n, n)) / np.sqrt(n)
    return np.eye(n) - X @ X.T / 5.0


def _alt_route(seed):
    g = rng.generator(seed, 8)
    n = 10
    A = hard_matrix(g, n)
    v = g.standard_normal(n)
    v /= np.linalg.norm(v)
    out = []
    for p in (1.0, 1.25, 1.5, 2.0):
        lhs = schatten_pow(_sv(A - np.outer(A @ v, v)), p)
        rhs = schatten_pow(_sv(A), p) - np.linalg.norm(A @ v) ** p
        out.append(_within(lhs, rhs, +1))
    return out


def _compression_route(seed):
    g = rng.generator(seed, 9)
    A = hard_matrix(g, 10)
    u = g.standard_normal(10)
    return [_within(*block_compression(A, u, p), -1) for p in (2.5, 3.0, 4.0, 8.0)]


def _sandwich(seed):
    g = rng.generator(seed, 10)
    A = hard_matrix(g, 10)
    v = g.standard_normal(10)
    v /= np.linalg.norm(v)
    op = np.linalg.norm(A, 2)
    return [_within(op ** p, np.linalg.norm(A @ v) ** p, +1) for p in (1.0, 2.0, 4.0)]


def _transfer(seed):
    """sigma_i(A Z) >= sigma_i(A^T W) with W from block Krylov on A^T and Z = orth(A^T W)."""
    g = rng.generator(seed, 11)
    n, d, k = 30, 20, 3
    A = g.standard_normal((n, d))
    op = DenseOperator(A)
    W = block_krylov(op.T, KrylovParams(k, k, 2, seed)).basis
    Z = orth(op, W)
    a, b = _sv(A @ Z), _sv(A.T @ W)
    return list(a - b + 1e-9)


def _svd2(seed):
    g = rng.generator(seed, 12)
    M = g.standard_normal((2, 2))
    s = np.array(svd_2x2(*M.ravel()))
    ref = dense_svd(M).singular_values
    return list(1e-12 - np.abs(s - ref))


def _per_vector(seed):
    """Per-vector errors gamma_i sigma_{k+1}^2 give ||AZ||_p^p >= ||A_k||_p^p - sum 2 gamma_i p sigma_{k+1}^2 sigma_i^(p-2)."""
    g = rng.generator(seed, 13)
    n, d, k = 40, 30, 3
    A = g.standard_normal((n, d))
    res = block_krylov(DenseOperator(A), KrylovParams(k, k, 2, seed))
    Z = res.basis
    s = _sv(A)
    err = np.maximum(s[:k] ** 2 - np.sum((A @ Z) ** 2, axis=0), 0.0)
    gam = err / s[k] ** 2
    out = []
    for p in (1.0, 2.0, 3.0, 6.0):
        lhs = schatten_pow(_sv(A @ Z), p)
        rhs = schatten_pow(s[:k], p) - np.sum(2.0 * gam * p * s[k] ** 2 * s[:k] ** (p - 2))
        out.append(_within(lhs, rhs, +1))
    return out


SUITES = {
    "pinching": _pinching,
    "alt": _alt,
    "holder": _holder,
    "unitary": _unitary,
    "monotone": _monotone,
    "compression": _aligned_compression,
    "block": _block,
    "alt_route": _alt_route,
    "compression_route": _compression_route,
    "sandwich": _sandwich,
    "transfer": _transfer,
    "svd2x2": _svd2,
    "per_vector": _per_vector,
}


def run_verify(selector="all", seeds=range(100)) -> list:
    """Run the named suite (or ``all``) once per seed."""
    names = list(SUITES) if selector == "all" else [selector]
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite {unknown[0]!r}; known: {', '.join(SUITES)}")
    seeds = list(seeds)
    results = []
    for name in names:
        failures, worst = 0, np.inf
        for seed in seeds:
            margins = SUITES[name](seed)
            if margins:
                worst = min(worst, float(min(margins)))
                failures += int(min(margins) < 0)
        results.append(SuiteResult(name, len(seeds), failures,
                                   worst if np.isfinite(worst) else float("nan")))
    return results


def format_report(results) -> str:
    lines = [f"{'suite':<18} {'trials':>6} {'fail':>5} {'worst margin':>13}  status"]
    for r in results:
        lines.append(f"{r.name:<18} {r.trials:>6} {r.failures:>5} {r.worst_slack:>13.3e}  {r.status}")
    return "\n".join(lines)
