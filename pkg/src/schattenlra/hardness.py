"""
Lower-bound experiment kit.

The hard instance is A = I - W/5 with W a Wishart matrix. A good rank-1
approximation of A yields a unit vector v from which the smallest eigenvalue
of W can be read off as (5/p)(1 - ||A v||^p).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .krylov import DEFAULT_C, KrylovParams, block_krylov, ceil_count
from .linop import DenseOperator, LedgerSnapshot, LinearOperator
from .lra import LraConfig, schatten_lra
from .spectral import schatten_pow

__all__ = [
    "WishartInstance",
    "HardnessReport",
    "HardnessConfig",
    "sample_wishart",
    "hard_instance",
    "min_eig_estimate",
    "hardness_experiment",
]

OPNORM_BOUND = 5.0


@dataclass(frozen=True)
class WishartInstance:
    n: int
    W: np.ndarray
    seed: int
    X: np.ndarray | None = None

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.W)


@dataclass(frozen=True)
class HardnessConfig:
    p: float = 2.0
    c: float = DEFAULT_C
    calibration: float = 1.0  # n = calibration / eps^(1/3)
    seed: int = field(default_factory=rng.default_seed)

    def eps_for(self, n: int) -> float:
        return (self.calibration / n) ** 3


@dataclass(frozen=True)
class HardnessReport:
    n: int
    p: float
    eps: float
    lambda_min_true: float
    lambda_hat: float
    abs_error: float
    opnorm_W: float
    schatten_tail_p: float
    schatten_pow_p: float
    queries_used: LedgerSnapshot
    stage_queries: dict
    opnorm_exceeded: bool
    branch: str
    residual_pow: float
    optimum_pow: float


def sample_wishart(n: int, seed) -> WishartInstance:
    """W = X X^T with X_ij ~ N(0, 1/n) i.i.d."""
    if n < 1:
        raise ValueError("n must be positive")
    X = rng.gaussian(seed, (n, n), 11) / math.sqrt(n)
    W = X @ X.T
    W = (W + W.T) / 2.0
    return WishartInstance(n, W, int(seed), X)


def hard_instance(n: int, seed=None, wishart: WishartInstance | np.ndarray | None = None) -> DenseOperator:
    """Operator for A = I - W/5 (``wishart`` may inject a fixed W)."""
    if wishart is None:
        wishart = sample_wishart(n, seed)
    W = wishart.W if isinstance(wishart, WishartInstance) else np.asarray(wishart, dtype=float)
    if W.shape != (n, n):
        raise ValueError(f"W must be {n}x{n}, got {W.shape}")
    return DenseOperator(np.eye(n) - W / OPNORM_BOUND)


def min_eig_estimate(A_op: LinearOperator, v, p) -> float:
    """(5/p) (1 - ||A v||^p) using one product with A."""
    v = np.asarray(v, dtype=float).ravel()
    if abs(np.linalg.norm(v) - 1.0) > 1e-8:
        raise ValueError(f"v must be a unit vector (||v|| = {np.linalg.norm(v):.12g})")
    if not p >= 1:
        raise ValueError("p must be >= 1")
    Av = A_op.apply(v)
    return OPNORM_BOUND / p * (1.0 - np.linalg.norm(Av) ** p)


def hardness_experiment(n: int, p: float, cfg: HardnessConfig | None = None,
                        wishart: WishartInstance | None = None) -> HardnessReport:
    """
    Sample A = I - W/5, approximate it at rank 1, sharpen the returned vector
    with ceil(1/(c eps^(1/3))) further single-vector Krylov steps started at
    it, and compare the eigenvalue estimate with the true lambda_min(W).
    """
    cfg = cfg or HardnessConfig(p=p)
    eps = cfg.eps_for(n)
    inst = wishart if wishart is not None else sample_wishart(n, cfg.seed)
    op = hard_instance(n, wishart=inst)
    lra_cfg = LraConfig(k=1, eps=eps, p=p, c=cfg.c, seed=cfg.seed)
    out = schatten_lra(op, lra_cfg, certify=False)
    stages = {"lra": out.total_queries}

    u = out.basis[:, 0]
    refine_q = ceil_count(1.0 / (cfg.c * eps ** (1.0 / 3.0)))
    mark = op.snapshot()
    # Krylov over A^T with start u: the first block is A u, the direction v = Au/||Au||
    ref = block_krylov(op, KrylovParams(1, 1, refine_q, cfg.seed), start=u)
    stages["refine"] = op.snapshot() - mark
    v = ref.basis[:, 0]
    v = v / np.linalg.norm(v)
    mark = op.snapshot()
    lam_hat = min_eig_estimate(op, v, p)
    stages["estimate"] = op.snapshot() - mark

    w = inst.eigvalsh()
    lam_true = float(max(w[0], 0.0))
    a_eigs = np.abs(1.0 - w / OPNORM_BOUND)
    a_sorted = np.sort(a_eigs)[::-1]
    A = op.explicit()
    R = A - np.outer(A @ v, v)
    total = LedgerSnapshot()
    for q in stages.values():
        total = total + q
    return HardnessReport(
        n=n, p=float(p), eps=eps,
        lambda_min_true=lam_true,
        lambda_hat=float(lam_hat),
        abs_error=abs(float(lam_hat) - lam_true),
        opnorm_W=float(w[-1]),
        schatten_tail_p=schatten_pow(a_sorted[1:], p),
        schatten_pow_p=schatten_pow(a_sorted, p),
        queries_used=total,
        stage_queries=stages,
        opnorm_exceeded=bool(w[-1] > OPNORM_BOUND),
        branch=out.decision.branch.value,
        residual_pow=schatten_pow(np.linalg.svd(R, compute_uv=False), p),
        optimum_pow=schatten_pow(a_sorted[1:], p),
    )
