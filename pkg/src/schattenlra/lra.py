"""
Schatten-p low-rank approximation from matrix-vector products.

The main entry point, :func:`schatten_lra`, runs block Krylov at two scales
(a thin block run deep, a wide block run shallow), probes the spectrum to
decide which one to trust, and returns an orthonormal basis for A^T W.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import rng
from .krylov import DEFAULT_C, KrylovParams, block_krylov, ceil_count
from .linop import LedgerSnapshot, LinearOperator
from .spectral import INF, best_rank_k_error, residual_cost

__all__ = [
    "Branch",
    "LraConfig",
    "ProbeResult",
    "BranchDecision",
    "LraOutput",
    "Schedule",
    "plan_schedule",
    "spectrum_probe",
    "select_branch",
    "schatten_lra",
    "baseline_krylov_lra",
    "frobenius_rank1_sketch",
    "streaming_footprint",
    "orth",
]


class Branch(enum.Enum):
    LARGE_GAP_TOP = "large_gap_top"
    SMALL_TAIL_W2 = "small_tail_w2"
    LARGE_TAIL_W1 = "large_tail_w1"
    SPECTRAL_FALLBACK = "spectral_fallback"


def _parse_p(p):
    if isinstance(p, str):
        p = p.strip().lower()
        if p in ("inf", "infinity", "oo"):
            return INF
        p = float(p)
    p = float(p)
    if not p >= 1:
        raise ValueError(f"p must be >= 1 or inf, got {p}")
    return p


@dataclass(frozen=True)
class LraConfig:
    k: int
    eps: float
    p: float = 2.0
    c: float = DEFAULT_C
    block_cap: int | None = None
    repetitions: int = 1
    seed: int = field(default_factory=rng.default_seed)
    # per-stage overrides of c; keys: w1, w2, probe1, probe2, spectral
    stage_c: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "p", _parse_p(self.p))
        if not 0 < self.eps < 1:
            raise ValueError(f"eps must lie in (0, 1), got {self.eps}")
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.repetitions < 1:
            raise ValueError("repetitions must be positive")

    def c_for(self, stage: str) -> float:
        return float(self.stage_c.get(stage, self.c))

    @classmethod
    def from_mapping(cls, values: dict) -> "LraConfig":
        kw = {}
        casts = {"k": int, "eps": float, "p": _parse_p, "c": float, "seed": lambda v: int(v, 0) if isinstance(v, str) else int(v),
                 "repetitions": int, "block_cap": int}
        unknown = set(values) - set(casts)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        for key, cast in casts.items():
            if key in values and values[key] not in (None, ""):
                kw[key] = cast(values[key])
        missing = {"k", "eps"} - set(kw)
        if missing:
            raise ValueError(f"missing config keys: {sorted(missing)}")
        return cls(**kw)


@dataclass(frozen=True)
class ProbeResult:
    sigma1_sq: float
    sigma_k1_sq: float
    sigma_s_sq: float
    probe_queries: LedgerSnapshot


@dataclass(frozen=True)
class BranchDecision:
    branch: Branch
    rationale: str = ""
    thresholds: dict = field(default_factory=dict)


@dataclass(frozen=True)
class LraOutput:
    basis: np.ndarray
    decision: BranchDecision
    total_queries: LedgerSnapshot
    stage_queries: dict
    residual_certificate: float | None = None
    optimum: float | None = None

    @property
    def ratio(self) -> float | None:
        if self.residual_certificate is None or self.optimum is None:
            return None
        if self.optimum == 0:
            return 1.0 if self.residual_certificate <= 1e-9 else math.inf
        return self.residual_certificate / self.optimum


@dataclass(frozen=True)
class Schedule:
    """Block sizes and iteration counts of every Krylov run, fixed before any query."""

    spectral: bool
    q_spectral: int = 0
    gamma1: float = 0.0
    q_w1: int = 0
    s: int = 0
    q_w2: int = 0
    q_probe1: int = 0
    q_probe2: int = 0


def block_size(k, eps, p, n, d, block_cap=None) -> int:
    """s = ceil(k / (eps p)^(1/3)) clamped to [k+1, min(n, d, block_cap)]."""
    hi = min(n, d, block_cap if block_cap is not None else d)
    s = ceil_count(k / (eps * p) ** (1.0 / 3.0))
    return int(min(max(s, k + 1), hi))


def plan_schedule(n, d, cfg: LraConfig) -> Schedule:
    k, eps, p = cfg.k, cfg.eps, cfg.p
    if p == INF or p > math.log(d) / eps:
        return Schedule(True, q_spectral=ceil_count(cfg.c_for("spectral") * math.log(d / eps) / math.sqrt(eps)))
    g1 = eps ** (2.0 / 3.0) / p ** (1.0 / 3.0)
    q_w1 = ceil_count(cfg.c_for("w1") * (math.log(d / g1) / math.sqrt(g1) + math.log(d / eps) * math.sqrt(p)))
    s = block_size(k, eps, p, n, d, cfg.block_cap)
    q_w2 = ceil_count(cfg.c_for("w2") * math.log(d / eps) * math.sqrt(p))
    q_p1 = ceil_count(cfg.c_for("probe1") * (math.log(d * p) + math.log(d / eps)) * math.sqrt(p))
    q_p2 = ceil_count(cfg.c_for("probe2") * math.log(d / eps) * math.sqrt(p))
    return Schedule(False, gamma1=g1, q_w1=q_w1, s=s, q_w2=q_w2, q_probe1=q_p1, q_probe2=q_p2)


def orth(op: LinearOperator, W: np.ndarray, seed=0) -> np.ndarray:
    """Orthonormal basis of A^T W (k adjoint products), completed if rank deficient."""
    Y = op.rmatmat(W)
    U, sv, _ = np.linalg.svd(Y, full_matrices=False)
    k = W.shape[1]
    tol = 1e-12 * (sv[0] if sv.size else 0.0)
    rank = int(np.sum(sv > tol)) if sv.size and sv[0] > 0 else 0
    if rank == k:
        return U[:, :k]
    Z = U[:, :rank]
    G = rng.gaussian(seed, (Y.shape[0], k - rank), 7)
    for _ in range(2):
        G = G - Z @ (Z.T @ G)
    G, _ = np.linalg.qr(G)
    return np.hstack([Z, G])


def spectrum_probe(op: LinearOperator, k: int, s: int, cfg: LraConfig, sched: Schedule | None = None) -> ProbeResult:
    """Rough estimates of sigma_1^2, sigma_{k+1}^2 and sigma_s^2 from two Krylov runs on A."""
    n, d = op.shape
    sched = sched or plan_schedule(n, d, cfg)
    if sched.spectral:
        p = cfg.p if cfg.p != INF else math.log(d) / cfg.eps
        q1 = ceil_count(cfg.c_for("probe1") * (math.log(d * p) + math.log(d / cfg.eps)) * math.sqrt(p))
        q2 = ceil_count(cfg.c_for("probe2") * math.log(d / cfg.eps) * math.sqrt(p))
    else:
        q1, q2 = sched.q_probe1, sched.q_probe2
    r1 = block_krylov(op, KrylovParams(k + 1, k + 1, q1, _stage_seed(cfg.seed, 3)))
    r2 = block_krylov(op, KrylovParams(s, s, q2, _stage_seed(cfg.seed, 4)))
    return ProbeResult(float(r1.rayleigh_values[0]), float(r1.rayleigh_values[k]),
                       float(r2.rayleigh_values[s - 1]), r1.queries_used + r2.queries_used)


def select_branch(probe: ProbeResult, p, k=None, s=None) -> BranchDecision:
    p = _parse_p(p)
    factor = 1.0 + 0.5 / p
    th = {"factor": factor, "sigma1_sq": probe.sigma1_sq, "sigma_k1_sq": probe.sigma_k1_sq,
          "sigma_s_sq": probe.sigma_s_sq}
    if probe.sigma1_sq >= factor * probe.sigma_k1_sq:
        return BranchDecision(Branch.LARGE_GAP_TOP,
                              f"sigma1^2 >= {factor:.4g} sigma_(k+1)^2; Z = orth(A^T W1 W1^T)", th)
    if probe.sigma_s_sq <= probe.sigma_k1_sq / factor:
        return BranchDecision(Branch.SMALL_TAIL_W2,
                              f"sigma_s^2 <= sigma_(k+1)^2 / {factor:.4g}; Z = orth(A^T W2 W2^T)", th)
    return BranchDecision(Branch.LARGE_TAIL_W1, "flat top spectrum; Z = orth(A^T W1 W1^T)", th)


def _stage_seed(seed, stage):
    return int(rng.generator(seed, stage).integers(0, 2 ** 63))


def _certify(op, Z, cfg):
    try:
        A = op.explicit()
    except NotImplementedError:
        return None, None
    return residual_cost(A, Z, cfg.p), best_rank_k_error(A, cfg.k, cfg.p)


def _full_rank_output(op, cfg):
    n, d = op.shape
    before = op.snapshot()
    if cfg.k >= d:
        Z = np.eye(d)
    else:
        Z = orth(op, np.eye(n), cfg.seed)
    used = op.snapshot() - before
    return Z, used


def _single_run(op: LinearOperator, cfg: LraConfig) -> LraOutput:
    n, d = op.shape
    k = cfg.k
    if not 1 <= k <= min(n, d):
        raise ValueError(f"k={k} outside [1, {min(n, d)}]")
    if cfg.block_cap is not None and cfg.block_cap < k + 1 and k < min(n, d):
        raise ValueError(f"block_cap={cfg.block_cap} is below k+1={k + 1}")
    start = op.snapshot()
    stages = {}

    if k == min(n, d):
        Z, used = _full_rank_output(op, cfg)
        stages["full_rank"] = used
        decision = BranchDecision(Branch.LARGE_GAP_TOP, "k = min(n, d); exact basis", {})
        return LraOutput(Z, decision, op.snapshot() - start, stages)

    sched = plan_schedule(n, d, cfg)
    At = op.T
    if sched.spectral:
        res = block_krylov(At, KrylovParams(k, k, sched.q_spectral, _stage_seed(cfg.seed, 0)))
        stages["spectral"] = res.queries_used
        mark = op.snapshot()
        Z = orth(op, res.basis, cfg.seed)
        stages["final"] = op.snapshot() - mark
        decision = BranchDecision(Branch.SPECTRAL_FALLBACK,
                                  f"p={cfg.p} exceeds ln(d)/eps={math.log(d) / cfg.eps:.4g}",
                                  {"q": sched.q_spectral})
        return LraOutput(Z, decision, op.snapshot() - start, stages)

    r1 = block_krylov(At, KrylovParams(k, k, sched.q_w1, _stage_seed(cfg.seed, 1)))
    stages["w1"] = r1.queries_used
    r2 = block_krylov(At, KrylovParams(k, sched.s, sched.q_w2, _stage_seed(cfg.seed, 2)))
    stages["w2"] = r2.queries_used
    probe = spectrum_probe(op, k, sched.s, cfg, sched)
    stages["probe"] = probe.probe_queries
    decision = select_branch(probe, cfg.p, k, sched.s)
    W = r2.basis if decision.branch is Branch.SMALL_TAIL_W2 else r1.basis
    mark = op.snapshot()
    Z = orth(op, W, cfg.seed)
    stages["final"] = op.snapshot() - mark
    th = dict(decision.thresholds, gamma1=sched.gamma1, gamma2=cfg.eps, s=sched.s, q_w1=sched.q_w1,
              q_w2=sched.q_w2, q_probe1=sched.q_probe1, q_probe2=sched.q_probe2)
    decision = replace(decision, thresholds=th)
    return LraOutput(Z, decision, op.snapshot() - start, stages)


def schatten_lra(op: LinearOperator, cfg: LraConfig, certify: bool = True) -> LraOutput:
    """
    Rank-k basis Z with ||A (I - Z Z^T)||_p close to the best rank-k error.

    With ``certify`` and an operator that has an explicit form, the residual
    and the optimum are evaluated densely (outside the query count). With
    ``repetitions > 1`` independent seeds are run and the best certified Z kept.
    """
    outputs = []
    for rep in range(cfg.repetitions):
        sub = cfg if rep == 0 else replace(cfg, seed=_stage_seed(cfg.seed, 100 + rep))
        out = _single_run(op, sub)
        if certify or cfg.repetitions > 1:
            res, opt = _certify(op, out.basis, cfg)
            out = replace(out, residual_certificate=res, optimum=opt)
        outputs.append(out)
    if len(outputs) == 1:
        return outputs[0]
    if outputs[0].residual_certificate is None:
        raise ValueError("repetitions > 1 needs an operator with an explicit form")
    total = outputs[0].total_queries
    for o in outputs[1:]:
        total = total + o.total_queries
    best = min(outputs, key=lambda o: o.residual_certificate)
    return replace(best, total_queries=total)


def baseline_krylov_lra(op: LinearOperator, cfg: LraConfig, certify: bool = True) -> LraOutput:
    """Plain block Krylov on A^T with block k and q = ceil(c ln(d/eps)/sqrt(eps))."""
    n, d = op.shape
    start = op.snapshot()
    q = ceil_count(cfg.c * math.log(d / cfg.eps) / math.sqrt(cfg.eps))
    res = block_krylov(op.T, KrylovParams(cfg.k, cfg.k, q, _stage_seed(cfg.seed, 0)))
    Z = orth(op, res.basis, cfg.seed)
    out = LraOutput(Z, BranchDecision(Branch.SPECTRAL_FALLBACK, "baseline", {"q": q}),
                    op.snapshot() - start, {"baseline": op.snapshot() - start})
    if certify:
        r, o = _certify(op, Z, cfg)
        out = replace(out, residual_certificate=r, optimum=o)
    return out


def frobenius_rank1_sketch(op: LinearOperator, eps: float, c: float = DEFAULT_C, seed=None) -> np.ndarray:
    """
    Unit z approximately minimizing ||A (I - z z^T)||_F^2.

    A single-vector Krylov run of depth ceil(c/eps^(1/3)) and a block run of
    width ceil(c/eps^(1/3)) and depth ceil(c ln(n/eps)); the candidate with the
    larger ||A z|| wins (two extra products).
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    seed = rng.default_seed() if seed is None else seed
    n, d = op.shape
    depth = ceil_count(c / eps ** (1.0 / 3.0))
    width = min(depth, d)
    r1 = block_krylov(op, KrylovParams(1, 1, depth, _stage_seed(seed, 1)))
    r2 = block_krylov(op, KrylovParams(1, width, ceil_count(c * math.log(n / eps)), _stage_seed(seed, 2)))
    cands = np.hstack([r1.basis[:, :1], r2.basis[:, :1]])
    scores = np.sum(op.matmat(cands) ** 2, axis=0)
    z = cands[:, int(np.argmax(scores))]
    return z / np.linalg.norm(z)


def streaming_footprint(n, d, k, p, eps, c=1.0) -> tuple[int, int]:
    """(passes, words) of the multi-pass streaming variant; arithmetic only."""
    p = _parse_p(p)
    passes = ceil_count(c * math.log(d / eps) * p ** (1.0 / 6.0) / eps ** (1.0 / 3.0))
    words = ceil_count(c * n * k / eps ** (1.0 / 3.0))
    return passes, words
