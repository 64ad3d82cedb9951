"""
Query-complexity sweeps: our two-scale method against plain block Krylov,
emitted as CSV rows.
"""
from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rng
from .hardness import hard_instance
from .instances import power_law_diagonal, power_law_operator
from .lra import LraConfig, baseline_krylov_lra, schatten_lra
from .matrixio import read_matrix
from .spectral import INF

__all__ = ["BenchPlan", "BenchRow", "read_kv", "load_plan", "run_bench", "write_rows",
           "loglog_slope", "CSV_VERSION", "LRA_COLUMNS", "BENCH_COLUMNS", "HARDNESS_COLUMNS"]

CSV_VERSION = "# schattenlra-results v1"
LRA_COLUMNS = ["instance", "n", "d", "k", "p", "eps", "branch", "applies",
               "adjoint_applies", "residual", "optimum", "ratio"]
BENCH_COLUMNS = ["instance", "method", "n", "d", "k", "p", "eps", "branch", "applies",
                 "adjoint_applies", "total", "residual", "optimum", "ratio", "wall_ms", "errors"]
HARDNESS_COLUMNS = LRA_COLUMNS + ["lambda_min_true", "lambda_hat", "abs_error"]

GENERATORS = ("powerlaw", "diagonal", "file", "wishart")


def read_kv(path) -> dict:
    """Flat ``key = value`` file; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            if not key:
                raise ValueError(f"{path}:{lineno}: empty key")
            out[key] = value
    return out


def _grid(value, cast):
    if isinstance(value, (list, tuple)):
        return [cast(v) for v in value]
    return [cast(v) for v in str(value).split(",") if v.strip()]


def _p_value(v):
    v = str(v).strip().lower()
    return INF if v in ("inf", "infinity") else float(v)


def _bool(v):
    return str(v).strip().lower() in ("1", "true", "yes", "on")


@dataclass(frozen=True)
class BenchPlan:
    eps: list
    p: list
    k: list
    seeds: int = 10
    generator: str = "powerlaw"
    n: int = 200
    d: int = 150
    alpha: float = 1.0
    path: str | None = None
    c: float = 4.0
    base_seed: int = 0
    baseline: bool = True
    certify: bool = True
    timing: bool = True
    workers: int = 1
    out: str | None = None

    def __post_init__(self):
        if not (self.eps and self.p and self.k):
            raise ValueError("bench grids over eps, p and k must be non-empty")
        if self.seeds < 1:
            raise ValueError("seeds must be >= 1")
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}; choose from {GENERATORS}")
        if self.generator == "file" and not self.path:
            raise ValueError("generator 'file' needs a path")

    @classmethod
    def from_mapping(cls, kv: dict) -> "BenchPlan":
        casts = {"generator": str, "n": int, "d": int, "alpha": float, "path": str, "c": float,
                 "seeds": int, "base_seed": lambda v: int(v, 0), "baseline": _bool,
                 "certify": _bool, "timing": _bool, "workers": int, "out": str}
        kw = {}
        for key in ("eps", "p", "k"):
            if key not in kv:
                raise ValueError(f"plan is missing '{key}'")
        kw["eps"] = _grid(kv["eps"], float)
        kw["p"] = _grid(kv["p"], _p_value)
        kw["k"] = _grid(kv["k"], int)
        for key, value in kv.items():
            if key in ("eps", "p", "k"):
                continue
            if key not in casts:
                raise ValueError(f"unknown plan key {key!r}")
            kw[key] = casts[key](value) if not isinstance(value, (int, float, bool)) else value
        return cls(**kw)

    def cells(self):
        return [(k, p, e) for k in self.k for p in self.p for e in self.eps]


def load_plan(path) -> BenchPlan:
    return BenchPlan.from_mapping(read_kv(path))


@dataclass
class BenchRow:
    instance: str
    method: str
    n: int
    d: int
    k: int
    p: float
    eps: float
    branch: str = ""
    applies: int = 0
    adjoint_applies: int = 0
    total: int = 0
    residual: float | None = None
    optimum: float | None = None
    ratio: float | None = None
    wall_ms: float | None = None
    errors: str = ""
    order: tuple = field(default=(), repr=False)

    def as_list(self):
        def fmt(x):
            if x is None:
                return ""
            if isinstance(x, float):
                return "inf" if math.isinf(x) else repr(x)
            return str(x)
        return [fmt(getattr(self, c)) for c in BENCH_COLUMNS]


def _make_instance(plan: BenchPlan, trial: int):
    if plan.generator == "powerlaw":
        op = power_law_operator(plan.n, plan.d, plan.alpha, seed=trial)
        return f"powerlaw-{plan.n}x{plan.d}-a{plan.alpha:g}-s{trial}", op
    if plan.generator == "diagonal":
        return f"diag-{plan.d}-a{plan.alpha:g}", power_law_diagonal(plan.d, plan.alpha)
    if plan.generator == "wishart":
        return f"wishart-{plan.n}-s{trial}", hard_instance(plan.n, seed=trial)
    return Path(plan.path).name, read_matrix(plan.path)


def _run_cell(plan: BenchPlan, cell_index: int, cell, trial: int) -> list:
    k, p, eps = cell
    seed = int(rng.generator(plan.base_seed, cell_index, trial).integers(0, 2 ** 63))
    methods = [("ours", schatten_lra)]
    if plan.baseline:
        methods.append(("baseline", baseline_krylov_lra))
    rows = []
    try:
        name, op = _make_instance(plan, trial)
    except Exception as exc:  # generator failure aborts the cell
        return [BenchRow(f"trial{trial}", m, plan.n, plan.d, k, p, eps,
                         errors=f"{type(exc).__name__}: {exc}", order=(cell_index, trial, i))
                for i, (m, _) in enumerate(methods)]
    n, d = op.shape
    for i, (method, fn) in enumerate(methods):
        row = BenchRow(name, method, n, d, k, p, eps, order=(cell_index, trial, i))
        try:
            cfg = LraConfig(k=k, eps=eps, p=p, c=plan.c, seed=seed)
            t0 = time.perf_counter()
            out = fn(op, cfg, certify=plan.certify)
            wall = (time.perf_counter() - t0) * 1e3
            row.branch = "baseline" if method == "baseline" else out.decision.branch.value
            row.applies, row.adjoint_applies = out.total_queries.as_tuple()
            row.total = out.total_queries.total
            row.residual = out.residual_certificate
            row.optimum = out.optimum
            row.ratio = out.ratio
            row.wall_ms = round(wall, 3) if plan.timing else None
        except Exception as exc:
            row.errors = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows


def run_bench(plan: BenchPlan) -> list:
    """One row per (cell, seed, method); order is (cell index, seed) regardless of workers."""
    jobs = [(ci, cell, t) for ci, cell in enumerate(plan.cells()) for t in range(plan.seeds)]
    if plan.workers > 1:
        with ThreadPoolExecutor(plan.workers) as pool:
            chunks = list(pool.map(lambda j: _run_cell(plan, *j), jobs))
    else:
        chunks = [_run_cell(plan, *j) for j in jobs]
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: r.order)
    return rows


def rows_to_csv(rows, columns=BENCH_COLUMNS) -> str:
    buf = io.StringIO()
    buf.write(CSV_VERSION + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow(r.as_list() if isinstance(r, BenchRow) else r)
    return buf.getvalue()


def write_rows(rows, path, columns=BENCH_COLUMNS) -> None:
    Path(path).write_text(rows_to_csv(rows, columns))


def loglog_slope(x, y) -> float:
    """Least-squares slope of log y against log x."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return float(np.polyfit(lx, ly, 1)[0])
