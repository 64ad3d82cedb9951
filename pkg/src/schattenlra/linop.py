"""
Implicit matrices accessed only through counted matrix-vector products.

Every product ``A @ v`` or ``A.T @ v`` issued through a :class:`LinearOperator`
is charged to its :class:`QueryLedger`. A block of ``b`` vectors is charged as
``b`` products. Transposed views share the ledger of the operator they wrap, so
counts are always reported in terms of the original matrix.
"""
from __future__ import annotations

import enum
import threading
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = [
    "OperatorShape",
    "QueryLedger",
    "LedgerSnapshot",
    "Side",
    "PolyKind",
    "PolynomialSpec",
    "LinearOperator",
    "build_operator",
    "dense_operator",
    "diagonal_operator",
    "sparse_operator",
    "polynomial_operator",
    "apply",
    "ledger_report",
]

MAX_POLY_DEGREE = 64


class Side(enum.Enum):
    NORMAL = "normal"
    ADJOINT = "adjoint"


class PolyKind(enum.Enum):
    GRAM_POWER = "gram_power"  # (A^T A)^l
    A_GRAM_POWER = "a_gram_power"  # A (A^T A)^l


@dataclass(frozen=True)
class OperatorShape:
    rows: int
    cols: int

    def __post_init__(self):
        if int(self.rows) < 1 or int(self.cols) < 1:
            raise ValueError(f"operator shape must be positive, got {self.rows}x{self.cols}")

    def __iter__(self):
        yield self.rows
        yield self.cols


@dataclass(frozen=True)
class LedgerSnapshot:
    applies: int = 0
    adjoint_applies: int = 0

    @property
    def total(self) -> int:
        return self.applies + self.adjoint_applies

    def __sub__(self, other: "LedgerSnapshot") -> "LedgerSnapshot":
        return LedgerSnapshot(self.applies - other.applies,
                              self.adjoint_applies - other.adjoint_applies)

    def __add__(self, other: "LedgerSnapshot") -> "LedgerSnapshot":
        return LedgerSnapshot(self.applies + other.applies,
                              self.adjoint_applies + other.adjoint_applies)

    def as_tuple(self) -> tuple[int, int]:
        return (self.applies, self.adjoint_applies)


class QueryLedger:
    """Monotone, thread-safe counters of products with A and with A^T."""

    def __init__(self):
        self._lock = threading.Lock()
        self._applies = 0
        self._adjoint = 0

    def charge(self, side: Side, count: int = 1) -> None:
        if count < 0:
            raise ValueError("ledger counts are monotone")
        with self._lock:
            if side is Side.NORMAL:
                self._applies += count
            else:
                self._adjoint += count

    def snapshot(self) -> LedgerSnapshot:
        with self._lock:
            return LedgerSnapshot(self._applies, self._adjoint)

    @property
    def applies(self) -> int:
        return self.snapshot().applies

    @property
    def adjoint_applies(self) -> int:
        return self.snapshot().adjoint_applies

    @property
    def total(self) -> int:
        return self.snapshot().total

    def __repr__(self):
        s = self.snapshot()
        return f"QueryLedger(applies={s.applies}, adjoint_applies={s.adjoint_applies})"


def _flip(side: Side) -> Side:
    return Side.ADJOINT if side is Side.NORMAL else Side.NORMAL


class LinearOperator:
    """
    An n x d matrix available only through products with vectors.

    Subclasses implement ``_matmat(X, side)`` on a 2-D block. The public
    methods validate input, charge the ledger, and dispatch.
    """

    backing = "abstract"

    def __init__(self, rows: int, cols: int, ledger: QueryLedger | None = None):
        self.shape = OperatorShape(int(rows), int(cols))
        self.ledger = ledger if ledger is not None else QueryLedger()

    @property
    def n(self) -> int:
        return self.shape.rows

    @property
    def d(self) -> int:
        return self.shape.cols

    # -- counted access -------------------------------------------------
    def apply(self, v, side: Side = Side.NORMAL) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.ndim != 1:
            raise ValueError(f"apply expects a vector, got array of shape {v.shape}")
        return self.matmat(v[:, None], side)[:, 0]

    def rapply(self, v) -> np.ndarray:
        return self.apply(v, Side.ADJOINT)

    def matmat(self, X, side: Side = Side.NORMAL) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2:
            raise ValueError(f"matmat expects a 2-D block, got shape {X.shape}")
        expected = self.d if side is Side.NORMAL else self.n
        if X.shape[0] != expected:
            label = "cols" if side is Side.NORMAL else "rows"
            raise ValueError(
                f"dimension mismatch: {side.value} product needs length {expected} "
                f"(operator {label}), got {X.shape[0]}")
        if not np.all(np.isfinite(X)):
            raise ValueError("input contains non-finite entries")
        self._charge(side, X.shape[1])
        return self._matmat(X, side)

    def rmatmat(self, X) -> np.ndarray:
        return self.matmat(X, Side.ADJOINT)

    def _charge(self, side: Side, count: int) -> None:
        self.ledger.charge(side, count)

    def _matmat(self, X: np.ndarray, side: Side) -> np.ndarray:
        raise NotImplementedError

    # -- views and oracle access -----------------------------------------
    @property
    def T(self) -> "LinearOperator":
        return TransposedOperator(self)

    def explicit(self) -> np.ndarray:
        """Dense copy of the matrix, outside the query model (oracle use only)."""
        raise NotImplementedError(f"{type(self).__name__} has no explicit form")

    def snapshot(self) -> LedgerSnapshot:
        return self.ledger.snapshot()

    def __repr__(self):
        return f"{type(self).__name__}({self.n}x{self.d}, {self.ledger!r})"


class DenseOperator(LinearOperator):
    backing = "dense"

    def __init__(self, matrix, ledger=None):
        M = np.array(matrix, dtype=float, copy=True)
        if M.ndim != 2:
            raise ValueError(f"dense backing must be 2-D, got shape {M.shape}")
        if not np.all(np.isfinite(M)):
            raise ValueError("dense backing contains non-finite entries")
        M.setflags(write=False)
        super().__init__(*M.shape, ledger=ledger)
        self._M = M

    def _matmat(self, X, side):
        return self._M @ X if side is Side.NORMAL else self._M.T @ X

    def explicit(self):
        return self._M.copy()


class DiagonalOperator(LinearOperator):
    backing = "diagonal"

    def __init__(self, diag, ledger=None):
        w = np.array(diag, dtype=float, copy=True).ravel()
        if w.size < 1:
            raise ValueError("diagonal backing must be non-empty")
        if not np.all(np.isfinite(w)):
            raise ValueError("diagonal backing contains non-finite entries")
        w.setflags(write=False)
        super().__init__(w.size, w.size, ledger=ledger)
        self._w = w

    def _matmat(self, X, side):
        return self._w[:, None] * X

    def explicit(self):
        return np.diag(self._w)


class SparseOperator(LinearOperator):
    backing = "sparse"

    def __init__(self, rows, cols, triplets=None, *, row_idx=None, col_idx=None,
                 values=None, ledger=None):
        if triplets is not None:
            t = np.asarray(list(triplets), dtype=float).reshape(-1, 3)
            row_idx, col_idx, values = t[:, 0], t[:, 1], t[:, 2]
        r = np.asarray(row_idx if row_idx is not None else [], dtype=float)
        c = np.asarray(col_idx if col_idx is not None else [], dtype=float)
        v = np.asarray(values if values is not None else [], dtype=float)
        if not (r.shape == c.shape == v.shape):
            raise ValueError("sparse triplet arrays must have equal length")
        if np.any(r != np.round(r)) or np.any(c != np.round(c)):
            raise ValueError("sparse coordinates must be integers")
        r = r.astype(np.int64)
        c = c.astype(np.int64)
        if r.size and (r.min() < 0 or r.max() >= rows or c.min() < 0 or c.max() >= cols):
            raise ValueError(f"sparse coordinate outside {rows}x{cols}")
        if not np.all(np.isfinite(v)):
            raise ValueError("sparse backing contains non-finite entries")
        super().__init__(rows, cols, ledger=ledger)
        # duplicates are summed by the COO -> CSR conversion
        self._csr = sp.coo_matrix((v, (r, c)), shape=(rows, cols)).tocsr()
        self._csr.sum_duplicates()
        self._csc_t = self._csr.T.tocsr()

    def _matmat(self, X, side):
        M = self._csr if side is Side.NORMAL else self._csc_t
        return np.asarray(M @ X)

    def explicit(self):
        return self._csr.toarray()


class TransposedOperator(LinearOperator):
    """A^T as a view on A; shares A's ledger with the sides swapped."""

    def __init__(self, base: LinearOperator):
        super().__init__(base.d, base.n, ledger=base.ledger)
        self.base = base
        self.backing = f"transpose({base.backing})"

    def _charge(self, side, count):
        # the base's matmat charges, with the side flipped
        pass

    def _matmat(self, X, side):
        return self.base.matmat(X, _flip(side))

    @property
    def T(self):
        return self.base

    def explicit(self):
        return self.base.explicit().T


@dataclass(frozen=True)
class PolynomialSpec:
    base: LinearOperator
    degree: int
    kind: PolyKind = PolyKind.GRAM_POWER


class PolynomialOperator(LinearOperator):
    """
    (A^T A)^l or A (A^T A)^l evaluated by repeated products with the base.

    The operator keeps its own ledger for products with itself; the chain of
    base products is charged to the base operator's ledger.
    """

    backing = "polynomial"

    def __init__(self, spec: PolynomialSpec, max_degree: int = MAX_POLY_DEGREE):
        degree = int(spec.degree)
        if degree < 0:
            raise ValueError("polynomial degree must be non-negative")
        if degree > max_degree:
            raise ValueError(f"polynomial degree {degree} exceeds maximum {max_degree}")
        self.spec = spec
        self.degree = degree
        self.kind = PolyKind(spec.kind)
        A = spec.base
        rows = A.d if self.kind is PolyKind.GRAM_POWER else A.n
        super().__init__(rows, A.d)

    def _gram_power(self, X):
        A = self.spec.base
        for _ in range(self.degree):
            X = A.rmatmat(A.matmat(X))
        return X

    def _matmat(self, X, side):
        A = self.spec.base
        if self.kind is PolyKind.GRAM_POWER:
            return self._gram_power(X)
        if side is Side.NORMAL:
            return A.matmat(self._gram_power(X))
        return self._gram_power(A.rmatmat(X))

    def chain_length(self, side: Side = Side.NORMAL) -> tuple[int, int]:
        """Base (applies, adjoint_applies) issued per single product."""
        l = self.degree
        if self.kind is PolyKind.GRAM_POWER:
            return (l, l)
        return (l + 1, l) if side is Side.NORMAL else (l, l + 1)

    def explicit(self):
        B = self.spec.base.explicit()
        G = np.linalg.matrix_power(B.T @ B, self.degree)
        return G if self.kind is PolyKind.GRAM_POWER else B @ G


def dense_operator(matrix) -> DenseOperator:
    return DenseOperator(matrix)


def diagonal_operator(diag) -> DiagonalOperator:
    return DiagonalOperator(diag)


def sparse_operator(rows, cols, triplets) -> SparseOperator:
    return SparseOperator(rows, cols, triplets)


def polynomial_operator(spec: PolynomialSpec, max_degree: int = MAX_POLY_DEGREE):
    return PolynomialOperator(spec, max_degree=max_degree)


def build_operator(spec) -> LinearOperator:
    """
    Build an operator from a backing descriptor.

    Accepted descriptors are a 2-D array (dense), a :class:`PolynomialSpec`,
    a scipy sparse matrix, or a mapping with a ``kind`` key::

        {"kind": "dense", "matrix": ...}
        {"kind": "diagonal", "diag": ..., "shape": (n, n)}   # shape optional
        {"kind": "sparse", "shape": (n, d), "triplets": [(i, j, v), ...]}
        {"kind": "polynomial", "base": op, "degree": l, "poly": "gram_power"}

    Sparse coordinates are 0-indexed; duplicate coordinates are summed.
    """
    if isinstance(spec, LinearOperator):
        raise TypeError("already an operator")
    if isinstance(spec, PolynomialSpec):
        return PolynomialOperator(spec)
    if sp.issparse(spec):
        coo = spec.tocoo()
        return SparseOperator(coo.shape[0], coo.shape[1], row_idx=coo.row,
                              col_idx=coo.col, values=coo.data)
    if isinstance(spec, dict):
        kind = spec.get("kind")
        if kind == "dense":
            return DenseOperator(spec["matrix"])
        if kind == "diagonal":
            diag = np.asarray(spec["diag"], dtype=float).ravel()
            shape = spec.get("shape")
            if shape is not None and (shape[0] != shape[1] or shape[0] != diag.size):
                raise ValueError(f"diagonal backing requires square shape {diag.size}x{diag.size}, "
                                 f"got {shape[0]}x{shape[1]}")
            return DiagonalOperator(diag)
        if kind == "sparse":
            rows, cols = spec["shape"]
            return SparseOperator(rows, cols, spec.get("triplets", []))
        if kind == "polynomial":
            poly = PolyKind(spec.get("poly", "gram_power"))
            return PolynomialOperator(PolynomialSpec(spec["base"], spec["degree"], poly),
                                      max_degree=spec.get("max_degree", MAX_POLY_DEGREE))
        raise ValueError(f"unknown backing kind {kind!r}")
    return DenseOperator(spec)


def apply(op: LinearOperator, v, side: Side = Side.NORMAL) -> np.ndarray:
    return op.apply(v, Side(side))


def ledger_report(op: LinearOperator) -> LedgerSnapshot:
    return op.ledger.snapshot()
