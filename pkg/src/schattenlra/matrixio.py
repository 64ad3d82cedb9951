"""Reading operators from dense CSV and Matrix Market coordinate files."""
from __future__ import annotations

import enum
import math
from pathlib import Path

import numpy as np

from .linop import DenseOperator, LinearOperator, SparseOperator

__all__ = ["MatrixFormat", "ParseError", "read_matrix", "read_csv", "read_matrix_market",
           "guess_format", "write_matrix_market"]

MM_HEADER = "%%matrixmarket matrix coordinate real general"


class MatrixFormat(enum.Enum):
    MATRIX_MARKET = "mm"
    DENSE_CSV = "csv"


class ParseError(ValueError):
    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}" if line else f"{path}: {message}")


def _finite(x, path, lineno):
    try:
        v = float(x)
    except ValueError:
        raise ParseError(path, lineno, f"not a number: {x!r}") from None
    if not math.isfinite(v):
        raise ParseError(path, lineno, f"non-finite value {x!r}")
    return v


def read_csv(path) -> DenseOperator:
    rows = []
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            vals = [_finite(tok.strip(), path, lineno) for tok in line.split(",")]
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise ParseError(path, lineno, f"expected {width} columns, got {len(vals)}")
            rows.append(vals)
    if not rows:
        raise ParseError(path, 0, "empty matrix file")
    return DenseOperator(np.array(rows))


def read_matrix_market(path) -> SparseOperator:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError(path, 0, "empty matrix file")
    header = " ".join(lines[0].lower().split())
    if header != MM_HEADER:
        raise ParseError(path, 1, f"unsupported header {lines[0]!r}; expected {MM_HEADER!r}")
    size = None
    entries = []
    for lineno, line in enumerate(lines[1:], 2):
        line = line.strip()
        if not line or line.startswith("%"):
            continue
        toks = line.split()
        if size is None:
            if len(toks) != 3:
                raise ParseError(path, lineno, "size line must read 'rows cols nnz'")
            try:
                size = tuple(int(t) for t in toks)
            except ValueError:
                raise ParseError(path, lineno, f"bad size line {line!r}") from None
            if size[0] < 1 or size[1] < 1 or size[2] < 0:
                raise ParseError(path, lineno, f"invalid dimensions {size}")
            continue
        if len(toks) != 3:
            raise ParseError(path, lineno, "entry must read 'row col value'")
        try:
            i, j = int(toks[0]), int(toks[1])
        except ValueError:
            raise ParseError(path, lineno, f"bad coordinates {line!r}") from None
        if not (1 <= i <= size[0] and 1 <= j <= size[1]):
            raise ParseError(path, lineno, f"coordinate ({i}, {j}) outside {size[0]}x{size[1]}")
        entries.append((i - 1, j - 1, _finite(toks[2], path, lineno)))
    if size is None:
        raise ParseError(path, len(lines), "missing size line")
    if len(entries) != size[2]:
        raise ParseError(path, len(lines), f"header declares {size[2]} entries, found {len(entries)}")
    return SparseOperator(size[0], size[1], entries)


def guess_format(path) -> MatrixFormat:
    suffix = Path(path).suffix.lower()
    if suffix in (".mtx", ".mm"):
        return MatrixFormat.MATRIX_MARKET
    return MatrixFormat.DENSE_CSV


def read_matrix(path, format: MatrixFormat | str | None = None) -> LinearOperator:
    fmt = guess_format(path) if format is None else MatrixFormat(format)
    if not Path(path).exists():
        raise ParseError(path, 0, "no such file")
    if fmt is MatrixFormat.MATRIX_MARKET:
        return read_matrix_market(path)
    return read_csv(path)


def write_matrix_market(path, matrix) -> None:
    A = np.asarray(matrix, dtype=float)
    i, j = np.nonzero(A)
    with open(path, "w") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        fh.write(f"{A.shape[0]} {A.shape[1]} {i.size}\n")
        for a, b in zip(i, j):
            fh.write(f"{a + 1} {b + 1} {float(A[a, b])!r}\n")
