"""
Dense ground truth: SVD oracle, Schatten-p norms, the closed-form 2x2 SVD,
and slack evaluators for the operator inequalities the algorithms rely on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "INF",
    "Spectrum",
    "InequalitySlack",
    "dense_svd",
    "schatten_norm",
    "schatten_pow",
    "best_rank_k_error",
    "residual_cost",
    "svd_2x2",
    "pinching_slack",
    "alt_slack",
    "psd_power",
    "slack_tolerance",
    "check_orthonormal",
]

INF = math.inf
ORTHO_TOL = 1e-8
PSD_TOL = 1e-8


def _is_inf(p) -> bool:
    return p is INF or (isinstance(p, (int, float)) and math.isinf(p)) or p == "inf"


def _norm_order(p):
    if _is_inf(p):
        return INF
    p = float(p)
    if not p >= 1:
        raise ValueError(f"Schatten order must satisfy p >= 1, got {p}")
    return p


@dataclass(frozen=True)
class Spectrum:
    singular_values: np.ndarray
    left: np.ndarray
    right: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.singular_values) @ self.right.T


@dataclass(frozen=True)
class InequalitySlack:
    """``slack = lhs - rhs``; each evaluator documents which sign is asserted."""

    lhs: float
    rhs: float
    slack: float

    @property
    def tolerance(self) -> float:
        return slack_tolerance(self.lhs, self.rhs)


def slack_tolerance(lhs, rhs) -> float:
    return 1e-9 * max(1.0, abs(lhs), abs(rhs))


def _finite_2d(matrix) -> np.ndarray:
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2 or min(A.shape) < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix contains non-finite entries")
    return A


def dense_svd(matrix) -> Spectrum:
    A = _finite_2d(matrix)
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    return Spectrum(s, U, Vt.T)


def _values(sigma) -> np.ndarray:
    if isinstance(sigma, Spectrum):
        sigma = sigma.singular_values
    s = np.abs(np.asarray(sigma, dtype=float).ravel())
    return s


def schatten_norm(sigma, p) -> float:
    """(sum sigma_i^p)^(1/p), with sigma_1 factored out for stability; p=inf gives sigma_1."""
    p = _norm_order(p)
    s = _values(sigma)
    if s.size == 0:
        return 0.0
    top = s.max()
    if top == 0.0:
        return 0.0
    if p == INF:
        return float(top)
    return float(top * np.sum((s / top) ** p) ** (1.0 / p))


def schatten_pow(sigma, p) -> float:
    """sum sigma_i^p, the p-th power of the Schatten-p norm (finite p only)."""
    p = _norm_order(p)
    if p == INF:
        raise ValueError("p-th power is undefined for p = inf")
    return float(np.sum(_values(sigma) ** p))


def matrix_schatten(matrix, p) -> float:
    return schatten_norm(np.linalg.svd(_finite_2d(matrix), compute_uv=False), p)


def best_rank_k_error(matrix, k, p) -> float:
    A = _finite_2d(matrix)
    if not 0 <= k <= min(A.shape):
        raise ValueError(f"k={k} outside [0, {min(A.shape)}]")
    s = np.linalg.svd(A, compute_uv=False)
    return schatten_norm(s[k:], p)


def check_orthonormal(Z, name="Z", tol=ORTHO_TOL) -> np.ndarray:
    Z = np.asarray(Z, dtype=float)
    if Z.ndim == 1:
        Z = Z[:, None]
    err = np.max(np.abs(Z.T @ Z - np.eye(Z.shape[1]))) if Z.size else 0.0
    if err > tol:
        raise ValueError(f"{name} is not column-orthonormal (max |{name}^T{name} - I| = {err:.2e})")
    return Z


def residual_cost(matrix, Z, p) -> float:
    """Schatten-p norm of A (I - Z Z^T)."""
    A = _finite_2d(matrix)
    Z = check_orthonormal(Z)
    if Z.shape[0] != A.shape[1]:
        raise ValueError(f"Z has {Z.shape[0]} rows, matrix has {A.shape[1]} columns")
    R = A - (A @ Z) @ Z.T
    return matrix_schatten(R, p)


def svd_2x2(a, b, c, d) -> tuple[float, float]:
    """Singular values of [[a, b], [c, d]] in closed form."""
    a, b, c, d = (float(x) for x in (a, b, c, d))
    frob = a * a + b * b + c * c + d * d
    root = math.hypot(a * a + b * b - c * c - d * d, 2.0 * (a * c + b * d))
    s1 = math.sqrt((frob + root) / 2.0)
    # the subtractive formula for s2 cancels badly; |det| = s1 * s2 is exact
    s2 = abs(a * d - b * c) / s1 if s1 > 0 else 0.0
    return s1, min(s2, s1)


def _orthonormal_basis(B, name):
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    return check_orthonormal(B, name)


def pinching_slack(A, P_basis, Q_basis, p) -> InequalitySlack:
    """
    ``||A||^p - ||P A Q||^p - ||(I-P) A (I-Q)||^p``, asserted >= 0.

    P and Q are the orthogonal projectors onto the column spans of the bases.
    """
    A = _finite_2d(A)
    X = _orthonormal_basis(P_basis, "P_basis")
    Y = _orthonormal_basis(Q_basis, "Q_basis")
    P = X @ X.T
    Q = Y @ Y.T
    inner = P @ A @ Q
    outer = A - P @ A - A @ Q + inner
    p = _norm_order(p)
    if p == INF:
        lhs = matrix_schatten(A, p)
        rhs = max(matrix_schatten(inner, p), matrix_schatten(outer, p))
    else:
        sv = lambda M: np.linalg.svd(M, compute_uv=False)
        lhs = schatten_pow(sv(A), p)
        rhs = schatten_pow(sv(inner), p) + schatten_pow(sv(outer), p)
    return InequalitySlack(lhs, rhs, lhs - rhs)


def _symmetric_psd(M, name):
    M = _finite_2d(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square")
    M = (M + M.T) / 2.0
    w, V = np.linalg.eigh(M)
    scale = max(1.0, float(np.max(np.abs(w))))
    if w.min() < -PSD_TOL * scale:
        raise ValueError(f"{name} is not positive semidefinite (min eigenvalue {w.min():.3e})")
    return np.clip(w, 0.0, None), V


def psd_power(M, r) -> np.ndarray:
    """M^r for symmetric PSD M via eigendecomposition; tiny negative eigenvalues clamp to 0."""
    w, V = _symmetric_psd(M, "matrix")
    return (V * w ** r) @ V.T


def alt_slack(A_psd, B_psd, r) -> InequalitySlack:
    """
    ``tr((BAB)^r) - tr(B^r A^r B^r)``.

    Non-positive for r >= 1, non-negative for 0 < r < 1, zero at r = 1.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    wa, Va = _symmetric_psd(A_psd, "A")
    wb, Vb = _symmetric_psd(B_psd, "B")
    if wa.size != wb.size:
        raise ValueError("A and B must have the same dimension")
    B = (Vb * wb) @ Vb.T
    A = (Va * wa) @ Va.T
    BAB = B @ A @ B
    w_bab = np.clip(np.linalg.eigvalsh((BAB + BAB.T) / 2.0), 0.0, None)
    lhs = float(np.sum(w_bab ** r))
    Br = (Vb * wb ** r) @ Vb.T
    Ar = (Va * wa ** r) @ Va.T
    rhs = float(np.trace(Br @ Ar @ Br))
    return InequalitySlack(lhs, rhs, lhs - rhs)
