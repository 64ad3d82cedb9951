import math

import numpy as np
import pytest

from schattenlra.instances import low_rank_matrix
from schattenlra.krylov import (KrylovParams, block_krylov, gap_dependent_schedule,
                                gap_independent_schedule, per_vector_errors)
from schattenlra.linop import build_operator, ledger_report
from schattenlra.lra import orth
from schattenlra.spectral import residual_cost, schatten_pow


class TestSchedules:
    def test_gap_independent_value(self):
        assert gap_independent_schedule(100, 0.04, 1) == 40

    def test_unit_gamma(self):
        assert gap_independent_schedule(1000, 1.0, 2.5) == math.ceil(2.5 * math.log(1000))

    def test_monotone_in_gamma(self):
        qs = [gap_independent_schedule(500, g, 1) for g in (0.5, 0.25, 0.125, 0.0625)]
        assert all(b >= a * math.sqrt(2) * 0.95 for a, b in zip(qs, qs[1:]))

    def test_minimum_one(self):
        assert gap_independent_schedule(1, 1.0, 1) == 1

    def test_bad_gamma(self):
        with pytest.raises(ValueError):
            gap_independent_schedule(10, 0.0)

    def test_unit_gap_factor(self):
        assert gap_dependent_schedule(100, 0.1, 3.0, 0.0, 1) == math.ceil(math.log(1000))

    def test_half_gap(self):
        assert gap_dependent_schedule(100, 0.1, 2.0, 1.0, 1) == math.ceil(math.sqrt(2) * math.log(1000))

    def test_gap_closing_grows(self):
        qs = [gap_dependent_schedule(50, 0.5, 1.0, lo, 1) for lo in (0.5, 0.9, 0.99, 0.999)]
        assert qs == sorted(qs) and qs[-1] > qs[0]

    def test_no_gap(self):
        with pytest.raises(ValueError, match="gap"):
            gap_dependent_schedule(10, 0.5, 1.0, 1.0)


class TestBlockKrylov:
    def test_large_gap_converges(self):
        op = build_operator({"kind": "diagonal", "diag": [10, 1, 0.1]})
        res = block_krylov(op, KrylovParams(1, 1, 2, seed=3))
        assert res.rayleigh_values[0] >= 100 - 1e-6
        assert np.sum((op.explicit() @ res.basis) ** 2) >= 100 - 1e-6

    @pytest.mark.parametrize("seed", range(5))
    def test_exact_rank_capture(self, seed):
        A = low_rank_matrix(40, 30, 3, seed)
        res = block_krylov(build_operator(A), KrylovParams(3, 3, 1, seed))
        assert residual_cost(A, res.basis, 2) <= 1e-8 * np.linalg.norm(A)

    def test_query_accounting(self):
        A = np.random.default_rng(0).standard_normal((50, 40))
        op = build_operator(A)
        s, q = 3, 4
        res = block_krylov(op, KrylovParams(2, s, q, seed=1))
        assert not res.dense_fallback
        # s for A^T U, 2s per later block, s for A applied to the last block
        assert res.queries_used.as_tuple() == (s * (q + 1), s * (q + 1))
        assert ledger_report(op) == res.queries_used

    def test_dense_fallback(self):
        A = np.random.default_rng(1).standard_normal((12, 8))
        op = build_operator(A)
        res = block_krylov(op, KrylovParams(2, 4, 1, seed=0))
        assert res.dense_fallback
        assert res.queries_used.as_tuple() == (8, 0)
        np.testing.assert_allclose(res.rayleigh_values, np.linalg.svd(A, compute_uv=False)[:2] ** 2)

    def test_output_invariants(self):
        A = np.random.default_rng(2).standard_normal((60, 40))
        res = block_krylov(build_operator(A), KrylovParams(4, 5, 3, seed=9))
        Z = res.basis
        assert np.max(np.abs(Z.T @ Z - np.eye(4))) <= 1e-8
        assert np.all(np.diff(res.rayleigh_values) <= 1e-12)
        np.testing.assert_allclose(res.rayleigh_values, np.sum((A @ Z) ** 2, axis=0), rtol=1e-9)

    def test_deterministic(self):
        A = np.random.default_rng(3).standard_normal((30, 20))
        a = block_krylov(build_operator(A), KrylovParams(2, 3, 3, seed=42)).basis
        b = block_krylov(build_operator(A), KrylovParams(2, 3, 3, seed=42)).basis
        c = block_krylov(build_operator(A), KrylovParams(2, 3, 3, seed=43)).basis
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_invalid_params(self):
        op = build_operator(np.eye(4))
        with pytest.raises(ValueError):
            block_krylov(op, KrylovParams(3, 2, 1))
        with pytest.raises(ValueError):
            block_krylov(op, KrylovParams(1, 5, 1))

    def test_zero_matrix_still_orthonormal(self):
        res = block_krylov(build_operator(np.zeros((10, 8))), KrylovParams(2, 2, 1, seed=0))
        Z = res.basis
        assert Z.shape == (8, 2)
        assert np.max(np.abs(Z.T @ Z - np.eye(2))) <= 1e-10
        np.testing.assert_array_equal(res.rayleigh_values, 0)

    def test_start_block(self):
        A = np.diag([3.0, 2.0, 1.0, 0.5, 0.1])
        start = np.eye(5)[:, :1]
        res = block_krylov(build_operator(A), KrylovParams(1, 1, 1, seed=0), start=start)
        assert abs(abs(res.basis[0, 0]) - 1) <= 1e-12


class TestPerVectorErrors:
    def test_exact_subspace(self):
        A = np.random.default_rng(4).standard_normal((9, 7))
        V = np.linalg.svd(A)[2].T[:, :3]
        np.testing.assert_allclose(per_vector_errors(A, V), 0, atol=1e-10)

    def test_diagonal(self):
        np.testing.assert_allclose(per_vector_errors(np.diag([2.0, 1.0]), np.array([[0.0], [1.0]])), [3.0])

    def test_random_nonnegative_top(self):
        rng = np.random.default_rng(5)
        A = rng.standard_normal((9, 7))
        Z = np.linalg.qr(rng.standard_normal((7, 1)))[0]
        assert per_vector_errors(A, Z)[0] >= 0


def test_basis_quality_transfer():
    """sigma_i(A Z) >= sigma_i(A^T W) for Z = orth(A^T W)."""
    for seed in range(20):
        A = np.random.default_rng(seed).standard_normal((25, 15))
        op = build_operator(A)
        W = block_krylov(op.T, KrylovParams(3, 3, 2, seed)).basis
        Z = orth(op, W)
        a = np.linalg.svd(A @ Z, compute_uv=False)
        b = np.linalg.svd(A.T @ W, compute_uv=False)
        assert np.all(a >= b - 1e-9)


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0, 5.0])
def test_per_vector_to_schatten(p):
    for seed in range(10):
        A = np.random.default_rng(seed).standard_normal((40, 30))
        k = 3
        res = block_krylov(build_operator(A), KrylovParams(k, k, 1, seed))
        s = np.linalg.svd(A, compute_uv=False)
        gam = np.maximum(per_vector_errors(A, res.basis), 0) / s[k] ** 2
        lhs = schatten_pow(np.linalg.svd(A @ res.basis, compute_uv=False), p)
        rhs = schatten_pow(s[:k], p) - np.sum(2 * gam * p * s[k] ** 2 * s[:k] ** (p - 2))
        assert lhs >= rhs - 1e-9 * abs(rhs)


def _gapped_instance(seed, n=30, ell=2, k=3, eps=0.3):
    x = eps / n
    g = np.random.default_rng(seed)
    s = np.concatenate([[10.0, 5.0], 5 * (1 - x) * np.linspace(1, 0.1, n - 2)])
    U = np.linalg.qr(g.standard_normal((n, n)))[0]
    V = np.linalg.qr(g.standard_normal((n, n)))[0]
    A = (U * s) @ V.T
    theta = math.sqrt(x ** 3) * s[k] / s[0] / 2
    T = U[:, ell:] @ np.linalg.qr(g.standard_normal((n - ell, ell)))[0]
    W = np.linalg.qr(U[:, :ell] + theta * T)[0]
    A_ell = (U[:, :ell] * s[:ell]) @ V[:, :ell].T
    return A, A_ell, W, s, x


@pytest.mark.parametrize("seed", range(10))
def test_high_accuracy_residual_transfer(seed):
    A, A_ell, W, s, x = _gapped_instance(seed)
    k = 3
    assert (s[1] - s[2]) / s[1] >= x * (1 - 1e-9)
    errors = s[:2] ** 2 - np.sum((A.T @ W) ** 2, axis=0)
    assert np.all(errors <= x ** 3 * s[k] ** 2)
    # left-side statement
    assert np.linalg.norm(A_ell.T - A_ell.T @ W @ W.T) ** 2 <= x ** 2 * s[k] ** 2
    # after the change of basis Z = orth(A^T W W^T)
    Z = np.linalg.svd(A.T @ W, full_matrices=False)[0]
    assert np.linalg.norm(A_ell - A_ell @ Z @ Z.T) ** 2 <= x ** 2 * s[k] ** 2
