import numpy as np
import pytest

from schattenlra.hardness import (HardnessConfig, WishartInstance, hard_instance,
                                  hardness_experiment, min_eig_estimate, sample_wishart)
from schattenlra.linop import LedgerSnapshot, build_operator
from schattenlra.spectral import schatten_pow
from schattenlra.verify import block_compression


def test_one_dimensional_mean():
    vals = [sample_wishart(1, s).W[0, 0] for s in range(4000)]
    assert abs(np.mean(vals) - 1) <= 0.08
    assert min(vals) >= 0


def test_exact_gram_and_symmetry():
    inst = sample_wishart(30, 4)
    np.testing.assert_allclose(inst.W, inst.X @ inst.X.T, atol=1e-12)
    assert np.max(np.abs(inst.W - inst.W.T)) <= 1e-12


def test_trace_mean():
    means = [np.trace(sample_wishart(200, s).W) / 200 for s in range(10)]
    assert abs(np.mean(means) - 1) <= 0.1


def test_sample_rejects_zero():
    with pytest.raises(ValueError):
        sample_wishart(0, 1)


def test_zero_wishart_gives_identity():
    op = hard_instance(5, wishart=np.zeros((5, 5)))
    np.testing.assert_array_equal(op.explicit(), np.eye(5))


def test_wrong_shape_injection():
    with pytest.raises(ValueError):
        hard_instance(5, wishart=np.zeros((4, 4)))


def test_eigenvalue_relation():
    inst = sample_wishart(25, 2)
    A = hard_instance(25, wishart=inst).explicit()
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(A)),
                               np.sort(1 - inst.eigvalsh() / 5), atol=1e-12)


def test_spectrum_in_unit_interval():
    inst = sample_wishart(100, 3)
    assert inst.eigvalsh()[-1] <= 5
    ev = np.linalg.eigvalsh(hard_instance(100, wishart=inst).explicit())
    assert ev.min() >= -1e-12 and ev.max() <= 1 + 1e-12


@pytest.mark.parametrize("p", [1, 2, 3])
def test_schatten_bracket(p):
    n = 200
    A = hard_instance(n, seed=5).explicit()
    val = schatten_pow(np.linalg.svd(A, compute_uv=False), p)
    assert 0.1 * n <= val <= n


class TestEstimator:
    def test_identity(self):
        v = np.ones(4) / 2
        assert min_eig_estimate(build_operator(np.eye(4)), v, 2) == 0.0

    def test_one_apply(self):
        op = build_operator(np.eye(3))
        min_eig_estimate(op, np.eye(3)[0], 1)
        assert op.snapshot().as_tuple() == (1, 0)

    def test_p1_exact(self):
        inst = sample_wishart(20, 7)
        w, V = np.linalg.eigh(inst.W)
        lam = min_eig_estimate(hard_instance(20, wishart=inst), V[:, 0], 1)
        assert lam == pytest.approx(w[0], abs=1e-12)

    @pytest.mark.parametrize("p", [2.0, 4.0])
    def test_top_eigenvector(self, p):
        inst = sample_wishart(20, 8)
        w, V = np.linalg.eigh(inst.W)
        lam = min_eig_estimate(hard_instance(20, wishart=inst), V[:, 0], p)
        assert lam == pytest.approx(5 / p * (1 - (1 - w[0] / 5) ** p), abs=1e-12)

    def test_rejects_non_unit(self):
        with pytest.raises(ValueError, match="unit"):
            min_eig_estimate(build_operator(np.eye(2)), [1.0, 1.0], 2)


@pytest.mark.parametrize("p", [1.0, 2.0, 4.0])
def test_experiment_accuracy(p):
    n = 40
    good = 0
    for seed in range(5):
        r = hardness_experiment(n, p, HardnessConfig(p=p, seed=seed))
        assert r.abs_error == abs(r.lambda_hat - r.lambda_min_true)
        assert r.lambda_min_true >= 0
        good += r.abs_error <= 2 * r.eps ** (2 / 3)
    assert good >= 4


def test_experiment_queries_sum():
    r = hardness_experiment(30, 2.0, HardnessConfig(p=2.0, seed=1))
    total = sum(r.stage_queries.values(), LedgerSnapshot())
    assert total == r.queries_used
    assert r.stage_queries["estimate"].as_tuple() == (1, 0)


def test_calibration_sets_eps():
    assert HardnessConfig(calibration=2.0).eps_for(40) == pytest.approx((2 / 40) ** 3)


def test_injected_wishart():
    inst = WishartInstance(6, np.diag([0.5, 1, 1, 2, 2, 3.0]), 0)
    r = hardness_experiment(6, 1.0, HardnessConfig(p=1.0, seed=0), wishart=inst)
    assert r.lambda_min_true == 0.5
    assert r.abs_error <= 1e-9


@pytest.mark.parametrize("seed", range(10))
def test_alt_route(seed):
    n = 12
    A = hard_instance(n, seed=seed).explicit()
    g = np.random.default_rng(seed)
    v = g.standard_normal(n)
    v /= np.linalg.norm(v)
    for p in (1.0, 1.5, 2.0):
        lhs = schatten_pow(np.linalg.svd(A - np.outer(A @ v, v), compute_uv=False), p)
        rhs = schatten_pow(np.linalg.svd(A, compute_uv=False), p) - np.linalg.norm(A @ v) ** p
        assert lhs >= rhs - 1e-9 * max(1, abs(rhs))


@pytest.mark.parametrize("seed", range(10))
def test_compression_route(seed):
    A = hard_instance(12, seed=seed).explicit()
    u = np.random.default_rng(seed).standard_normal(12)
    for p in (2.5, 3.0, 6.0):
        full, comp = block_compression(A, u, p)
        assert full <= comp + 1e-9 * max(1, comp)


@pytest.mark.parametrize("seed", range(10))
def test_sandwich(seed):
    A = hard_instance(12, seed=seed).explicit()
    v = np.random.default_rng(seed).standard_normal(12)
    v /= np.linalg.norm(v)
    assert np.linalg.norm(A, 2) >= np.linalg.norm(A @ v) - 1e-12
