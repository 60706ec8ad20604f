import math

import numpy as np
import pytest

from sphere_sne.affinity import joint_q, vmf_joint_p
from sphere_sne.errors import DomainError
from sphere_sne.optimizer import (
    VmfSneConfig,
    auto_learning_rate,
    gradient,
    kl_cost,
    objective,
    run,
    step,
)
from sphere_sne.simgen import SimSpec, generate_dataset
from sphere_sne.vmf import sample_uniform_sphere


def random_p(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.random((n, n))
    a = a + a.T
    np.fill_diagonal(a, 0.0)
    return a / a.sum()


def fd_gradient(P, Y, kappa, h=1e-5):
    g = np.zeros_like(Y)
    for i in range(Y.shape[0]):
        for j in range(Y.shape[1]):
            up, dn = Y.copy(), Y.copy()
            up[i, j] += h
            dn[i, j] -= h
            g[i, j] = (objective(P, up, kappa) - objective(P, dn, kappa)) / (2 * h)
    return g


class TestKlCost:
    def test_zero_for_identical(self):
        P = random_p(6, 0)
        assert kl_cost(P, P) == 0.0

    def test_hand_instance(self):
        P = np.array([[0, 0.25, 0.25], [0.25, 0, 0], [0.25, 0, 0]])
        Q = np.full((3, 3), 1 / 6)
        np.fill_diagonal(Q, 0)
        assert kl_cost(P, Q) == pytest.approx(math.log(1.5), rel=1e-14)

    def test_nonnegative(self):
        for seed in range(10):
            assert kl_cost(random_p(7, seed), random_p(7, seed + 100)) >= 0.0

    def test_infinite_when_q_vanishes(self):
        P = random_p(3, 1)
        Q = P.copy()
        Q[0, 1] = Q[1, 0] = 0.0
        assert kl_cost(P, Q) == math.inf

    def test_shape_mismatch(self):
        with pytest.raises(DomainError):
            kl_cost(np.zeros((3, 3)), np.zeros((4, 4)))


class TestGradient:
    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("kappa", [2.0, 4.0])
    def test_matches_finite_differences(self, seed, kappa):
        Y = sample_uniform_sphere(3, 10, seed)
        P = random_p(10, seed)
        analytic = gradient(P, joint_q(Y, kappa), Y, kappa)
        numeric = fd_gradient(P, Y, kappa)
        rel = np.abs(analytic - numeric) / np.abs(numeric)
        assert rel.max() < 1e-5

    def test_two_points_is_zero(self):
        Y = sample_uniform_sphere(3, 2, 0)
        P = np.array([[0, 0.5], [0.5, 0]])
        g = gradient(P, joint_q(Y, 2.0), Y, 2.0)
        assert np.array_equal(g, np.zeros_like(Y))

    def test_zero_when_p_equals_q(self):
        Y = sample_uniform_sphere(3, 6, 2)
        Q = joint_q(Y, 2.0)
        np.testing.assert_allclose(gradient(Q, Q, Y, 2.0), 0.0, atol=1e-16)

    def test_shape_checks(self):
        with pytest.raises(DomainError):
            gradient(np.zeros((3, 3)), np.zeros((3, 3)), np.zeros((4, 3)), 1.0)


class TestStep:
    def test_zero_gradient_is_identity(self):
        Y = sample_uniform_sphere(3, 8, 0)
        np.testing.assert_allclose(step(Y, np.zeros_like(Y), 5.0), Y, rtol=0, atol=1e-15)

    def test_zero_eta_is_identity(self):
        Y = sample_uniform_sphere(3, 8, 0)
        np.testing.assert_allclose(step(Y, np.ones_like(Y), 0.0), Y, rtol=0, atol=1e-15)

    def test_rows_unit_norm(self):
        Y = sample_uniform_sphere(5, 30, 1)
        g = np.random.default_rng(0).standard_normal(Y.shape) * 50
        out = step(Y, g, 1.0)
        assert np.max(np.abs(np.linalg.norm(out, axis=1) - 1)) < 1e-12

    def test_zero_vector_gets_nudged(self):
        Y = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        g = np.array([[-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        out = step(Y, g, 1.0, np.random.default_rng(3))
        assert np.all(np.isfinite(out))
        assert np.linalg.norm(out, axis=1) == pytest.approx([1.0, 1.0])
        again = step(Y, g, 1.0, np.random.default_rng(3))
        assert np.array_equal(out, again)


@pytest.fixture(scope="module")
def small_data():
    return generate_dataset(SimSpec(d=10, k=3, n_total=60, gen_kappa=20.0, seed=4))


class TestRun:
    def test_zero_iterations_returns_start(self, small_data):
        res = run(small_data, VmfSneConfig(iterations=0, perplexity=10))
        assert np.array_equal(res.Y, res.initial_Y)
        assert res.final_kl == res.initial_kl
        assert res.loss_trace.size == 0

    def test_deterministic(self, small_data):
        cfg = VmfSneConfig(iterations=30, perplexity=10, seed=9)
        a, b = run(small_data, cfg), run(small_data, cfg)
        assert np.array_equal(a.Y, b.Y)
        assert np.array_equal(a.loss_trace, b.loss_trace)

    def test_seed_changes_start(self, small_data):
        a = run(small_data, VmfSneConfig(iterations=0, perplexity=10, seed=1))
        b = run(small_data, VmfSneConfig(iterations=0, perplexity=10, seed=2))
        assert not np.array_equal(a.Y, b.Y)

    def test_small_steps_decrease_kl(self):
        x = sample_uniform_sphere(8, 50, 5)
        P, _ = vmf_joint_p(x, 10.0)
        res = run(x, VmfSneConfig(iterations=100, learning_rate=1e-3), P=P)
        kl = np.append(res.loss_trace, res.final_kl)
        assert np.all(np.diff(kl) <= 1e-12)
        assert res.final_kl < res.initial_kl

    def test_default_rate_reduces_kl_and_stays_on_sphere(self, small_data):
        res = run(small_data, VmfSneConfig(iterations=200, perplexity=10))
        assert np.all(np.isfinite(res.loss_trace))
        assert res.final_kl < res.initial_kl
        assert res.max_norm_error < 1e-9
        assert res.Y.shape == (60, 3)

    def test_auto_rate_matches_bench_setting(self):
        assert auto_learning_rate(800) == 100.0

    def test_default_rate_is_monotone_on_small_input(self, small_data):
        res = run(small_data, VmfSneConfig(iterations=200, perplexity=10))
        kl = np.append(res.loss_trace, res.final_kl)
        assert np.all(np.diff(kl) <= 1e-12)

    def test_callback_sees_every_iteration(self, small_data):
        seen = []
        run(small_data, VmfSneConfig(iterations=7, perplexity=10),
            callback=lambda t, Y, kl: seen.append((t, kl)))
        assert [t for t, _ in seen] == list(range(7))

    def test_early_stop(self):
        x = sample_uniform_sphere(4, 12, 0)
        res = run(x, VmfSneConfig(iterations=5000, perplexity=3, early_stop=True))
        assert res.iterations_run < 5000

    def test_rejects_non_unit_data(self):
        with pytest.raises(DomainError):
            run(np.ones((5, 3)), VmfSneConfig(iterations=1, perplexity=2))

    @pytest.mark.parametrize("field,value", [("target_dim", 1), ("embed_kappa", 0.0),
                                             ("iterations", -1), ("learning_rate", -1.0)])
    def test_config_validation(self, field, value):
        cfg = VmfSneConfig(**{field: value})
        with pytest.raises(DomainError):
            cfg.validate()
