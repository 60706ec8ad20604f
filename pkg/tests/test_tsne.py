import math

import numpy as np
import pytest

from sphere_sne.errors import DomainError
from sphere_sne.optimizer import kl_cost
from sphere_sne.simgen import SimSpec, generate_dataset
from sphere_sne.tsne import (
    TsneConfig,
    calibrate_sigmas,
    gaussian_conditionals,
    tsne_gradient,
    tsne_joint_p,
    tsne_joint_q,
    tsne_run,
)
from sphere_sne.affinity import check_affinity, row_perplexity


def naive_student_q(Y):
    n = len(Y)
    w = lambda a, b: 1.0 / (1.0 + float(np.sum((Y[a] - Y[b]) ** 2)))
    z = sum(w(m, k) for m in range(n) for k in range(n) if m != k)
    q = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                q[i, j] = w(i, j) / z
    return q


class TestJointP:
    def test_two_points(self):
        x = np.array([[0.0, 0.0], [3.0, 4.0]])
        np.testing.assert_array_equal(tsne_joint_p(x, 1.0, sigmas=[1.0, 2.0]), [[0, 0.5], [0.5, 0]])

    def test_equidistant_triple(self):
        x = np.eye(3)
        P = tsne_joint_p(x, 2.0)
        off = P[~np.eye(3, dtype=bool)]
        assert np.allclose(off, 1 / 6, rtol=0, atol=1e-15)

    def test_scalene_fixed_sigma(self):
        x = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]])
        s = np.array([0.8, 1.3, 2.0])
        d2 = np.array([[0, 1, 4], [1, 0, 5], [4, 5, 0]], dtype=float)
        c = np.zeros((3, 3))
        for i in range(3):
            others = [j for j in range(3) if j != i]
            e = {j: math.exp(-d2[i, j] / (2 * s[i] ** 2)) for j in others}
            for j in others:
                c[i, j] = e[j] / sum(e.values())
        expected = (c + c.T) / 6
        np.testing.assert_allclose(tsne_joint_p(x, 1.5, sigmas=s), expected, rtol=0, atol=1e-12)

    def test_contract(self):
        x = np.random.default_rng(0).standard_normal((40, 5))
        check_affinity(tsne_joint_p(x, 10.0))

    def test_calibration_hits_perplexity(self):
        x = np.random.default_rng(1).standard_normal((200, 50))
        calib = calibrate_sigmas(x, 40.0)
        assert np.all(np.abs(calib.achieved_perplexity - 40) / 40 < 1e-4)
        row = gaussian_conditionals(x, calib.sigmas)[7]
        assert row_perplexity(row) == pytest.approx(40.0, rel=1e-4)

    def test_needs_two_points(self):
        with pytest.raises(DomainError):
            tsne_joint_p(np.zeros((1, 3)), 2.0)


class TestJointQ:
    def test_identical_points_uniform(self):
        Q = tsne_joint_q(np.ones((5, 2)))
        off = Q[~np.eye(5, dtype=bool)]
        assert np.allclose(off, 1 / 20, rtol=0, atol=1e-15)

    def test_two_points(self):
        np.testing.assert_allclose(tsne_joint_q([[0.0, 0.0], [1.0, 1.0]]), [[0, 0.5], [0.5, 0]], atol=1e-15)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_naive_loop(self, seed):
        Y = np.random.default_rng(seed).standard_normal((4, 2))
        np.testing.assert_allclose(tsne_joint_q(Y), naive_student_q(Y), rtol=0, atol=1e-12)


class TestGradient:
    @pytest.mark.parametrize("seed", range(3))
    def test_matches_finite_differences(self, seed):
        rng = np.random.default_rng(seed)
        Y = rng.standard_normal((8, 2))
        P = tsne_joint_p(rng.standard_normal((8, 5)), 3.0)
        g = tsne_gradient(P, Y)
        h = 1e-5
        num = np.zeros_like(Y)
        for i in range(8):
            for j in range(2):
                up, dn = Y.copy(), Y.copy()
                up[i, j] += h
                dn[i, j] -= h
                num[i, j] = (kl_cost(P, tsne_joint_q(up)) - kl_cost(P, tsne_joint_q(dn))) / (2 * h)
        np.testing.assert_allclose(g, num, rtol=1e-5, atol=1e-9)

    def test_zero_at_fixed_point(self):
        Y = np.random.default_rng(2).standard_normal((6, 2))
        Q = tsne_joint_q(Y)
        np.testing.assert_allclose(tsne_gradient(Q, Y), 0.0, atol=1e-16)


@pytest.fixture(scope="module")
def blobs():
    return generate_dataset(SimSpec(d=10, k=3, n_total=90, gen_kappa=30.0, seed=2))


class TestRun:
    def test_reduces_kl(self, blobs):
        res = tsne_run(blobs, TsneConfig(perplexity=10, iterations=300))
        assert res.final_kl < res.initial_kl
        assert np.all(np.isfinite(res.loss_trace))
        assert res.Y.shape == (90, 2)
        assert not res.spherical

    def test_deterministic(self, blobs):
        cfg = TsneConfig(perplexity=10, iterations=60, seed=3)
        a, b = tsne_run(blobs, cfg), tsne_run(blobs, cfg)
        assert np.array_equal(a.Y, b.Y)
        assert np.array_equal(a.loss_trace, b.loss_trace)

    def test_init_scale(self, blobs):
        res = tsne_run(blobs, TsneConfig(perplexity=10, iterations=0))
        assert np.array_equal(res.Y, res.initial_Y)
        assert res.Y.std() == pytest.approx(1e-4, rel=0.2)

    def test_rejects_bad_config(self, blobs):
        with pytest.raises(DomainError):
            tsne_run(blobs, TsneConfig(iterations=-1))
