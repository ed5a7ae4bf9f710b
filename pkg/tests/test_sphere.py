"""Sphere sampling and centered-projection geometry."""

import numpy as np
import pytest

from martproj import (
    DegenerateDirectionError,
    DimensionError,
    SphereVector,
    centered_weights,
    centered_weights_batch,
    helmert_basis,
    project,
    project_centered,
    sample_uniform_sphere,
    x_star,
)
from martproj.rng import derive_rng


class TestSampling:
    def test_rejects_dimension_zero(self):
        with pytest.raises(DimensionError):
            sample_uniform_sphere(0, derive_rng(0))

    def test_n1_two_point_symmetric(self):
        rng = derive_rng(11, "sphere-n1")
        draws = np.array([sample_uniform_sphere(1, rng).coords[0] for _ in range(10_000)])
        assert set(np.unique(draws)) == {-1.0, 1.0}
        assert abs(np.mean(draws == 1.0) - 0.5) < 0.02

    def test_second_moment_is_one_over_n(self):
        rng = derive_rng(12, "sphere-m2")
        g = rng.standard_normal((100_000, 4))
        theta1 = g[:, 0] / np.linalg.norm(g, axis=1)
        assert abs(np.mean(theta1**2) - 0.25) < 0.01

    def test_fourth_moment_matches_mc_oracle(self):
        # brute-force oracle: normalized Gaussian 4-vectors give 3/(n(n+2)) = 0.125
        rng = derive_rng(13, "sphere-m4")
        g = rng.standard_normal((100_000, 4))
        theta1 = g[:, 0] / np.linalg.norm(g, axis=1)
        assert abs(np.mean(theta1**4) - 0.125) < 0.01

    def test_unit_norm(self):
        rng = derive_rng(14, "sphere-norm")
        for n in (1, 2, 7, 300):
            theta = sample_uniform_sphere(n, rng)
            assert abs(np.linalg.norm(theta.coords) - 1.0) < 1e-12

    def test_rotation_invariance_two_sample_ks(self):
        rng = derive_rng(15, "sphere-rot")
        n, m = 6, 10_000
        q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        a = np.empty(m)
        b = np.empty(m)
        for i in range(m):
            a[i] = sample_uniform_sphere(n, rng).coords[0]
            b[i] = (q @ sample_uniform_sphere(n, rng).coords)[0]
        stat = _two_sample_ks(a, b)
        assert stat < 1.628 * np.sqrt(2.0 / m)  # 1% threshold


def _two_sample_ks(a, b):
    both = np.sort(np.concatenate([a, b]))
    fa = np.searchsorted(np.sort(a), both, side="right") / a.size
    fb = np.searchsorted(np.sort(b), both, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


class TestHelmertBasis:
    def test_rejects_n1(self):
        with pytest.raises(DimensionError):
            helmert_basis(1)

    def test_n2_rows(self):
        rows = helmert_basis(2).rows
        s = 1.0 / np.sqrt(2.0)
        assert np.allclose(rows, [[s, -s], [s, s]], atol=1e-15)

    def test_n3_row2(self):
        rows = helmert_basis(3).rows
        s = 1.0 / np.sqrt(6.0)
        assert np.allclose(rows[1], [s, s, -2.0 * s], atol=1e-15)

    def test_constant_vector_image(self):
        for n in (2, 5, 33):
            rows = helmert_basis(n).rows
            image = rows @ np.ones(n)
            expect = np.zeros(n)
            expect[-1] = np.sqrt(n)
            assert np.max(np.abs(image - expect)) < 1e-12

    @pytest.mark.parametrize("n", [2, 16, 128, 1024])
    def test_orthonormality(self, n):
        rows = helmert_basis(n).rows
        assert np.max(np.abs(rows @ rows.T - np.eye(n))) <= 1e-12


class TestCenteredWeights:
    def test_n2_hand_value(self):
        # A = I - J/2 maps (a, b) to ((a-b)/2, (b-a)/2); normalized for a > b
        # this is (1/sqrt2, -1/sqrt2)
        theta = SphereVector(np.array([0.8, -0.6]))
        w = centered_weights(theta)
        s = 1.0 / np.sqrt(2.0)
        assert np.allclose(w.theta_star, [s, -s], atol=1e-12)

    def test_degenerate_direction_rejected(self):
        theta = SphereVector(np.ones(4) / 2.0)
        with pytest.raises(DegenerateDirectionError):
            centered_weights(theta)

    def test_hat_is_unit_norm(self):
        rng = derive_rng(21, "cw-unit")
        for n in (2, 3, 17, 301):
            w = centered_weights(sample_uniform_sphere(n, rng))
            assert abs(np.sum(w.theta_hat**2) - 1.0) < 1e-10

    def test_star_reproduces_centered_projection(self):
        rng = derive_rng(22, "cw-star")
        for _ in range(100):
            n = int(rng.integers(2, 80))
            theta = sample_uniform_sphere(n, rng)
            X = rng.standard_normal(n)
            w = centered_weights(theta)
            centered = theta.coords - theta.coords.mean()
            direct = X @ centered / np.linalg.norm(centered)
            assert abs(w.theta_star @ X - direct) <= 1e-10

    def test_batch_matches_single(self):
        rng = derive_rng(23, "cw-batch")
        thetas = np.stack([sample_uniform_sphere(24, rng).coords for _ in range(32)])
        batch = centered_weights_batch(thetas)
        single = np.stack([centered_weights(SphereVector(t)).theta_star for t in thetas])
        assert np.max(np.abs(batch - single)) < 1e-14


class TestProjections:
    def test_project_examples(self):
        rng = derive_rng(31, "proj")
        theta = sample_uniform_sphere(9, rng)
        assert project(theta.coords, theta) == pytest.approx(1.0, abs=1e-12)
        assert project(np.zeros(9), theta) == 0.0
        s = 1.0 / np.sqrt(2.0)
        assert project(np.array([1.0, -1.0]), SphereVector(np.array([s, s]))) == pytest.approx(0.0, abs=1e-15)

    def test_project_length_mismatch(self):
        theta = SphereVector(np.array([1.0]))
        with pytest.raises(DimensionError):
            project(np.ones(2), theta)

    def test_centered_annihilates_constants(self):
        rng = derive_rng(32, "proj-c")
        theta = sample_uniform_sphere(12, rng)
        assert project_centered(np.full(12, 3.7), theta) == pytest.approx(0.0, abs=1e-12)

    def test_centered_n2_hand_value(self):
        theta = SphereVector(np.array([0.8, -0.6]))
        X = np.array([2.0, -1.0])
        assert project_centered(X, theta) == pytest.approx((2.0 + 1.0) / np.sqrt(2.0), abs=1e-12)

    def test_centered_equals_star_weights(self):
        rng = derive_rng(33, "proj-eq")
        for _ in range(20):
            n = int(rng.integers(2, 60))
            theta = sample_uniform_sphere(n, rng)
            X = rng.standard_normal(n)
            w = centered_weights(theta)
            assert abs(project_centered(X, theta) - w.theta_star @ X) <= 1e-10


class TestXStar:
    def test_constant_start(self):
        assert x_star(np.array([1.0, 1.0]))[0] == pytest.approx(0.0, abs=1e-15)

    def test_direct_formula(self):
        assert x_star(np.array([1.0, 0.0]))[0] == pytest.approx(1.0 / np.sqrt(2.0), abs=1e-15)

    def test_duality_identity(self):
        rng = derive_rng(41, "xstar")
        for _ in range(100):
            n = int(rng.integers(2, 64))
            theta = sample_uniform_sphere(n, rng)
            X = rng.standard_normal(n)
            w = centered_weights(theta)
            assert abs(w.theta_hat @ x_star(X) - w.theta_star @ X) <= 1e-10


class TestStructuralIdentities:
    def test_projection_identity_with_materialized_basis(self):
        # <theta - mean, X - mean> equals the sum of the first n-1 Helmert
        # coordinate products
        rng = derive_rng(51, "struct")
        for n in (2, 9, 150, 1024):
            B = helmert_basis(n).rows
            theta = sample_uniform_sphere(n, rng).coords
            X = rng.standard_normal(n)
            lhs = (theta - theta.mean()) @ (X - X.mean())
            rhs = (B @ theta)[: n - 1] @ (B @ X)[: n - 1]
            assert abs(lhs - rhs) <= 1e-10

    def test_star_norm_concentration_is_exact(self):
        # theta_star is the normalized centered direction itself, so
        # sum(theta_star^2) - 1 vanishes identically (verified symbolically
        # for small n); the Monte Carlo mean of |sum - 1| must sit at
        # machine zero for every n, the strongest form of the concentration
        # statement
        rng = derive_rng(52, "struct-conc")
        means = []
        for n in (64, 256, 1024):
            dev = 0.0
            draws = 10_000
            chunk = 2000
            done = 0
            while done < draws:
                r = min(chunk, draws - done)
                g = rng.standard_normal((r, n))
                thetas = g / np.linalg.norm(g, axis=1, keepdims=True)
                star = centered_weights_batch(thetas)
                dev += float(np.sum(np.abs(np.sum(star**2, axis=1) - 1.0)))
                done += r
            means.append(dev / draws)
        assert all(m <= 1e-13 for m in means)
