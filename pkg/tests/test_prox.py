import numpy as np
import pytest

from bgsplit import InputError, soft_threshold, svd, svt
from bgsplit.prox import spectral_rank, svt_with_spectrum


def svt_oracle(Q, eps):
    """Reference: dense SVD, threshold the spectrum, remultiply."""
    U, s, Vh = np.linalg.svd(Q, full_matrices=False)
    return U @ np.diag(np.maximum(s - eps, 0.0)) @ Vh


class TestSvd:
    def test_diagonal_spectrum(self):
        f = svd(np.diag([3.0, 0.5]))
        assert np.allclose(f.singular_values, [3.0, 0.5])

    def test_zero_matrix(self):
        f = svd(np.zeros((3, 2)))
        assert np.all(f.singular_values == 0.0)

    def test_reconstruction(self):
        rng = np.random.default_rng(10)
        Q = rng.standard_normal((8, 6))
        f = svd(Q)
        err = np.linalg.norm(Q - (f.U * f.singular_values) @ f.V.T) / np.linalg.norm(Q)
        assert err < 1e-10

    def test_orthonormal_factors(self):
        rng = np.random.default_rng(11)
        Q = rng.standard_normal((7, 4))
        f = svd(Q)
        assert np.allclose(f.U.T @ f.U, np.eye(4), atol=1e-12)
        assert np.allclose(f.V.T @ f.V, np.eye(4), atol=1e-12)

    def test_spectrum_nonincreasing(self):
        rng = np.random.default_rng(12)
        f = svd(rng.standard_normal((9, 5)))
        assert np.all(np.diff(f.singular_values) <= 0)

    def test_sign_convention(self):
        rng = np.random.default_rng(13)
        f = svd(rng.standard_normal((8, 5)))
        peaks = f.U[np.argmax(np.abs(f.U), axis=0), np.arange(5)]
        assert np.all(peaks >= 0)

    def test_deterministic(self):
        rng = np.random.default_rng(14)
        Q = rng.standard_normal((6, 4))
        a, b = svd(Q), svd(Q.copy())
        assert np.array_equal(a.U, b.U)
        assert np.array_equal(a.singular_values, b.singular_values)
        assert np.array_equal(a.V, b.V)

    def test_non_finite_rejected(self):
        with pytest.raises(InputError):
            svd(np.array([[1.0, np.inf], [0.0, 1.0]]))


class TestSoftThreshold:
    def test_scalar_cases(self):
        assert soft_threshold(np.array([[1.2]]), 0.5)[0, 0] == pytest.approx(0.7)
        assert soft_threshold(np.array([[-0.3]]), 0.5)[0, 0] == 0.0
        assert soft_threshold(np.array([[-1.2]]), 0.5)[0, 0] == pytest.approx(-0.7)

    def test_zero_eps_is_identity(self):
        rng = np.random.default_rng(20)
        Q = rng.standard_normal((5, 5))
        assert np.array_equal(soft_threshold(Q, 0.0), Q)

    def test_negative_eps_rejected(self):
        with pytest.raises(InputError):
            soft_threshold(np.zeros((2, 2)), -0.1)

    def test_grid_search_optimality(self):
        # prox of eps*|x| minimizes eps*|x| + 0.5*(x - q)^2
        rng = np.random.default_rng(21)
        for _ in range(20):
            q = float(rng.uniform(-3, 3))
            eps = float(rng.uniform(0, 2))
            grid = np.arange(q - 2 * eps - 1, q + 2 * eps + 1, 1e-4)
            objective = eps * np.abs(grid) + 0.5 * (grid - q) ** 2
            best = grid[np.argmin(objective)]
            closed = soft_threshold(np.array([[q]]), eps)[0, 0]
            assert abs(best - closed) < 1e-3

    def test_nonexpansive(self):
        rng = np.random.default_rng(22)
        for _ in range(20):
            a = rng.standard_normal((6, 4))
            b = rng.standard_normal((6, 4))
            eps = float(rng.uniform(0, 1.5))
            lhs = np.linalg.norm(soft_threshold(a, eps) - soft_threshold(b, eps))
            assert lhs <= np.linalg.norm(a - b) + 1e-12


class TestSvt:
    def test_diagonal_thresholded(self):
        out = svt(np.diag([3.0, 0.5]), 1.0)
        assert np.allclose(out, np.diag([2.0, 0.0]), atol=1e-12)

    def test_large_eps_annihilates(self):
        rng = np.random.default_rng(30)
        Q = rng.standard_normal((5, 4))
        eps = np.linalg.svd(Q, compute_uv=False)[0] + 0.1
        assert np.allclose(svt(Q, eps), 0.0, atol=1e-12)

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(31)
        Q = rng.standard_normal((6, 4))
        diff = svt(Q, 0.2) - svt_oracle(Q, 0.2)
        assert np.linalg.norm(diff) < 1e-10

    def test_spectrum_contract(self):
        rng = np.random.default_rng(32)
        for _ in range(10):
            Q = rng.standard_normal((8, 5))
            eps = float(rng.uniform(0.05, 1.0))
            got = np.linalg.svd(svt(Q, eps), compute_uv=False)
            want = np.maximum(np.linalg.svd(Q, compute_uv=False) - eps, 0.0)
            assert np.abs(got - want).max() < 1e-8

    def test_rank_counts_values_above_eps(self):
        rng = np.random.default_rng(33)
        for _ in range(10):
            Q = rng.standard_normal((7, 6))
            eps = float(rng.uniform(0.2, 2.0))
            out, shrunk = svt_with_spectrum(Q, eps)
            expected = int(np.sum(np.linalg.svd(Q, compute_uv=False) > eps))
            assert spectral_rank(shrunk) == expected
            assert np.linalg.matrix_rank(out, tol=1e-9) == expected

    def test_perturbation_optimality(self):
        # svt minimizes eps*||X||_* + 0.5*||X - Q||_F^2
        rng = np.random.default_rng(34)
        for _ in range(5):
            Q = rng.standard_normal((6, 5))
            eps = float(rng.uniform(0.1, 1.0))
            out = svt(Q, eps)

            def objective(M):
                return eps * np.linalg.svd(M, compute_uv=False).sum() \
                    + 0.5 * np.linalg.norm(M - Q) ** 2

            base = objective(out)
            for _ in range(50):
                bump = rng.standard_normal(Q.shape)
                bump *= 1e-2 / np.linalg.norm(bump)
                assert objective(out + bump) >= base - 1e-12

    def test_nonexpansive(self):
        rng = np.random.default_rng(35)
        for _ in range(10):
            a = rng.standard_normal((6, 4))
            b = rng.standard_normal((6, 4))
            eps = float(rng.uniform(0, 1.5))
            lhs = np.linalg.norm(svt(a, eps) - svt(b, eps))
            assert lhs <= np.linalg.norm(a - b) + 1e-12

    def test_negative_eps_rejected(self):
        with pytest.raises(InputError):
            svt(np.zeros((2, 2)), -1e-9)
