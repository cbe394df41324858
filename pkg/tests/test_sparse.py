import numpy as np
import pytest

from oddlink.errors import ConvergenceError
from oddlink.sparse import SparseMatrix, SvdModel, extremal_eigs, spmv, truncated_svd

from oracles import dense_block


def sparse_random(rng, rows, cols, density=0.2):
    D = np.where(rng.random((rows, cols)) < density, rng.standard_normal((rows, cols)), 0.0)
    return D, SparseMatrix.from_dense(D)


class TestSparseMatrix:
    def test_from_coo_sums_duplicates(self):
        m = SparseMatrix.from_coo((2, 2), [0, 0, 1], [1, 1, 0], [1.0, 2.0, 5.0])
        assert m.toarray().tolist() == [[0, 3], [5, 0]]
        assert m.nnz == 2

    def test_spmv_matches_dense(self, rng):
        D, m = sparse_random(rng, 20, 15)
        for _ in range(5):
            x = rng.standard_normal(15)
            np.testing.assert_allclose(spmv(m, x), D @ x, rtol=1e-12, atol=1e-12)
            y = rng.standard_normal(20)
            np.testing.assert_allclose(m.rmatvec(y), D.T @ y, rtol=1e-12, atol=1e-12)

    def test_matmat_and_transpose(self, rng):
        D, m = sparse_random(rng, 12, 9)
        X = rng.standard_normal((9, 4))
        np.testing.assert_allclose(m.matmat(X), D @ X, atol=1e-12)
        np.testing.assert_array_equal(m.T.toarray(), D.T)

    def test_symmetry_check(self):
        assert SparseMatrix.from_dense(np.array([[0, 1], [1, 0]])).is_symmetric()
        assert not SparseMatrix.from_dense(np.array([[0, 1], [0, 0]])).is_symmetric()


class TestTruncatedSvd:
    def test_diagonal(self):
        model = truncated_svd(SparseMatrix.from_dense(np.diag([3.0, 2.0])), 2)
        np.testing.assert_allclose(model.singular_values, [3, 2], atol=1e-12)

    def test_all_ones(self):
        model = truncated_svd(SparseMatrix.from_dense(np.ones((2, 2))), 1)
        np.testing.assert_allclose(model.singular_values, [2.0], atol=1e-12)
        np.testing.assert_allclose(np.abs(model.left_vectors[:, 0]), [2 ** -0.5] * 2, atol=1e-12)

    @pytest.mark.parametrize("shape", [(50, 40), (40, 50), (30, 30)])
    def test_against_dense(self, rng, shape):
        for _ in range(5):
            D, m = sparse_random(rng, *shape)
            model = truncated_svd(m, 10, seed=3)
            ref = np.linalg.svd(D, compute_uv=False)[:10]
            np.testing.assert_allclose(model.singular_values, ref, rtol=1e-6)
            k = model.rank
            np.testing.assert_allclose(model.left_vectors.T @ model.left_vectors, np.eye(k), atol=1e-10)
            np.testing.assert_allclose(model.right_vectors.T @ model.right_vectors, np.eye(k), atol=1e-10)
            assert np.all(np.diff(model.singular_values) <= 0)
            assert np.all(model.singular_values >= 0)

    def test_full_rank_reconstruction(self, rng):
        D, m = sparse_random(rng, 25, 18, density=0.4)
        model = truncated_svd(m, 18)
        recon = (model.left_vectors * model.singular_values) @ model.right_vectors.T
        np.testing.assert_allclose(recon, D, atol=1e-8)

    def test_residuals_small(self, rng):
        D, m = sparse_random(rng, 40, 30)
        model = truncated_svd(m, 6)
        for i in range(6):
            u, s, v = model.left_vectors[:, i], model.singular_values[i], model.right_vectors[:, i]
            assert np.linalg.norm(D @ v - s * u) <= 1e-7 * model.singular_values[0]
            assert np.linalg.norm(D.T @ u - s * v) <= 1e-7 * model.singular_values[0]

    def test_seed_determinism(self, rng):
        _, m = sparse_random(rng, 30, 20)
        a, b = truncated_svd(m, 4, seed=5), truncated_svd(m, 4, seed=5)
        np.testing.assert_array_equal(a.left_vectors, b.left_vectors)

    def test_rank_deficient_pads_zeros(self):
        D = np.zeros((6, 5))
        D[0, 0] = 2.0
        D[1, 1] = 1.0
        model = truncated_svd(SparseMatrix.from_dense(D), 4)
        np.testing.assert_allclose(model.singular_values, [2, 1, 0, 0], atol=1e-12)

    def test_convergence_error(self, rng):
        _, m = sparse_random(rng, 200, 200, density=0.3)
        with pytest.raises(ConvergenceError):
            truncated_svd(m, 5, tol=1e-15, max_iter=10)

    def test_bad_k(self):
        with pytest.raises(ValueError):
            truncated_svd(SparseMatrix.from_dense(np.eye(3)), 4)


class TestExtremalEigs:
    def test_two_cycle(self):
        model = extremal_eigs(SparseMatrix.from_dense(np.array([[0.0, 1], [1, 0]])), 1, 1)
        np.testing.assert_allclose(model.eigenvalues, [1, -1], atol=1e-12)

    def test_triangle(self):
        K3 = np.ones((3, 3)) - np.eye(3)
        model = extremal_eigs(SparseMatrix.from_dense(K3), 1, 2)
        np.testing.assert_allclose(model.eigenvalues, [2, -1, -1], atol=1e-10)

    def test_block_spectrum_is_plus_minus_sigma(self, rng):
        for _ in range(5):
            B = (rng.random((9, 7)) < 0.4).astype(float)
            if not B.any():
                continue
            sigma = np.linalg.svd(B, compute_uv=False)
            model = extremal_eigs(SparseMatrix.from_dense(dense_block(B)), 3, 3)
            lam = model.eigenvalues
            np.testing.assert_allclose(np.sort(lam[lam > 0])[::-1], sigma[:3], atol=1e-8)
            np.testing.assert_allclose(np.sort(-lam[lam < 0])[::-1], sigma[:3], atol=1e-8)

    def test_against_eigh(self, rng):
        for _ in range(5):
            X = rng.standard_normal((30, 30))
            S = X + X.T
            model = extremal_eigs(SparseMatrix.from_dense(S), 4, 4)
            ref = np.linalg.eigvalsh(S)
            np.testing.assert_allclose(np.sort(model.eigenvalues), np.concatenate([ref[:4], ref[-4:]]),
                                       rtol=1e-8, atol=1e-8)
            Q = model.vectors
            np.testing.assert_allclose(Q.T @ Q, np.eye(8), atol=1e-10)
            np.testing.assert_allclose(S @ Q, Q * model.eigenvalues, atol=1e-7)

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            extremal_eigs(SparseMatrix.from_dense(np.array([[0.0, 1], [0, 0]])), 1, 0)


def test_model_roundtrip(tmp_path, rng):
    _, m = sparse_random(rng, 8, 6, density=0.5)
    model = truncated_svd(m, 3, seed=9)
    path = tmp_path / "model.tsv"
    model.save(path, [f"l{i}" for i in range(8)], [f"r{i}" for i in range(6)])
    loaded, left, right = SvdModel.load(path)
    np.testing.assert_array_equal(loaded.singular_values, model.singular_values)
    np.testing.assert_array_equal(loaded.left_vectors, model.left_vectors)
    np.testing.assert_array_equal(loaded.right_vectors, model.right_vectors)
    assert loaded.seed == 9
    assert left[0] == "l0" and right[-1] == "r5"
