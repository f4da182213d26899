import numpy as np
import pytest

from diagsim import (DiagMatrix, dense_matmul_oracle, diag_matmul, from_dense,
                     identity, minkowski, multiply_count, overlap_range, to_dense)
from diagsim.errors import ShapeError
from diagsim.spmspm import pair_products

from conftest import rand_matrix


class TestMinkowski:
    def test_tridiagonal_pair(self):
        assert minkowski({-1, 0, 1}, {-1, 0, 1}) == (-2, -1, 0, 1, 2)

    def test_single_principal(self):
        assert minkowski({0}, {0}) == (0,)

    def test_sparse_corners(self):
        assert minkowski({-3, 0, 3}, {-3, 0, 3}) == (-6, -3, 0, 3, 6)


class TestOverlapRange:
    def test_corner_pair_single_product(self):
        rng = overlap_range(3, -3, 4)
        assert (rng.r_lo, rng.r_hi) == (0, 0)

    def test_main_diagonals_full_range(self):
        rng = overlap_range(0, 0, 16)
        assert (rng.r_lo, rng.r_hi) == (0, 15)
        assert len(rng) == 16

    def test_positive_offsets_clip_tail(self):
        rng = overlap_range(2, 3, 8)
        assert (rng.r_lo, rng.r_hi) == (0, 2)

    def test_empty_range(self):
        rng = overlap_range(7, 7, 8)
        assert not rng
        assert len(rng) == 0

    def test_matches_dense_support(self):
        # the range derivation is the index-truth gate: validate against a
        # dense product of single-diagonal matrices
        rng_gen = np.random.default_rng(41)
        for _ in range(200):
            n = int(rng_gen.integers(2, 24))
            da = int(rng_gen.integers(-(n - 1), n))
            db = int(rng_gen.integers(-(n - 1), n))
            a = rand_matrix(rng_gen, n, offsets=[da])
            b = rand_matrix(rng_gen, n, offsets=[db])
            dense = to_dense(a) @ to_dense(b)
            rows = np.nonzero(np.diagonal(dense, offset=da + db))[0]
            rng = overlap_range(da, db, n)
            if rows.size == 0:
                # dense support can only shrink via accidental zero values
                assert len(rng) >= 0
            else:
                lo = rows.min() + max(0, -(da + db))
                hi = rows.max() + max(0, -(da + db))
                assert rng.r_lo <= lo and hi <= rng.r_hi
                assert len(rng) == rows.size  # random values are never zero


class TestDiagMatmul:
    def test_identity_absorbs(self):
        rng = np.random.default_rng(43)
        x = rand_matrix(rng, 12)
        c = diag_matmul(identity(12), x)
        assert c.offsets == x.offsets
        for d in x.offsets:
            assert np.array_equal(c.diagonal(d).values, x.diagonal(d).values)

    def test_corner_matrix_squared(self, corner_matrix):
        m = from_dense(corner_matrix)
        c = diag_matmul(m, m)
        assert set(c.offsets) <= set(minkowski(m.offsets, m.offsets))
        # entry (0,0) picks up both the diagonal square and the corner loop
        assert c.get(0, 0) == corner_matrix[0, 0] ** 2 + corner_matrix[0, 3] * corner_matrix[3, 0]
        assert np.allclose(to_dense(c), corner_matrix @ corner_matrix)

    def test_matches_oracle_randomized(self):
        rng = np.random.default_rng(47)
        for _ in range(60):
            n = int(rng.integers(2, 65))
            a = rand_matrix(rng, n)
            b = rand_matrix(rng, n)
            got = to_dense(diag_matmul(a, b))
            want = dense_matmul_oracle(to_dense(a), to_dense(b))
            scale = max(np.linalg.norm(want), 1e-300)
            assert np.linalg.norm(got - want) / scale < 1e-12

    def test_offset_sum_rule(self):
        rng = np.random.default_rng(53)
        for _ in range(40):
            n = int(rng.integers(2, 40))
            a = rand_matrix(rng, n)
            b = rand_matrix(rng, n)
            c = diag_matmul(a, b)
            assert set(c.offsets) <= set(minkowski(a.offsets, b.offsets))

    def test_dim_mismatch(self):
        with pytest.raises(ShapeError):
            diag_matmul(identity(3), identity(4))

    def test_deterministic_accumulation(self):
        rng = np.random.default_rng(59)
        a = rand_matrix(rng, 32)
        b = rand_matrix(rng, 32)
        c1 = diag_matmul(a, b)
        c2 = diag_matmul(a, b)
        assert c1.offsets == c2.offsets
        for d in c1.offsets:
            assert np.array_equal(c1.diagonal(d).values, c2.diagonal(d).values)


class TestWorkCount:
    def test_equals_overlap_sum_and_bound(self):
        rng = np.random.default_rng(61)
        for _ in range(20):
            n = int(rng.integers(2, 48))
            a = rand_matrix(rng, n)
            b = rand_matrix(rng, n)
            padded = sum(len(rng_) for _, _, rng_, _ in _pairs(a, b))
            count = multiply_count(a.offsets, b.offsets, n)
            assert count == padded
            assert count <= n * a.nnzd * b.nnzd

    def test_empty_overlap_contributes_nothing(self):
        a = rand_matrix(np.random.default_rng(1), 4, offsets=[3])
        b = rand_matrix(np.random.default_rng(2), 4, offsets=[3])
        assert multiply_count(a.offsets, b.offsets, 4) == 0
        assert diag_matmul(a, b).nnzd == 0


def _pairs(a, b):
    return [(da, db, rng, prod) for da, db, rng, prod in pair_products(a, b)]


class TestDenseOracle:
    def test_identity_product(self):
        eye = np.eye(4, dtype=complex)
        assert np.array_equal(dense_matmul_oracle(eye, eye), eye)

    def test_nilpotent_pair(self):
        a = np.array([[0, 1], [0, 0]], dtype=complex)
        b = np.array([[0, 0], [1, 0]], dtype=complex)
        assert np.array_equal(dense_matmul_oracle(a, b), [[1, 0], [0, 0]])

    def test_shape_checks(self):
        with pytest.raises(ShapeError):
            dense_matmul_oracle(np.zeros((2, 3)), np.zeros((3, 2)))
        with pytest.raises(ShapeError):
            dense_matmul_oracle(np.zeros((2, 2)), np.zeros((3, 3)))
