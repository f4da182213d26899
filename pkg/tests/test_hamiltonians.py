import numpy as np
import pytest

from diagsim import PauliTerm, gen_benchmark, pauli_to_diagmatrix, to_dense
from diagsim.errors import DomainError
from diagsim.hamiltonians import heisenberg_chain, maxcut_ising, term, tfim_chain

I2 = np.eye(2, dtype=complex)
PAULI = {
    "I": I2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_oracle(terms, n):
    """Dense Kronecker-product reference, qubit 0 least significant."""
    acc = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for t in terms:
        mat = np.array([[1]], dtype=complex)
        for q in reversed(range(n)):
            mat = np.kron(mat, PAULI[t.axes[q]])
        acc += t.coefficient * mat
    return acc


class TestPauliToDiagMatrix:
    def test_single_z(self):
        m = pauli_to_diagmatrix([PauliTerm(1.0, ("Z",))], 1)
        assert m.offsets == (0,)
        assert np.array_equal(m.diagonal(0).values, [1, -1])

    def test_single_x(self):
        m = pauli_to_diagmatrix([PauliTerm(1.0, ("X",))], 1)
        assert m.offsets == (-1, 1)
        assert np.array_equal(m.diagonal(-1).values, [1])
        assert np.array_equal(m.diagonal(1).values, [1])

    def test_x_on_qubit_k_offsets(self):
        for n in range(1, 7):
            for k in range(n):
                t = term(1.0, n, **{f"q{k}": "X"})
                m = pauli_to_diagmatrix([t], n)
                assert m.offsets == (-(2 ** k), 2 ** k)
                assert np.array_equal(to_dense(m), kron_oracle([t], n))

    def test_random_terms_match_kron_oracle(self):
        rng = np.random.default_rng(67)
        axes = np.array(list("IXYZ"))
        for _ in range(30):
            n = int(rng.integers(1, 6))
            terms = [
                PauliTerm(complex(rng.standard_normal(), rng.standard_normal()),
                          tuple(rng.choice(axes, size=n)))
                for _ in range(int(rng.integers(1, 5)))
            ]
            m = pauli_to_diagmatrix(terms, n)
            assert np.allclose(to_dense(m), kron_oracle(terms, n), atol=1e-12)

    def test_hermitian_for_real_coefficients(self):
        rng = np.random.default_rng(71)
        axes = np.array(list("IXYZ"))
        for _ in range(20):
            n = int(rng.integers(1, 6))
            terms = []
            for _ in range(int(rng.integers(1, 5))):
                ax = tuple(rng.choice(axes, size=n))
                terms.append(PauliTerm(float(rng.standard_normal()), ax))
            m = pauli_to_diagmatrix(terms, n)
            mh = m.conj_transpose()
            assert m.offsets == mh.offsets
            for d in m.offsets:
                assert np.allclose(m.diagonal(d).values, mh.diagonal(d).values)

    def test_qubit_cap(self):
        with pytest.raises(DomainError):
            pauli_to_diagmatrix([PauliTerm(1.0, tuple("I" * 17))], 17)

    def test_axis_count_mismatch(self):
        with pytest.raises(DomainError):
            pauli_to_diagmatrix([PauliTerm(1.0, ("Z",))], 2)


class TestChainModels:
    def test_heisenberg_reference_counts(self):
        m = gen_benchmark("heisenberg", 10)
        assert m.dim == 1024
        assert m.nnzd == 19
        assert m.nnze == 5632

    def test_heisenberg_small_vs_oracle(self):
        for n in (2, 3, 4):
            m = gen_benchmark("heisenberg", n)
            assert np.allclose(to_dense(m), kron_oracle(heisenberg_chain(n), n))

    def test_crossed_xx_yy_diagonals_cancel(self):
        # XX and YY on one bond cancel on the distant pair of diagonals,
        # leaving only the nearest-neighbor hop offsets
        m = pauli_to_diagmatrix(heisenberg_chain(2, jz=0.0), 2)
        assert m.offsets == (-1, 1)

    def test_tfim_reference_counts(self):
        m = gen_benchmark("tfim", 8)
        assert m.dim == 256
        assert m.nnzd == 17
        m10 = gen_benchmark("tfim", 10)
        assert m10.nnzd == 21

    def test_tfim_small_vs_oracle(self):
        m = gen_benchmark("tfim", 3, g=0.7)
        assert np.allclose(to_dense(m), kron_oracle(tfim_chain(3, g=0.7), 3))

    def test_maxcut_is_single_diagonal(self):
        m = gen_benchmark("maxcut-ising", 10)
        assert m.dim == 1024
        assert m.offsets == (0,)
        assert m.storage_scalars == 1024

    def test_maxcut_counts_cut_edges(self):
        m = gen_benchmark("maxcut", 3)
        vals = m.diagonal(0).values
        # ring of 3: any non-uniform assignment cuts exactly 2 edges
        assert vals[0] == 0 and vals[7] == 0
        assert all(v == 2 for v in vals[1:7])

    def test_maxcut_random_graph_seeded(self):
        m1 = gen_benchmark("maxcut", 6, seed=5)
        m2 = gen_benchmark("maxcut", 6, seed=5)
        assert m1.offsets == m2.offsets == (0,)
        assert np.array_equal(m1.diagonal(0).values, m2.diagonal(0).values)

    def test_unknown_model(self):
        with pytest.raises(DomainError):
            gen_benchmark("ising-3d", 4)

    def test_maxcut_weighted_edges(self):
        m = maxcut_ising(2, edges=[(0, 1)], weights=[2.5])
        dm = pauli_to_diagmatrix(m, 2)
        assert np.allclose(dm.diagonal(0).values, [0, 2.5, 2.5, 0])
