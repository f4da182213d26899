import numpy as np
import pytest

from diagsim import DiagMatrix


def rand_matrix(rng, n, offsets=None, k=None, real=False):
    """Random diagonal matrix; offsets drawn without replacement if absent."""
    if offsets is None:
        k = k or int(rng.integers(1, min(2 * n - 1, 9) + 1))
        k = min(k, 2 * n - 1)
        offsets = sorted(rng.choice(np.arange(-(n - 1), n), size=k, replace=False).tolist())
    diags = {}
    for d in offsets:
        vec = rng.standard_normal(n - abs(d))
        if not real:
            vec = vec + 1j * rng.standard_normal(n - abs(d))
        diags[int(d)] = vec
    return DiagMatrix.from_diagonals(n, diags)


def rand_hermitian(rng, n, k=None):
    m = rand_matrix(rng, n, k=k)
    upper = {d.offset: d.values for d in m.diagonals if d.offset > 0}
    diags = {0: rng.standard_normal(n) + 0j}
    for d, vec in upper.items():
        diags[d] = vec
        diags[-d] = np.conj(vec)
    return DiagMatrix.from_diagonals(n, diags)


@pytest.fixture
def corner_matrix():
    """4x4 matrix with a full main diagonal and the two corner diagonals."""
    a, b, c, d, e, f = (1 + 0j, 2 + 0j, 3 + 0j, 4 + 0j, 5 + 0j, 6 + 0j)
    dense = np.zeros((4, 4), dtype=complex)
    dense[0, 0], dense[1, 1], dense[2, 2], dense[3, 3] = a, c, d, f
    dense[0, 3] = b
    dense[3, 0] = e
    return dense
