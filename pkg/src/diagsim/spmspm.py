"""Functional (timing-free) diagonal-space matrix multiplication.

The product of the diagonal at offset dA with the diagonal at offset dB
lands entirely on the output diagonal at offset dA + dB; the set of output
offsets is therefore contained in the Minkowski sum of the operand offset
sets.  Per (dA, dB) pair the element-wise product runs over the row range
where A, B and C positions are all in-bounds:

    A holds (r, r + dA), B holds (r + dA, r + dA + dB), C gets (r, r + dA + dB)

which pins r to [max(0, -dA, -(dA+dB)), N-1 - max(0, dA, dA+dB)].  This
module is the single source of index truth; the grid simulator must produce
the identical multiply set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diagmat import COMPLEX, DiagMatrix, Diagonal, diag_length, drop_zero_diagonals
from .errors import ShapeError


def minkowski(da: set[int] | list[int] | tuple[int, ...], db) -> tuple[int, ...]:
    """All pairwise offset sums, deduplicated and sorted."""
    return tuple(sorted({a + b for a in da for b in db}))


@dataclass(frozen=True)
class OverlapRange:
    """Inclusive row range [r_lo, r_hi] of valid products; empty when r_lo > r_hi."""

    r_lo: int
    r_hi: int

    def __len__(self) -> int:
        return max(0, self.r_hi - self.r_lo + 1)

    def __bool__(self) -> bool:
        return self.r_hi >= self.r_lo


def overlap_range(da: int, db: int, n: int) -> OverlapRange:
    """Row range over which diagonals at offsets da (in A) and db (in B) interact."""
    r_lo = max(0, -da, -(da + db))
    r_hi = n - 1 - max(0, da, da + db)
    return OverlapRange(r_lo, r_hi)


def multiply_count(offsets_a, offsets_b, n: int) -> int:
    """Scalar multiplies a full diagonal-space product performs."""
    return sum(len(overlap_range(da, db, n)) for da in offsets_a for db in offsets_b)


def pair_products(a: DiagMatrix, b: DiagMatrix):
    """Yield (da, db, rng, elementwise product over rng) for every contributing pair.

    Pairs are emitted in ascending da then ascending db, the fixed
    accumulation order that makes results bit-reproducible.
    """
    n = a.dim
    for diag_a in a.diagonals:
        da = diag_a.offset
        a0 = max(0, -da)
        for diag_b in b.diagonals:
            db = diag_b.offset
            rng = overlap_range(da, db, n)
            if not rng:
                continue
            b0 = max(0, -db)
            a_slice = diag_a.values[rng.r_lo - a0: rng.r_hi + 1 - a0]
            b_slice = diag_b.values[rng.r_lo + da - b0: rng.r_hi + 1 + da - b0]
            yield da, db, rng, a_slice * b_slice


def diag_matmul(a: DiagMatrix, b: DiagMatrix) -> DiagMatrix:
    """C = A @ B computed entirely in diagonal space.

    Output diagonals are allocated lazily at full natural length; head/tail
    zeros from partial overlaps stay stored.  Only diagonals that end up
    exactly zero everywhere are dropped.
    """
    if a.dim != b.dim:
        raise ShapeError(f"dim mismatch: {a.dim} vs {b.dim}")
    n = a.dim
    out: dict[int, np.ndarray] = {}
    for da, db, rng, prod in pair_products(a, b):
        dc = da + db
        vec = out.get(dc)
        if vec is None:
            vec = np.zeros(diag_length(n, dc), dtype=COMPLEX)
            out[dc] = vec
        c0 = max(0, -dc)
        vec[rng.r_lo - c0: rng.r_hi + 1 - c0] += prod
    result = DiagMatrix(n, tuple(Diagonal(d, out[d]) for d in sorted(out)))
    return drop_zero_diagonals(result, 0.0)


def dense_matmul_oracle(a, b) -> np.ndarray:
    """Textbook dense product in 64-bit complex; the verification oracle."""
    ga = np.asarray(a, dtype=COMPLEX)
    gb = np.asarray(b, dtype=COMPLEX)
    if ga.ndim != 2 or ga.shape[0] != ga.shape[1]:
        raise ShapeError(f"square input required, got {ga.shape}")
    if ga.shape != gb.shape:
        raise ShapeError(f"shape mismatch: {ga.shape} vs {gb.shape}")
    return ga @ gb
