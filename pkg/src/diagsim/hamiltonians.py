"""Benchmark Hamiltonian generators built from Pauli strings.

Each Pauli string has exactly one nonzero per matrix row (row i pairs with
column i XOR xmask, where xmask collects the X/Y qubits), so a term scatters
into at most 2^|xmask| diagonals.  Summing terms and dropping exact-zero
diagonals yields the compact diagonal form directly, without densifying.

Generators default to open-boundary 1D chains; coupling constants and field
strengths are exposed as parameters rather than hard-coded to any published
instance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diagmat import COMPLEX, DiagMatrix, diag_length, drop_zero_diagonals
from .errors import DomainError

MAX_QUBITS = 16

_AXES = ("I", "X", "Y", "Z")


@dataclass(frozen=True)
class PauliTerm:
    """coefficient * sigma_{n-1} x ... x sigma_0, axes indexed by qubit."""

    coefficient: complex
    axes: tuple[str, ...]

    def __post_init__(self):
        for ax in self.axes:
            if ax not in _AXES:
                raise DomainError(f"unknown Pauli axis {ax!r}")


def term(coefficient: complex, n: int, **site_axes: ...) -> PauliTerm:
    """Convenience builder: term(1.0, 4, q0='X', q1='X')."""
    axes = ["I"] * n
    for key, ax in site_axes.items():
        axes[int(key[1:])] = ax
    return PauliTerm(coefficient, tuple(axes))


def pauli_to_diagmatrix(terms: list[PauliTerm], n: int, max_qubits: int = MAX_QUBITS) -> DiagMatrix:
    """Sum of weighted Pauli strings as a DiagMatrix of dim 2^n."""
    if n < 1:
        raise DomainError("qubit count must be positive")
    if n > max_qubits:
        raise DomainError(f"{n} qubits exceeds the desk-scale cap of {max_qubits}")
    dim = 1 << n
    cols = np.arange(dim, dtype=np.int64)
    acc: dict[int, np.ndarray] = {}
    for t in terms:
        if len(t.axes) != n:
            raise DomainError(f"term has {len(t.axes)} axes, expected {n}")
        xmask = 0
        phase_mask = 0  # qubits contributing (-1)^bit: Y and Z
        n_y = 0
        for q, ax in enumerate(t.axes):
            if ax in ("X", "Y"):
                xmask |= 1 << q
            if ax in ("Y", "Z"):
                phase_mask |= 1 << q
            if ax == "Y":
                n_y += 1
        rows = cols ^ xmask
        # entry (row=j^xmask, col=j) = coeff * i^{#Y} * (-1)^{popcount(j & phase_mask)}
        signs = 1 - 2 * (_popcount(cols & phase_mask) & 1)
        vals = t.coefficient * (1j ** n_y) * signs.astype(COMPLEX)
        # group rows by x-pattern: each pattern of col bits inside xmask is one offset
        if xmask == 0:
            _scatter(acc, 0, rows, vals, dim)
        else:
            pattern = cols & xmask
            for pat in np.unique(pattern):
                sel = pattern == pat
                d = int(pat - (pat ^ xmask))  # col - row is constant per pattern
                _scatter(acc, d, rows[sel], vals[sel], dim)
    m = DiagMatrix.from_diagonals(dim, acc) if acc else DiagMatrix(dim, ())
    return drop_zero_diagonals(m, 0.0)


def _scatter(acc: dict[int, np.ndarray], d: int, rows: np.ndarray, vals: np.ndarray, dim: int):
    vec = acc.get(d)
    if vec is None:
        vec = np.zeros(diag_length(dim, d), dtype=COMPLEX)
        acc[d] = vec
    np.add.at(vec, rows - max(0, -d), vals)


def _popcount(arr: np.ndarray) -> np.ndarray:
    out = np.zeros_like(arr)
    work = arr.copy()
    while np.any(work):
        out += work & 1
        work >>= 1
    return out


# -- chain models --------------------------------------------------------------


def heisenberg_chain(n: int, jx: float = 1.0, jy: float = 1.0, jz: float = 1.0,
                     periodic: bool = False) -> list[PauliTerm]:
    """sum over bonds of jx XX + jy YY + jz ZZ on a 1D chain."""
    terms = []
    bonds = [(i, i + 1) for i in range(n - 1)]
    if periodic and n > 2:
        bonds.append((n - 1, 0))
    for i, j in bonds:
        for coeff, ax in ((jx, "X"), (jy, "Y"), (jz, "Z")):
            if coeff != 0:
                terms.append(term(coeff, n, **{f"q{i}": ax, f"q{j}": ax}))
    return terms


def tfim_chain(n: int, g: float = 1.0, periodic: bool = False) -> list[PauliTerm]:
    """-sum ZZ on bonds - g * sum X on sites."""
    terms = []
    bonds = [(i, i + 1) for i in range(n - 1)]
    if periodic and n > 2:
        bonds.append((n - 1, 0))
    for i, j in bonds:
        terms.append(term(-1.0, n, **{f"q{i}": "Z", f"q{j}": "Z"}))
    for i in range(n):
        if g != 0:
            terms.append(term(-g, n, **{f"q{i}": "X"}))
    return terms


def maxcut_ising(n: int, edges: list[tuple[int, int]] | None = None,
                 weights: list[float] | None = None,
                 seed: int | None = None) -> list[PauliTerm]:
    """Cut-size cost operator sum w_ij (I - Z_i Z_j) / 2; purely diagonal.

    Default graph is the 1D ring; pass a seed to draw a random graph instead.
    """
    if edges is None:
        if seed is None:
            edges = [(i, (i + 1) % n) for i in range(n)] if n > 2 else [(0, 1)]
        else:
            rng = np.random.default_rng(seed)
            edges = [(i, j) for i in range(n) for j in range(i + 1, n)
                     if rng.random() < 0.5]
            if not edges:
                edges = [(0, 1)]
    if weights is None:
        weights = [1.0] * len(edges)
    terms = []
    for (i, j), w in zip(edges, weights):
        terms.append(term(0.5 * w, n))
        terms.append(term(-0.5 * w, n, **{f"q{i}": "Z", f"q{j}": "Z"}))
    return terms


_MODELS =tuple(["heisenberg", "tfim", "maxcut", "maxcut-ising"])


def gen_benchmark(model: str, n: int, max_qubits: int = MAX_QUBITS, **params) -> DiagMatrix:
    """Build a named benchmark Hamiltonian as a DiagMatrix of dim 2^n."""
    name = model.lower()
    if name == "heisenberg":
        terms = heisenberg_chain(n, **params)
    elif name == "tfim":
        terms = tfim_chain(n, **params)
    elif name in ("maxcut", "maxcut-ising"):
        terms = maxcut_ising(n, **params)
    else:
        raise DomainError(f"unknown model {model!r}; known: {', '.join(_MODELS)}")
    return pauli_to_diagmatrix(terms, n, max_qubits=max_qubits)
