"""File formats: DiaQ binary, DiaQ JSON, and Matrix Market interop.

DiaQ binary layout (little-endian throughout):

    magic "DIAQ1" (5 bytes)
    u64 N, u64 diagonal count
    per diagonal, ascending offset: i64 offset, then (N - |offset|) f64 pairs (re, im)
"""

from __future__ import annotations

import json
import os
import struct
import tempfile

import numpy as np
import scipy.io
import scipy.sparse

from .diagmat import COMPLEX, DiagMatrix, Diagonal, diag_length, from_dense
from .errors import ShapeError

MAGIC = b"DIAQ1"


def write_diaq(m: DiagMatrix, path: str) -> None:
    payload = bytearray(MAGIC)
    payload += struct.pack("<QQ", m.dim, m.nnzd)
    for diag in m.diagonals:
        payload += struct.pack("<q", diag.offset)
        pairs = np.empty(2 * len(diag.values), dtype="<f8")
        pairs[0::2] = diag.values.real
        pairs[1::2] = diag.values.imag
        payload += pairs.tobytes()
    _atomic_write(path, bytes(payload))


def read_diaq(path: str) -> DiagMatrix:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:5] != MAGIC:
        raise ShapeError(f"{path}: bad magic, not a DiaQ binary file")
    n, count = struct.unpack_from("<QQ", blob, 5)
    pos = 5 + 16
    diags = []
    for _ in range(count):
        (offset,) = struct.unpack_from("<q", blob, pos)
        pos += 8
        length = diag_length(int(n), int(offset))
        pairs = np.frombuffer(blob, dtype="<f8", count=2 * length, offset=pos)
        pos += 16 * length
        diags.append(Diagonal(int(offset), pairs[0::2] + 1j * pairs[1::2]))
    if pos != len(blob):
        raise ShapeError(f"{path}: {len(blob) - pos} trailing bytes")
    return DiagMatrix(int(n), tuple(diags))


def write_diaq_json(m: DiagMatrix, path: str) -> None:
    doc = {
        "n": m.dim,
        "diags": [
            {"offset": d.offset,
             "values": [[float(v.real), float(v.imag)] for v in d.values]}
            for d in m.diagonals
        ],
    }
    _atomic_write(path, json.dumps(doc, separators=(",", ":")).encode() + b"\n")


def read_diaq_json(path: str) -> DiagMatrix:
    with open(path) as fh:
        doc = json.load(fh)
    diags = tuple(
        Diagonal(int(d["offset"]),
                 np.array([complex(re, im) for re, im in d["values"]], dtype=COMPLEX))
        for d in sorted(doc["diags"], key=lambda d: d["offset"])
    )
    return DiagMatrix(int(doc["n"]), diags)


def write_matrix_market(m: DiagMatrix, path: str) -> None:
    rows, cols, vals = [], [], []
    for diag in m.diagonals:
        r0 = diag.row_start()
        idx = np.arange(r0, r0 + len(diag.values))
        rows.append(idx)
        cols.append(idx + diag.offset)
        vals.append(diag.values)
    if rows:
        coo = scipy.sparse.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(m.dim, m.dim),
        )
    else:
        coo = scipy.sparse.coo_matrix((m.dim, m.dim), dtype=COMPLEX)
    with tempfile.NamedTemporaryFile(dir=os.path.dirname(path) or ".",
                                     suffix=".mtx", delete=False) as tmp:
        scipy.io.mmwrite(tmp, coo)
        tmp_path = tmp.name
    os.replace(tmp_path, path)


def read_matrix_market(path: str) -> DiagMatrix:
    mat = scipy.io.mmread(path)
    dense = np.asarray(mat.todense() if scipy.sparse.issparse(mat) else mat, dtype=COMPLEX)
    if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
        raise ShapeError(f"{path}: square matrix required, got {dense.shape}")
    return from_dense(dense)


_FORMATS = {
    "diaq": (read_diaq, write_diaq),
    "json": (read_diaq_json, write_diaq_json),
    "mtx": (read_matrix_market, write_matrix_market),
}


def sniff_format(path: str) -> str:
    if path.endswith(".json"):
        return "json"
    if path.endswith((".mtx", ".mm")):
        return "mtx"
    return "diaq"


def load_matrix(path: str, fmt: str | None = None) -> DiagMatrix:
    reader, _ = _FORMATS[fmt or sniff_format(path)]
    return reader(path)


def save_matrix(m: DiagMatrix, path: str, fmt: str | None = None) -> None:
    _, writer = _FORMATS[fmt or sniff_format(path)]
    writer(m, path)


def _atomic_write(path: str, data: bytes) -> None:
    """Write-to-temp then rename; partial files are never left behind."""
    fd, tmp_path = tempfile.mkstemp(dir=os.path.dirname(path) or ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise
