"""Sparse CSR kernels with a compiled fast path and a numpy/scipy fallback.

The backend is chosen once at import: the Cython extension if it built,
otherwise the pure-Python implementation. ``HGBENCH_PURE_PYTHON=1`` forces
the fallback. Both backends accumulate each output row in stored-index
order, so swapping them does not change results.

Every sparse-dense product bumps a per-thread counter; the efficiency suite
uses it to prove that precomputed-propagation models do no structural work
inside their training loop.
"""

from __future__ import annotations

import hashlib
import os
import threading
import time

import numpy as np

from . import _csr_py

_backend = _csr_py
BACKEND = "python"

if os.environ.get("HGBENCH_PURE_PYTHON", "") != "1":
    try:
        from . import _csr_cy

        _backend = _csr_cy
        BACKEND = "cython"
    except ImportError:
        pass


class _Counters(threading.local):
    def __init__(self):
        self.spmm_calls = 0


counters = _Counters()


def spmm_calls() -> int:
    """Sparse-dense products executed by the calling thread so far."""
    return counters.spmm_calls


def reset_spmm_calls() -> None:
    counters.spmm_calls = 0


class CsrMatrix:
    """Immutable CSR matrix with deterministic construction and transpose.

    Stored column indices are strictly ascending within each row, so
    floating-point reductions over a row happen in a fixed order.
    """

    __slots__ = ("shape", "indptr", "indices", "data", "_transpose", "_digest")

    def __init__(self, shape, indptr, indices, data):
        n_rows, n_cols = shape
        indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        indices = np.ascontiguousarray(indices, dtype=np.int64)
        data = np.ascontiguousarray(data, dtype=np.float64)
        if indptr.shape != (n_rows + 1,):
            raise ValueError(f"indptr length {indptr.shape[0]} != n_rows+1 ({n_rows + 1})")
        if indptr[0] != 0 or indptr[-1] != len(indices) or len(indices) != len(data):
            raise ValueError("inconsistent CSR arrays")
        if len(indices) and (indices.min() < 0 or indices.max() >= n_cols):
            raise ValueError("column index out of range")
        for arr in (indptr, indices, data):
            arr.setflags(write=False)
        self.shape = (int(n_rows), int(n_cols))
        self.indptr = indptr
        self.indices = indices
        self.data = data
        self._transpose = None
        self._digest = None

    @classmethod
    def from_coo(cls, rows, cols, vals, shape):
        """Coalesce COO triples; duplicate entries are summed in input order."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        n_rows, n_cols = shape
        if len(rows):
            if rows.min() < 0 or rows.max() >= n_rows:
                raise ValueError("row index out of range")
            if cols.min() < 0 or cols.max() >= n_cols:
                raise ValueError("column index out of range")
        order = np.lexsort((cols, rows))  # stable: ties keep input order
        rows, cols, vals = rows[order], cols[order], vals[order]
        if len(rows):
            new_group = np.empty(len(rows), dtype=bool)
            new_group[0] = True
            new_group[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
            starts = np.flatnonzero(new_group)
            summed = np.add.reduceat(vals, starts)
            rows, cols, vals = rows[starts], cols[starts], summed
        indptr = np.zeros(n_rows + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(shape, indptr, cols, vals)

    @property
    def nnz(self) -> int:
        return len(self.data)

    def row_slice(self, i):
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.indices[lo:hi], self.data[lo:hi]

    def transpose(self) -> "CsrMatrix":
        if self._transpose is None:
            n_rows, n_cols = self.shape
            row_ids = np.repeat(
                np.arange(n_rows, dtype=np.int64), np.diff(self.indptr)
            )
            t = CsrMatrix.from_coo(
                self.indices, row_ids, self.data, (n_cols, n_rows)
            )
            self._transpose = t
            t._transpose = self
        return self._transpose

    def matmul_dense(self, dense: np.ndarray) -> np.ndarray:
        """Sparse @ dense with the selected backend; counts as one spmm."""
        dense = np.ascontiguousarray(dense, dtype=np.float64)
        if dense.ndim != 2 or dense.shape[0] != self.shape[1]:
            raise ValueError(
                f"cannot multiply {self.shape} CSR by dense {dense.shape}"
            )
        counters.spmm_calls += 1
        out = np.empty((self.shape[0], dense.shape[1]), dtype=np.float64)
        _backend.csr_dense_matmul(self.indptr, self.indices, self.data, dense, out)
        return out

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.float64)
        for i in range(self.shape[0]):
            idx, val = self.row_slice(i)
            out[i, idx] = val
        return out

    def digest(self) -> str:
        """Content hash; stable cache key for derived-operator caches."""
        if self._digest is None:
            h = hashlib.sha1()
            h.update(np.int64(self.shape[0]).tobytes())
            h.update(np.int64(self.shape[1]).tobytes())
            h.update(self.indptr.tobytes())
            h.update(self.indices.tobytes())
            h.update(self.data.tobytes())
            self._digest = h.hexdigest()
        return self._digest

    def __repr__(self) -> str:
        return f"CsrMatrix(shape={self.shape}, nnz={self.nnz})"


def available_backends():
    out = {"python": _csr_py}
    if BACKEND == "cython":
        out["cython"] = _backend
    return out


def benchmark_backends(n_rows=4096, width=128, nnz_per_row=8, repeats=5, seed=0):
    """Time each backend on one random CSR @ dense product.

    Returns a list of result dicts (backend, seconds per call, max abs
    difference and bitwise equality against the python backend).
    """
    rng = np.random.default_rng(seed)
    rows = np.repeat(np.arange(n_rows, dtype=np.int64), nnz_per_row)
    cols = rng.integers(0, n_rows, size=len(rows), dtype=np.int64)
    vals = rng.standard_normal(len(rows))
    mat = CsrMatrix.from_coo(rows, cols, vals, (n_rows, n_rows))
    dense = np.ascontiguousarray(rng.standard_normal((n_rows, width)))

    reference = None
    results = []
    for name, mod in sorted(available_backends().items()):
        out = np.empty((n_rows, width))
        mod.csr_dense_matmul(mat.indptr, mat.indices, mat.data, dense, out)
        best = np.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            mod.csr_dense_matmul(mat.indptr, mat.indices, mat.data, dense, out)
            best = min(best, time.perf_counter() - t0)
        if name == "python":
            reference = out.copy()
        results.append({"backend": name, "seconds": best, "out": out.copy()})
    for row in results:
        out = row.pop("out")
        row["max_abs_diff"] = float(np.max(np.abs(out - reference)))
        row["bitwise_equal"] = bool(np.array_equal(out, reference))
    return results
