# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled CSR kernels: the hot inner loops of sparse message passing.

Accumulation is strictly sequential in stored-index order so results are
bit-identical to the pure-Python backend (extension is compiled with
-ffp-contract=off to keep mul+add unfused).
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def csr_dense_matmul(
    const cnp.int64_t[::1] indptr,
    const cnp.int64_t[::1] indices,
    const cnp.float64_t[::1] data,
    const cnp.float64_t[:, ::1] dense,
    cnp.float64_t[:, ::1] out,
):
    """out[i, :] = sum_k data[k] * dense[indices[k], :] over row i's nonzeros."""
    cdef Py_ssize_t n_rows = indptr.shape[0] - 1
    cdef Py_ssize_t n_cols = dense.shape[1]
    cdef Py_ssize_t i, k, j, col
    cdef cnp.float64_t a
    for i in range(n_rows):
        for j in range(n_cols):
            out[i, j] = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            col = indices[k]
            a = data[k]
            for j in range(n_cols):
                out[i, j] += a * dense[col, j]
    return np.asarray(out)
