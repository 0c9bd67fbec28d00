"""Pure-Python (numpy/scipy) fallback for the CSR kernels.

scipy's csr matmul walks each row's nonzeros in stored order, i.e. the same
reduction order as the compiled kernel, so the two backends agree bitwise.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp


def csr_dense_matmul(indptr, indices, data, dense, out):
    mat = sp.csr_matrix(
        (data, indices, indptr), shape=(len(indptr) - 1, dense.shape[0])
    )
    np.copyto(out, mat @ dense)
    return out
