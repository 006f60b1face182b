"""Pure-Python quasi-triangular Sylvester back-substitution.

Solves ``op(TA) @ X + sign * X @ op(TB) = C`` where ``TA`` and ``TB`` are
real Schur factors (upper quasi-triangular with 1x1 and 2x2 diagonal
blocks).  This is the classic Bartels-Stewart back-substitution: walk the
diagonal blocks of both factors in dependency order, solve a small (at most
4x4) linear system per block pair, and accumulate the already-solved
contributions of the same block row/column.

The compiled twin in ``_sylvester_c.pyx`` implements the identical
recurrence; ``tests/test_kernels.py`` pins the two against each other.
"""

import numpy as np

from ..errors import SpectrumClash

__all__ = ["solve_sylvester_quasi_triangular", "quasi_block_starts"]


def quasi_block_starts(t):
    """Start indices of the 1x1/2x2 diagonal blocks of a real Schur factor."""
    n = t.shape[0]
    starts = []
    i = 0
    while i < n:
        starts.append(i)
        if i + 1 < n and t[i + 1, i] != 0.0:
            i += 2
        else:
            i += 1
    return starts


def _small_solve(a_op, b_op, rhs, sign, clash_scale):
    """Solve a_op @ Y + sign * Y @ b_op = rhs for a block of size <= 2x2."""
    ni, nj = rhs.shape
    k = np.kron(np.eye(nj), a_op) + sign * np.kron(b_op.T, np.eye(ni))
    # Near-singular block system <=> op(TA) and -sign*op(TB) share an
    # eigenvalue, which the solvability precondition excludes.
    sv = np.linalg.svd(k, compute_uv=False)
    if sv[-1] <= 1e4 * np.finfo(float).eps * max(clash_scale, sv[0]):
        raise SpectrumClash(
            "coefficient matrices have (near-)opposite eigenvalue pairs; "
            f"block system smallest singular value {sv[-1]:.3e}"
        )
    y = np.linalg.solve(k, rhs.reshape(-1, order="F"))
    return y.reshape((ni, nj), order="F")


def solve_sylvester_quasi_triangular(ta, tb, c, transa=False, transb=False, sign=1):
    """Back-substitution solve of op(TA) X + sign X op(TB) = C.

    Parameters
    ----------
    ta : (m, m) ndarray
        Upper quasi-triangular real Schur factor.
    tb : (n, n) ndarray
        Upper quasi-triangular real Schur factor.
    c : (m, n) ndarray
        Right-hand side (overwritten copies only; input left intact).
    transa, transb : bool
        Apply the transpose of the respective factor.
    sign : int
        +1 or -1, selects the Sylvester sign convention.

    Returns
    -------
    x : (m, n) ndarray
    """
    m = ta.shape[0]
    n = tb.shape[0]
    if m == 0 or n == 0:
        return np.zeros((m, n))
    x = np.zeros((m, n))
    rows = quasi_block_starts(ta)
    cols = quasi_block_starts(tb)
    rows_ext = rows + [m]
    cols_ext = cols + [n]
    clash_scale = max(abs(ta).max(initial=0.0), abs(tb).max(initial=0.0), 1.0)

    row_order = range(len(rows)) if transa else range(len(rows) - 1, -1, -1)
    col_order = range(len(cols) - 1, -1, -1) if transb else range(len(cols))

    for bi in row_order:
        i0, i1 = rows_ext[bi], rows_ext[bi + 1]
        a_op = ta[i0:i1, i0:i1].T if transa else ta[i0:i1, i0:i1]
        for bj in col_order:
            j0, j1 = cols_ext[bj], cols_ext[bj + 1]
            b_op = tb[j0:j1, j0:j1].T if transb else tb[j0:j1, j0:j1]
            rhs = c[i0:i1, j0:j1].astype(float, copy=True)
            # Row coupling: already-solved blocks in the same block column.
            if transa:
                if i0 > 0:
                    rhs -= ta[:i0, i0:i1].T @ x[:i0, j0:j1]
            else:
                if i1 < m:
                    rhs -= ta[i0:i1, i1:] @ x[i1:, j0:j1]
            # Column coupling: already-solved blocks in the same block row.
            if transb:
                if j1 < n:
                    rhs -= sign * (x[i0:i1, j1:] @ tb[j0:j1, j1:].T)
            else:
                if j0 > 0:
                    rhs -= sign * (x[i0:i1, :j0] @ tb[:j0, j0:j1])
            x[i0:i1, j0:j1] = _small_solve(a_op, b_op, rhs, sign, clash_scale)
    return x
