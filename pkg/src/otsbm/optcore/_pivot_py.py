"""Pure-numpy simplex pivot loop (fallback for the compiled ``_pivot`` kernel).

Tableau layout: rows ``0..m-1`` are constraints, row ``m`` holds reduced
costs with ``-z`` in the last column; column ``-1`` is the right-hand side.
Only columns ``< n_enter`` may enter the basis.
"""
import numpy as np

OPTIMAL, UNBOUNDED, PIVOT_LIMIT = 0, 1, 2
HARRIS_DELTA = 1e-9


def pivot_loop(T, basis, n_enter, max_pivots, bland, degen, degen_limit, tol_opt, tol_piv):
    m = T.shape[0] - 1
    rhs = T.shape[1] - 1
    pivots = 0
    if n_enter == 0:
        return OPTIMAL, pivots, bland, degen
    while pivots < max_pivots:
        d = T[m, :n_enter]
        if bland:
            cand = np.flatnonzero(d < -tol_opt)
            if cand.size == 0:
                return OPTIMAL, pivots, bland, degen
            j = int(cand[0])
        else:
            j = int(np.argmin(d))
            if d[j] >= -tol_opt:
                return OPTIMAL, pivots, bland, degen

        col = T[:m, j]
        rows = np.flatnonzero(col > tol_piv)
        if rows.size == 0:
            return UNBOUNDED, pivots, bland, degen
        vals = np.maximum(T[rows, rhs], 0.0)
        ratios = vals / col[rows]
        rmin = ratios.min()
        if bland:
            ties = rows[ratios <= rmin + 1e-12 * (1.0 + rmin)]
            r = int(ties[np.argmin(basis[ties])])
        else:
            # Harris: allow a tiny infeasibility to pick the largest pivot element
            bound = ((vals + HARRIS_DELTA) / col[rows]).min()
            ok = rows[ratios <= bound]
            r = int(ok[np.argmax(col[ok])])
            rmin = max(T[r, rhs], 0.0) / col[r]

        if rmin <= 1e-12:
            degen += 1
            if degen > degen_limit:
                bland = True
        else:
            degen = 0

        prow = T[r] / T[r, j]
        colj = T[:, j].copy()
        colj[r] = 0.0
        T -= np.outer(colj, prow)
        T[r] = prow
        T[:, j] = 0.0
        T[r, j] = 1.0
        basis[r] = j
        pivots += 1
    return PIVOT_LIMIT, pivots, bland, degen
