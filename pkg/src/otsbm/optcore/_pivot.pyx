# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simplex pivot loop; same rules and return codes as ``_pivot_py``."""

cdef enum:
    OPTIMAL = 0
    UNBOUNDED = 1
    PIVOT_LIMIT = 2

cdef double HARRIS_DELTA = 1e-9


def pivot_loop(double[:, ::1] T, long long[::1] basis, Py_ssize_t n_enter, long max_pivots,
               bint bland, long degen, long degen_limit, double tol_opt, double tol_piv):
    cdef Py_ssize_t m = T.shape[0] - 1
    cdef Py_ssize_t rhs = T.shape[1] - 1
    cdef Py_ssize_t ncol = T.shape[1]
    cdef Py_ssize_t i, j, k, r
    cdef long pivots = 0
    cdef double best, v, a, ratio, rmin, bound, piv, f, bestcol
    cdef long long bestbasis

    while pivots < max_pivots:
        # pricing
        j = -1
        if bland:
            for k in range(n_enter):
                if T[m, k] < -tol_opt:
                    j = k
                    break
        else:
            best = -tol_opt
            for k in range(n_enter):
                if T[m, k] < best:
                    best = T[m, k]
                    j = k
        if j < 0:
            return OPTIMAL, pivots, bland, degen

        # ratio test: exact minimum (Bland) or Harris two-pass (Dantzig)
        rmin = -1.0
        bound = -1.0
        for i in range(m):
            a = T[i, j]
            if a > tol_piv:
                v = T[i, rhs]
                if v < 0.0:
                    v = 0.0
                ratio = v / a
                if rmin < 0.0 or ratio < rmin:
                    rmin = ratio
                ratio = (v + HARRIS_DELTA) / a
                if bound < 0.0 or ratio < bound:
                    bound = ratio
        if rmin < 0.0:
            return UNBOUNDED, pivots, bland, degen

        r = -1
        bestcol = 0.0
        bestbasis = 0
        for i in range(m):
            a = T[i, j]
            if a > tol_piv:
                v = T[i, rhs]
                if v < 0.0:
                    v = 0.0
                ratio = v / a
                if bland:
                    if ratio <= rmin + 1e-12 * (1.0 + rmin) and (r < 0 or basis[i] < bestbasis):
                        r = i
                        bestbasis = basis[i]
                elif ratio <= bound and (r < 0 or a > bestcol):
                    r = i
                    bestcol = a
        if not bland:
            v = T[r, rhs]
            if v < 0.0:
                v = 0.0
            rmin = v / T[r, j]

        if rmin <= 1e-12:
            degen += 1
            if degen > degen_limit:
                bland = True
        else:
            degen = 0

        # pivot
        piv = T[r, j]
        for k in range(ncol):
            T[r, k] = T[r, k] / piv
        for i in range(m + 1):
            if i == r:
                continue
            f = T[i, j]
            if f != 0.0:
                for k in range(ncol):
                    T[i, k] -= f * T[r, k]
                T[i, j] = 0.0
        T[r, j] = 1.0
        basis[r] = j
        pivots += 1
    return PIVOT_LIMIT, pivots, bland, degen
