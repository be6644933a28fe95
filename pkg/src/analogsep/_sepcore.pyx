# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled enumeration kernel for the set-intersection separator.

Follows the same enumeration contract as _sepcore_py (size-ascending
patterns, lexicographic within a size, last complement position cycling
fastest) so the two backends report identical outcomes and counters.  The
kernel handles only well-conditioned patterns: the moment any pattern's
Cholesky pivot collapses it returns needs_robust=1 and the caller reruns the
instance through the rank-revealing Python path.
"""

import numpy as np

from libc.math cimport sqrt

cdef double PIVOT_RTOL = 1e-20


def enumerate_kernel(double[:, ::1] HT, double[::1] wc, double[:, ::1] G,
                     double[::1] hw_adj, double[::1] base,
                     double[::1] av1, double[::1] av2, Py_ssize_t n1,
                     Py_ssize_t s_max, double rtol_abs, double dedup_tol,
                     Py_ssize_t cap):
    """Enumerate consistent candidates; see separator.py for the argument layout.

    Returns (candidates, residuals, examined, min_residual, needs_robust).
    """
    cdef Py_ssize_t n = HT.shape[0]
    cdef Py_ssize_t k = HT.shape[1]
    cdef Py_ssize_t a1 = av1.shape[0]
    cdef Py_ssize_t a2 = av2.shape[0]

    pat_np = np.zeros(max(s_max, 1), dtype=np.intp)
    comp_np = np.zeros(n, dtype=np.intp)
    digits_np = np.zeros(n, dtype=np.intp)
    values_np = np.array(base, dtype=np.float64, copy=True)
    vcur_np = np.zeros(max(k, 1), dtype=np.float64)
    gcur_np = np.zeros(n, dtype=np.float64)
    GT_np = np.zeros((max(s_max, 1), max(s_max, 1)), dtype=np.float64)
    L_np = np.zeros_like(GT_np)
    rhs_np = np.zeros(max(s_max, 1), dtype=np.float64)
    yv_np = np.zeros(max(s_max, 1), dtype=np.float64)
    uv_np = np.zeros(max(s_max, 1), dtype=np.float64)
    tmp_np = np.zeros(max(k, 1), dtype=np.float64)
    cands_np = np.zeros((cap, n), dtype=np.float64)
    cres_np = np.zeros(cap, dtype=np.float64)
    cmax_np = np.zeros(cap, dtype=np.float64)

    cdef Py_ssize_t[::1] pat = pat_np
    cdef Py_ssize_t[::1] comp = comp_np
    cdef Py_ssize_t[::1] digits = digits_np
    cdef double[::1] values = values_np
    cdef double[::1] vcur = vcur_np
    cdef double[::1] gcur = gcur_np
    cdef double[:, ::1] GTm = GT_np
    cdef double[:, ::1] L = L_np
    cdef double[::1] rhs = rhs_np
    cdef double[::1] yv = yv_np
    cdef double[::1] uv = uv_np
    cdef double[::1] tmp = tmp_np
    cdef double[:, ::1] cands = cands_np
    cdef double[::1] cres = cres_np
    cdef double[::1] cmax = cmax_np

    cdef Py_ssize_t n_cands = 0
    cdef long long examined = 0
    cdef double min_residual = np.inf

    cdef Py_ssize_t s, i, j, t, p, pos, csize, dd
    cdef double d, acc, floor, maxdiag, delta, r2, diff, mx, val
    cdef bint pattern_alive, dup

    for s in range(0, (s_max if s_max < k else k) + 1):
        if s > n:
            break
        for i in range(s):
            pat[i] = i
        pattern_alive = True
        while pattern_alive:
            # complement of the current pattern, ascending
            csize = 0
            j = 0
            for i in range(n):
                if j < s and pat[j] == i:
                    j += 1
                else:
                    comp[csize] = i
                    csize += 1

            # Gram submatrix and its Cholesky factor, shared by all assignments
            maxdiag = 1e-300
            for i in range(s):
                for j in range(s):
                    GTm[i, j] = G[pat[i], pat[j]]
                if GTm[i, i] > maxdiag:
                    maxdiag = GTm[i, i]
            floor = PIVOT_RTOL * maxdiag
            for j in range(s):
                acc = GTm[j, j]
                for t in range(j):
                    acc -= L[j, t] * L[j, t]
                if acc <= floor:
                    return None, None, 0, 0.0, 1
                L[j, j] = sqrt(acc)
                for i in range(j + 1, s):
                    acc = GTm[i, j]
                    for t in range(j):
                        acc -= L[i, t] * L[j, t]
                    L[i, j] = acc / L[j, j]

            # rhs state at the all-first-atoms assignment
            for i in range(k):
                vcur[i] = wc[i]
            for i in range(n):
                gcur[i] = hw_adj[i]
            for j in range(s):
                pos = pat[j]
                d = base[pos]
                for i in range(k):
                    vcur[i] += d * HT[pos, i]
                for i in range(n):
                    gcur[i] += d * G[pos, i]
            for i in range(csize):
                digits[i] = 0
                values[comp[i]] = av1[0] if comp[i] < n1 else av2[0]

            while True:
                # solve on the pattern via the cached factor
                for j in range(s):
                    rhs[j] = gcur[pat[j]]
                for j in range(s):
                    acc = rhs[j]
                    for t in range(j):
                        acc -= L[j, t] * yv[t]
                    yv[j] = acc / L[j, j]
                for j in range(s - 1, -1, -1):
                    acc = yv[j]
                    for t in range(j + 1, s):
                        acc -= L[t, j] * uv[t]
                    uv[j] = acc / L[j, j]
                for i in range(k):
                    tmp[i] = vcur[i]
                for j in range(s):
                    pos = pat[j]
                    d = uv[j]
                    for i in range(k):
                        tmp[i] -= d * HT[pos, i]
                r2 = 0.0
                for i in range(k):
                    r2 += tmp[i] * tmp[i]
                r2 = sqrt(r2)
                examined += 1
                if r2 < min_residual:
                    min_residual = r2

                if r2 <= rtol_abs:
                    # assemble the candidate into the next slot, then dedup
                    for i in range(n):
                        cands[n_cands, i] = values[i]
                    for j in range(s):
                        cands[n_cands, pat[j]] = uv[j]
                    dup = False
                    for t in range(n_cands):
                        mx = 0.0
                        for i in range(n):
                            diff = cands[n_cands, i] - cands[t, i]
                            if diff < 0.0:
                                diff = -diff
                            if diff > mx:
                                mx = diff
                        if mx <= dedup_tol * (1.0 + cmax[t]):
                            dup = True
                            break
                    if not dup:
                        mx = 0.0
                        for i in range(n):
                            diff = cands[n_cands, i]
                            if diff < 0.0:
                                diff = -diff
                            if diff > mx:
                                mx = diff
                        cmax[n_cands] = mx
                        cres[n_cands] = r2
                        n_cands += 1
                        if n_cands >= cap:
                            return (cands_np[:n_cands].copy(), cres_np[:n_cands].copy(),
                                    examined, min_residual, 0)

                # advance the assignment odometer, last position fastest
                p = csize - 1
                while p >= 0:
                    pos = comp[p]
                    dd = digits[p] + 1
                    if dd < (a1 if pos < n1 else a2):
                        val = av1[dd] if pos < n1 else av2[dd]
                        delta = values[pos] - val
                        for i in range(k):
                            vcur[i] += delta * HT[pos, i]
                        for i in range(n):
                            gcur[i] += delta * G[pos, i]
                        digits[p] = dd
                        values[pos] = val
                        break
                    val = av1[0] if pos < n1 else av2[0]
                    delta = values[pos] - val
                    for i in range(k):
                        vcur[i] += delta * HT[pos, i]
                    for i in range(n):
                        gcur[i] += delta * G[pos, i]
                    digits[p] = 0
                    values[pos] = val
                    p -= 1
                if p < 0:
                    break

            # advance the pattern combination, lexicographic
            j = s - 1
            while j >= 0 and pat[j] == n - s + j:
                j -= 1
            if j < 0:
                pattern_alive = False
            else:
                pat[j] += 1
                for t in range(j + 1, s):
                    pat[t] = pat[t - 1] + 1

    return (cands_np[:n_cands].copy(), cres_np[:n_cands].copy(),
            examined, min_residual, 0)
