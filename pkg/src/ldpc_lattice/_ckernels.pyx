# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: sum-product decoding and the M-algorithm tree search.

Both functions mirror ``_pykernels`` operation for operation; the pure-Python
module is the reference and the fallback when this extension is not built.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport tanh, atanh, log, exp, fabs

cnp.import_array()


def spa(const cnp.int64_t[::1] row_ptr, const cnp.int64_t[::1] edge_var,
        const cnp.int64_t[::1] col_ptr, const cnp.int64_t[::1] var_edges,
        const double[::1] llr, int max_iter, double clip):
    cdef Py_ssize_t m = row_ptr.shape[0] - 1
    cdef Py_ssize_t n = llr.shape[0]
    cdef Py_ssize_t E = edge_var.shape[0]
    cdef double[::1] v2c = np.empty(E, dtype=np.float64)
    cdef double[::1] c2v = np.zeros(E, dtype=np.float64)
    cdef double[::1] logt = np.empty(E, dtype=np.float64)
    cdef double[::1] total = np.empty(n, dtype=np.float64)
    cdef cnp.uint8_t[::1] bits = np.zeros(n, dtype=np.uint8)
    cdef double tmax = tanh(0.5 * clip)
    cdef Py_ssize_t e, c, v, j, start, stop
    cdef int it, zeros, neg, synd, undecided
    cdef double s, a, t, mag, x
    cdef int iters = 0
    cdef bint converged = False

    for e in range(E):
        v2c[e] = llr[edge_var[e]]

    for it in range(max_iter):
        iters = it + 1
        # check-node update
        for c in range(m):
            start = row_ptr[c]
            stop = row_ptr[c + 1]
            s = 0.0
            zeros = 0
            neg = 0
            for e in range(start, stop):
                x = v2c[e]
                if x < 0:
                    neg ^= 1
                a = fabs(x)
                if a == 0.0:
                    zeros += 1
                    logt[e] = 0.0
                else:
                    t = tanh(0.5 * a)
                    if t > tmax:
                        t = tmax
                    logt[e] = log(t)
                    s += logt[e]
            for e in range(start, stop):
                x = v2c[e]
                if zeros - (1 if x == 0.0 else 0) > 0:
                    c2v[e] = 0.0
                    continue
                t = exp(s - logt[e])
                if t > tmax:
                    t = tmax
                mag = 2.0 * atanh(t)
                if neg ^ (1 if x < 0 else 0):
                    c2v[e] = -mag
                else:
                    c2v[e] = mag
        # variable-node update and tentative decision
        for v in range(n):
            total[v] = llr[v]
        for e in range(E):
            total[edge_var[e]] += c2v[e]
        undecided = 0
        for v in range(n):
            if total[v] < 0:
                bits[v] = 1
            else:
                bits[v] = 0
                if total[v] == 0.0:
                    undecided = 1
        for e in range(E):
            x = total[edge_var[e]] - c2v[e]
            if x > clip:
                x = clip
            elif x < -clip:
                x = -clip
            v2c[e] = x
        synd = 0
        for c in range(m):
            j = 0
            for e in range(row_ptr[c], row_ptr[c + 1]):
                j ^= bits[edge_var[e]]
            if j:
                synd = 1
                break
        if synd == 0 and undecided == 0:
            converged = True
            break
    return np.asarray(bits), converged, iters


def m_search(const cnp.int64_t[:, ::1] b, const cnp.int64_t[::1] L,
             const cnp.int64_t[:, ::1] P, int k, int M):
    """Per-sample breadth-limited tree search over shift vectors ``s``.

    Keeps the ``M`` best partial paths by cumulative ``sum x_j^2`` where
    ``x = (b - s*L) @ [[I, P], [0, 2I]]``; ties go to the lexicographically
    smaller ``s``.
    """
    cdef Py_ssize_t B = b.shape[0]
    cdef Py_ssize_t n = b.shape[1]
    cdef Py_ssize_t r = n - k
    cdef Py_ssize_t rr = r if r > 0 else 1
    out = np.zeros((B, n), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] s_out = out
    cdef cnp.int64_t[:, ::1] parent = np.zeros((n, M), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] value = np.zeros((n, M), dtype=np.int64)
    cdef cnp.int64_t[::1] score = np.zeros(M, dtype=np.int64)
    cdef cnp.int64_t[::1] lex = np.zeros(M, dtype=np.int64)
    cdef cnp.int64_t[::1] c_score = np.zeros(2 * M, dtype=np.int64)
    cdef cnp.int64_t[::1] c_par = np.zeros(2 * M, dtype=np.int64)
    cdef cnp.int64_t[::1] c_val = np.zeros(2 * M, dtype=np.int64)
    cdef cnp.int64_t[::1] c_idx = np.zeros(2 * M, dtype=np.int64)
    cdef cnp.int64_t[::1] new_lex = np.zeros(M, dtype=np.int64)
    cdef cnp.int64_t[::1] xs = np.zeros(k if k > 0 else 1, dtype=np.int64)
    cdef cnp.int64_t[:, ::1] par = np.zeros((M, rr), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] par_tmp = np.zeros((M, rr), dtype=np.int64)
    cdef Py_ssize_t smp, i, j, q, w, live, nc, slot
    cdef cnp.int64_t f, x, y, step, acc, ka, kb
    for smp in range(B):
        live = 1
        score[0] = 0
        lex[0] = 0
        for i in range(n):
            nc = 0
            for q in range(live):
                if i < k:
                    y = b[smp, i]
                    step = L[i]
                else:
                    y = 2 * b[smp, i] + par[q, i - k]
                    step = 2 * L[i]
                f = _floordiv(y, step)
                for j in range(2):
                    x = y - step * (f + j)
                    c_score[nc] = score[q] + x * x
                    c_par[nc] = q
                    c_val[nc] = f + j
                    c_idx[nc] = nc
                    nc += 1
            # insertion sort by (score, parent lex rank, s value)
            for j in range(1, nc):
                w = c_idx[j]
                q = j - 1
                while q >= 0 and _cand_less(w, c_idx[q], c_score, c_par, c_val, lex):
                    c_idx[q + 1] = c_idx[q]
                    q -= 1
                c_idx[q + 1] = w
            live = nc if nc < M else M
            for j in range(live):
                w = c_idx[j]
                parent[i, j] = c_par[w]
                value[i, j] = c_val[w]
            for j in range(live):
                w = 0
                for q in range(live):
                    if _path_less(q, j, i, parent, value, lex):
                        w += 1
                new_lex[j] = w
            for j in range(live):
                w = c_idx[j]
                score[j] = c_score[w]
                lex[j] = new_lex[j]
            if r > 0 and i == k - 1:
                for q in range(live):
                    slot = q
                    for j in range(k - 1, -1, -1):
                        xs[j] = b[smp, j] - L[j] * value[j, slot]
                        slot = parent[j, slot]
                    for j in range(r):
                        acc = 0
                        for w in range(k):
                            acc += P[w, j] * xs[w]
                        par[q, j] = acc
            elif i >= k:
                for q in range(live):
                    for j in range(r):
                        par_tmp[q, j] = par[parent[i, q], j]
                for q in range(live):
                    for j in range(r):
                        par[q, j] = par_tmp[q, j]
        slot = 0
        for i in range(n - 1, -1, -1):
            s_out[smp, i] = value[i, slot]
            slot = parent[i, slot]
    return out


cdef inline cnp.int64_t _floordiv(cnp.int64_t a, cnp.int64_t d):
    cdef cnp.int64_t q = a // d
    if (a % d != 0) and ((a < 0) != (d < 0)):
        q -= 1
    return q


cdef inline bint _cand_less(Py_ssize_t a, Py_ssize_t b, cnp.int64_t[::1] sc,
                            cnp.int64_t[::1] par, cnp.int64_t[::1] val, cnp.int64_t[::1] lex):
    if sc[a] != sc[b]:
        return sc[a] < sc[b]
    if lex[par[a]] != lex[par[b]]:
        return lex[par[a]] < lex[par[b]]
    return val[a] < val[b]


cdef inline bint _path_less(Py_ssize_t a, Py_ssize_t b, Py_ssize_t i, cnp.int64_t[:, ::1] parent,
                            cnp.int64_t[:, ::1] value, cnp.int64_t[::1] lex):
    # lex holds the previous level's ranks at this point
    if lex[parent[i, a]] != lex[parent[i, b]]:
        return lex[parent[i, a]] < lex[parent[i, b]]
    return value[i, a] < value[i, b]
