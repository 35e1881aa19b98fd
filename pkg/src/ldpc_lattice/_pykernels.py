"""Numpy reference kernels, used when the compiled extension is unavailable."""

from __future__ import annotations

import numpy as np


def _segment_sum(values, ptr):
    # per-segment sums; empty segments give 0
    csum = np.concatenate(([0.0], np.cumsum(values)))
    return csum[ptr[1:]] - csum[ptr[:-1]]


def spa(row_ptr, edge_var, col_ptr, var_edges, llr, max_iter, clip):
    n = llr.shape[0]
    m = row_ptr.shape[0] - 1
    deg = np.diff(row_ptr)
    edge_check = np.repeat(np.arange(m), deg)
    tmax = np.tanh(0.5 * clip)
    v2c = llr[edge_var].astype(np.float64)
    bits = np.zeros(n, dtype=np.uint8)
    iters = 0
    converged = False
    for it in range(max_iter):
        iters = it + 1
        mag = np.abs(v2c)
        is_zero = mag == 0.0
        logt = np.zeros_like(v2c)
        nz = ~is_zero
        logt[nz] = np.log(np.minimum(np.tanh(0.5 * mag[nz]), tmax))
        s = _segment_sum(logt, row_ptr)[edge_check]
        zeros = _segment_sum(is_zero.astype(np.float64), row_ptr)[edge_check]
        neg = (_segment_sum((v2c < 0).astype(np.float64), row_ptr).astype(np.int64) % 2)[edge_check]
        t = np.minimum(np.exp(s - logt), tmax)
        out = 2.0 * np.arctanh(t)
        flip = (neg ^ (v2c < 0).astype(np.int64)) == 1
        out[flip] = -out[flip]
        out[(zeros - is_zero) > 0] = 0.0
        c2v = out

        total = llr.astype(np.float64).copy()
        np.add.at(total, edge_var, c2v)
        bits = (total < 0).astype(np.uint8)
        undecided = bool(np.any(total == 0.0))
        v2c = np.clip(total[edge_var] - c2v, -clip, clip)
        parity = _segment_sum(bits[edge_var].astype(np.float64), row_ptr).astype(np.int64) % 2
        if not parity.any() and not undecided:
            converged = True
            break
    return bits, converged, iters


def m_search(b, L, P, k, M):
    """Reference for the compiled tree search; identical tie-breaking."""
    B, n = b.shape
    r = n - k
    out = np.zeros((B, n), dtype=np.int64)
    for smp in range(B):
        score = np.zeros(1, dtype=np.int64)
        lex = np.zeros(1, dtype=np.int64)
        par = np.zeros((1, r), dtype=np.int64)
        parents = []
        values = []
        for i in range(n):
            live = score.shape[0]
            if i < k:
                y = np.full(live, b[smp, i], dtype=np.int64)
                step = int(L[i])
            else:
                y = 2 * b[smp, i] + par[:, i - k]
                step = 2 * int(L[i])
            f = np.floor_divide(y, step)
            c_par = np.repeat(np.arange(live), 2)
            c_val = np.repeat(f, 2) + np.tile([0, 1], live)
            x = np.repeat(y, 2) - step * c_val
            c_score = score[c_par] + x * x
            order = np.lexsort((c_val, lex[c_par], c_score))[:M]
            p_sel, v_sel = c_par[order], c_val[order]
            parents.append(p_sel)
            values.append(v_sel)
            score = c_score[order]
            rank_order = np.lexsort((v_sel, lex[p_sel]))
            lex = np.empty(len(order), dtype=np.int64)
            lex[rank_order] = np.arange(len(order))
            if r > 0 and i == k - 1:
                xs = np.empty((len(order), k), dtype=np.int64)
                slot = np.arange(len(order))
                for j in range(k - 1, -1, -1):
                    xs[:, j] = b[smp, j] - L[j] * values[j][slot]
                    slot = parents[j][slot]
                par = xs @ P
            elif i >= k:
                par = par[p_sel]
        slot = 0
        for i in range(n - 1, -1, -1):
            out[smp, i] = values[i][slot]
            slot = parents[i][slot]
    return out
