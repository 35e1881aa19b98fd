"""Backend selection for the hot loops.

The compiled extension is used when it imports and ``LDPC_LATTICE_PURE`` is
unset; otherwise the numpy reference implementation is used.
"""

from __future__ import annotations

import os

import numpy as np

MESSAGE_CLIP = 30.0

_impl = None
if not os.environ.get("LDPC_LATTICE_PURE"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:  # extension not built
        _impl = None
if _impl is None:
    from . import _pykernels as _impl  # type: ignore[no-redef]

BACKEND = "cython" if _impl.__name__.endswith("_ckernels") else "python"


def spa(row_ptr, edge_var, col_ptr, var_edges, llr, max_iter, clip=MESSAGE_CLIP):
    return _impl.spa(row_ptr, edge_var, col_ptr, var_edges,
                     np.ascontiguousarray(llr, dtype=np.float64), int(max_iter), float(clip))


def m_search(b, L, P, k, M):
    b = np.ascontiguousarray(np.atleast_2d(b), dtype=np.int64)
    return _impl.m_search(b, np.ascontiguousarray(L, dtype=np.int64),
                          np.ascontiguousarray(P, dtype=np.int64), int(k), int(M))
