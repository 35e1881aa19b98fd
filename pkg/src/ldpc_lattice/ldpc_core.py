"""Binary LDPC codes: construction, systematic form, syndrome and SPA decoding.

Parity-check matrices are held as :class:`BinaryParityCheck`, an immutable
pair of adjacency views (check -> variables, variable -> checks).  Dense
``numpy`` copies are produced on demand for elimination and testing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import kernels

__all__ = [
    "BinaryParityCheck",
    "SystematicCode",
    "DegenerateCodeError",
    "build_regular_ldpc",
    "gf2_rank",
    "to_systematic",
    "syndrome",
    "spa_decode",
    "read_alist",
    "write_alist",
]

DEFAULT_MAX_ITER = 50


class DegenerateCodeError(ValueError):
    """Raised when a parity-check matrix leaves no information positions."""


@dataclass(frozen=True, eq=False)
class BinaryParityCheck:
    """Sparse GF(2) parity-check matrix.

    Parameters
    ----------
    n : int
        Code length (number of columns).
    m : int
        Number of checks (rows).
    rows : tuple of tuple of int
        Sorted variable indices of every check.
    """

    n: int
    m: int
    rows: tuple[tuple[int, ...], ...]
    cols: tuple[tuple[int, ...], ...] = field(init=False)

    def __post_init__(self):
        if len(self.rows) != self.m:
            raise ValueError(f"expected {self.m} rows, got {len(self.rows)}")
        cols: list[list[int]] = [[] for _ in range(self.n)]
        for c, row in enumerate(self.rows):
            if len(set(row)) != len(row):
                raise ValueError(f"row {c} repeats a variable index")
            for v in row:
                if not 0 <= v < self.n:
                    raise ValueError(f"variable index {v} out of range [0, {self.n})")
                cols[v].append(c)
        object.__setattr__(self, "rows", tuple(tuple(sorted(r)) for r in self.rows))
        object.__setattr__(self, "cols", tuple(tuple(c) for c in cols))

    @classmethod
    def from_dense(cls, H) -> "BinaryParityCheck":
        H = np.asarray(H) % 2
        if H.ndim != 2:
            raise ValueError("parity-check matrix must be 2-D")
        m, n = H.shape
        rows = tuple(tuple(int(v) for v in np.flatnonzero(H[c])) for c in range(m))
        return cls(n=n, m=m, rows=rows)

    @classmethod
    def from_rows(cls, n: int, rows: Iterable[Sequence[int]]) -> "BinaryParityCheck":
        rows = tuple(tuple(int(v) for v in r) for r in rows)
        return cls(n=n, m=len(rows), rows=rows)

    def to_dense(self, dtype=np.uint8) -> np.ndarray:
        H = np.zeros((self.m, self.n), dtype=dtype)
        for c, row in enumerate(self.rows):
            H[c, list(row)] = 1
        return H

    def permute_columns(self, perm: Sequence[int]) -> "BinaryParityCheck":
        """Return the matrix whose column ``j`` is column ``perm[j]`` of this one."""
        perm = np.asarray(perm)
        inverse = np.empty_like(perm)
        inverse[perm] = np.arange(len(perm))
        rows = tuple(tuple(int(inverse[v]) for v in row) for row in self.rows)
        return BinaryParityCheck(n=self.n, m=self.m, rows=rows)

    @property
    def num_edges(self) -> int:
        return sum(len(r) for r in self.rows)

    def column_weights(self) -> np.ndarray:
        return np.array([len(c) for c in self.cols], dtype=np.int64)

    def row_weights(self) -> np.ndarray:
        return np.array([len(r) for r in self.rows], dtype=np.int64)

    def __eq__(self, other):
        if not isinstance(other, BinaryParityCheck):
            return NotImplemented
        return self.n == other.n and self.rows == other.rows

    def __hash__(self):
        return hash((self.n, self.rows))

    # Flat edge arrays consumed by the decoding kernels; edges are ordered by check.
    def _edge_arrays(self):
        cached = self.__dict__.get("_edges")
        if cached is not None:
            return cached
        row_ptr = np.zeros(self.m + 1, dtype=np.int64)
        row_ptr[1:] = np.cumsum([len(r) for r in self.rows])
        edge_var = np.fromiter((v for r in self.rows for v in r), dtype=np.int64,
                               count=int(row_ptr[-1]))
        order = np.argsort(edge_var, kind="stable")
        col_ptr = np.zeros(self.n + 1, dtype=np.int64)
        col_ptr[1:] = np.cumsum(np.bincount(edge_var, minlength=self.n))
        cached = (row_ptr, edge_var, col_ptr, order.astype(np.int64))
        object.__setattr__(self, "_edges", cached)
        return cached


@dataclass(frozen=True, eq=False)
class SystematicCode:
    """Systematic generator ``[I_k | P]`` of a column-permuted code.

    ``col_perm[j]`` is the column of the original ``H`` that sits at
    systematic position ``j``; ``H_sys`` is ``H`` with its columns reordered
    accordingly, so every row of ``[I_k | P]`` has zero syndrome against it.
    """

    k: int
    n: int
    P: np.ndarray
    col_perm: np.ndarray
    H_sys: BinaryParityCheck

    def __post_init__(self):
        P = np.ascontiguousarray(self.P, dtype=np.int64)
        P.setflags(write=False)
        perm = np.ascontiguousarray(self.col_perm, dtype=np.int64)
        perm.setflags(write=False)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "col_perm", perm)
        if P.shape != (self.k, self.n - self.k):
            raise ValueError(f"P has shape {P.shape}, expected {(self.k, self.n - self.k)}")

    def generator(self) -> np.ndarray:
        return np.hstack([np.eye(self.k, dtype=np.int64), self.P])

    def encode_bits(self, u) -> np.ndarray:
        """Codeword(s) ``u [I | P] mod 2`` in systematic order."""
        u = np.asarray(u, dtype=np.int64) % 2
        return np.concatenate([u, int_matmul(u, self.P) % 2], axis=-1)


_FLOAT_EXACT = 2 ** 52


def int_matmul(a, P) -> np.ndarray:
    """Exact ``a @ P`` for an integer ``a`` and a 0/1 matrix ``P``.

    numpy has no BLAS path for int64, so the product goes through float64
    whenever every partial sum is exactly representable.
    """
    a = np.asarray(a, dtype=np.int64)
    if a.size and int(np.abs(a).max()) * P.shape[0] < _FLOAT_EXACT:
        return np.rint(a.astype(np.float64) @ P.astype(np.float64)).astype(np.int64)
    return a @ P


def _pack_rows(H: np.ndarray) -> np.ndarray:
    return np.packbits(H.astype(np.uint8), axis=1)


def _rref_gf2(H: np.ndarray):
    """Row-reduce a dense 0/1 matrix over GF(2).

    Returns the reduced matrix (independent rows only) and the pivot columns.
    """
    m, n = H.shape
    A = _pack_rows(H)
    pivots: list[int] = []
    r = 0
    for col in range(n):
        if r == m:
            break
        byte, bit = divmod(col, 8)
        mask = np.uint8(0x80 >> bit)
        hits = np.flatnonzero(A[r:, byte] & mask) + r
        if hits.size == 0:
            continue
        p = hits[0]
        if p != r:
            A[[r, p]] = A[[p, r]]
        others = np.flatnonzero(A[:, byte] & mask)
        others = others[others != r]
        if others.size:
            A[others] ^= A[r]
        pivots.append(col)
        r += 1
    R = np.unpackbits(A[:r], axis=1, count=n)
    return R, pivots


def gf2_rank(H) -> int:
    """Rank of a binary matrix over GF(2)."""
    if isinstance(H, BinaryParityCheck):
        H = H.to_dense()
    H = np.asarray(H) % 2
    if H.size == 0:
        return 0
    return len(_rref_gf2(H)[1])


def to_systematic(H: BinaryParityCheck) -> SystematicCode:
    """Systematic generator of the code with parity-check matrix ``H``.

    Dependent rows are dropped, so ``k = n - rank(H)`` may exceed ``n - m``.

    Raises
    ------
    DegenerateCodeError
        If ``H`` has zero rank or full column rank (``k == 0``).
    """
    n = H.n
    R, pivots = _rref_gf2(H.to_dense())
    r = len(pivots)
    if r == 0:
        raise DegenerateCodeError("parity-check matrix has rank zero")
    k = n - r
    if k == 0:
        raise DegenerateCodeError("parity-check matrix has full column rank; code is {0}")
    pivot_set = set(pivots)
    info = [c for c in range(n) if c not in pivot_set]
    perm = np.array(info + list(pivots), dtype=np.int64)
    # R[:, perm] = [A | I_r]  =>  G = [I_k | A^T]
    A = R[:, info]
    P = A.T.astype(np.int64)
    return SystematicCode(k=k, n=n, P=P, col_perm=perm, H_sys=H.permute_columns(perm))


def syndrome(H: BinaryParityCheck, bits) -> np.ndarray:
    """``H bits^T mod 2`` for one word or a batch (last axis has length n)."""
    bits = np.asarray(bits)
    if bits.shape[-1] != H.n:
        raise ValueError(f"word length {bits.shape[-1]} does not match n={H.n}")
    row_ptr, edge_var, _, _ = H._edge_arrays()
    gathered = (bits[..., edge_var].astype(np.int64)) & 1
    if gathered.shape[-1] == 0:
        return np.zeros(bits.shape[:-1] + (H.m,), dtype=np.uint8)
    sums = np.add.reduceat(gathered, row_ptr[:-1], axis=-1) if H.m else gathered[..., :0]
    # reduceat misreports empty rows
    empty = row_ptr[1:] == row_ptr[:-1]
    if empty.any():
        sums[..., empty] = 0
    return (sums & 1).astype(np.uint8)


def spa_decode(H: BinaryParityCheck, llr, max_iter: int = DEFAULT_MAX_ITER):
    """Log-domain sum-product decoding with the tanh rule.

    Parameters
    ----------
    H : BinaryParityCheck
    llr : array_like, shape (n,)
        ``log Pr(c=-1|y) - log Pr(c=+1|y)``; positive values favour bit 0.
    max_iter : int
        Iteration cap; decoding stops as soon as the syndrome is zero.

    Returns
    -------
    bits : ndarray of uint8
    converged : bool
        Zero syndrome with no undecided (exactly zero) posterior LLR.
    iterations : int
    """
    llr = np.ascontiguousarray(llr, dtype=np.float64)
    if llr.ndim != 1 or llr.shape[0] != H.n:
        raise ValueError(f"llr has shape {llr.shape}, expected ({H.n},)")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if not np.all(np.isfinite(llr)):
        raise ValueError("llr values must be finite")
    row_ptr, edge_var, col_ptr, var_edges = H._edge_arrays()
    bits, converged, iters = kernels.spa(row_ptr, edge_var, col_ptr, var_edges, llr,
                                         int(max_iter), kernels.MESSAGE_CLIP)
    return bits, bool(converged), int(iters)


def build_regular_ldpc(n: int, k: int, col_weight: int = 3, seed: int = 0) -> BinaryParityCheck:
    """Seeded progressive-edge-growth construction with ``m = n - k`` checks.

    Every variable gets ``col_weight`` distinct checks.  Each new edge goes to
    the check that closes the fewest length-4 cycles, then to the lowest
    current degree, remaining ties broken by the seeded generator.  When the
    neighbourhood allows it the resulting graph is free of 4-cycles.
    """
    n, k, col_weight = int(n), int(k), int(col_weight)
    if not 0 < k < n:
        raise ValueError(f"need 0 < k < n, got n={n}, k={k}")
    m = n - k
    if col_weight < 2:
        raise ValueError("col_weight must be >= 2")
    if col_weight > m:
        raise ValueError(f"col_weight={col_weight} exceeds the number of checks m={m}")
    rng = np.random.default_rng(seed)
    check_vars: list[list[int]] = [[] for _ in range(m)]
    var_checks: list[list[int]] = [[] for _ in range(n)]
    degree = np.zeros(m, dtype=np.int64)
    taken = np.iinfo(np.int64).max // 4
    for v in range(n):
        mine = var_checks[v]
        tie = rng.random((col_weight, m))
        for e in range(col_weight):
            # conflicts[c]: 4-cycles closed by joining v to c
            conflicts = np.zeros(m, dtype=np.int64)
            for c in mine:
                for u in check_vars[c]:
                    if u != v:
                        conflicts[var_checks[u]] += 1
            conflicts[mine] = taken
            c = int(np.lexsort((tie[e], degree, conflicts))[0])
            mine.append(c)
            check_vars[c].append(v)
            degree[c] += 1
    return BinaryParityCheck.from_rows(n, check_vars)


def read_alist(path) -> BinaryParityCheck:
    """Read a parity-check matrix in alist format (1-based, zero padded)."""
    with open(path, "r") as fh:
        tokens = fh.read().split()
    try:
        vals = [int(t) for t in tokens]
    except ValueError as exc:
        raise ValueError(f"{path}: non-integer token in alist file") from exc
    pos = 0

    def take(count):
        nonlocal pos
        if pos + count > len(vals):
            raise ValueError(f"{path}: truncated alist file")
        out = vals[pos:pos + count]
        pos += count
        return out

    n, m = take(2)
    max_col, max_row = take(2)
    col_w = take(n)
    row_w = take(m)
    cols = [[x - 1 for x in take(max_col) if x != 0] for _ in range(n)]
    rows = [[x - 1 for x in take(max_row) if x != 0] for _ in range(m)]
    for j, (w, c) in enumerate(zip(col_w, cols)):
        if len(c) != w:
            raise ValueError(f"{path}: column {j + 1} lists {len(c)} entries, weight says {w}")
    for i, (w, r) in enumerate(zip(row_w, rows)):
        if len(r) != w:
            raise ValueError(f"{path}: row {i + 1} lists {len(r)} entries, weight says {w}")
    H = BinaryParityCheck.from_rows(n, rows)
    if [sorted(c) for c in cols] != [list(c) for c in H.cols]:
        raise ValueError(f"{path}: column and row lists disagree")
    return H


def write_alist(H: BinaryParityCheck, path) -> None:
    col_w = H.column_weights()
    row_w = H.row_weights()
    max_col = int(col_w.max(initial=0))
    max_row = int(row_w.max(initial=0))
    lines = [f"{H.n} {H.m}", f"{max_col} {max_row}",
             " ".join(map(str, col_w)), " ".join(map(str, row_w))]
    for c in H.cols:
        idx = [x + 1 for x in c] + [0] * (max_col - len(c))
        lines.append(" ".join(map(str, idx)))
    for r in H.rows:
        idx = [x + 1 for x in r] + [0] * (max_row - len(r))
        lines.append(" ".join(map(str, idx)))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
