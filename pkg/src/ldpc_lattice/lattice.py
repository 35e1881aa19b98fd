"""Construction-A LDPC lattice in translated/scaled form.

Lattice words are the all-odd integer vectors ``X = 2 b G - 1`` with
``G = [[I_k, P], [0, 2 I]]``; equivalently ``X = c' + 4z`` where ``c'`` is
a codeword of the underlying binary code mapped to +-1 (bit 1 -> +1).
Every function accepts a single vector or a stack of row vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ldpc_core import (
    DEFAULT_MAX_ITER,
    BinaryParityCheck,
    SystematicCode,
    build_regular_ldpc,
    int_matmul,
    spa_decode,
    to_systematic,
)
from . import kernels


def rnd(x):
    """Round half up, ``floor(x + 1/2)``."""
    return np.floor(np.asarray(x, dtype=np.float64) + 0.5)


@dataclass(frozen=True)
class LatticeBasis:
    """Systematic code ``(k, n, P)``; the lattice generator is implicit."""

    code: SystematicCode

    @property
    def n(self) -> int:
        return self.code.n

    @property
    def k(self) -> int:
        return self.code.k

    @property
    def P(self) -> np.ndarray:
        return self.code.P

    @property
    def H(self) -> BinaryParityCheck:
        """Parity checks in systematic column order."""
        return self.code.H_sys

    @classmethod
    def from_parity_check(cls, H: BinaryParityCheck) -> "LatticeBasis":
        return cls(to_systematic(H))

    @classmethod
    def regular(cls, n: int, k: int, col_weight: int = 3, seed: int = 0) -> "LatticeBasis":
        return cls.from_parity_check(build_regular_ldpc(n, k, col_weight, seed))

    def generator(self) -> np.ndarray:
        k, r = self.k, self.n - self.k
        G = np.zeros((self.n, self.n), dtype=np.int64)
        G[:k, :k] = np.eye(k, dtype=np.int64)
        G[:k, k:] = self.P
        G[k:, k:] = 2 * np.eye(r, dtype=np.int64)
        return G

    def inverse_2g(self) -> np.ndarray:
        """``(2G)^{-1} = [[I/2, -P/4], [0, I/4]]``."""
        k, r = self.k, self.n - self.k
        inv = np.zeros((self.n, self.n))
        inv[:k, :k] = 0.5 * np.eye(k)
        inv[:k, k:] = -0.25 * self.P
        inv[k:, k:] = 0.25 * np.eye(r)
        return inv

    def volume(self) -> int:
        return 2 ** (self.n - self.k)

    def times_g(self, b) -> np.ndarray:
        """Integer product ``b G`` without forming ``G``."""
        b = self._check(b)
        k = self.k
        return np.concatenate([b[..., :k], int_matmul(b[..., :k], self.P) + 2 * b[..., k:]], axis=-1)

    def _check(self, v) -> np.ndarray:
        v = np.asarray(v)
        if v.shape[-1] != self.n:
            raise ValueError(f"expected length {self.n}, got {v.shape[-1]}")
        return v.astype(np.int64, copy=False)


def encode(basis: LatticeBasis, b) -> np.ndarray:
    return 2 * basis.times_g(b) - 1


def lattice_add(X1, X2) -> np.ndarray:
    return np.asarray(X1, dtype=np.int64) + np.asarray(X2, dtype=np.int64) + 1


def is_member(basis: LatticeBasis, X) -> bool | np.ndarray:
    X = np.asarray(X)
    if X.shape[-1] != basis.n:
        return False if X.ndim == 1 else np.zeros(X.shape[:-1], dtype=bool)
    Xi = np.rint(X).astype(np.int64)
    ok = np.all(Xi == X, axis=-1) & np.all(Xi % 2 == 1, axis=-1)
    y = ((Xi + 1) // 2) % 2
    k = basis.k
    ok &= np.all((int_matmul(y[..., :k], basis.P) - y[..., k:]) % 2 == 0, axis=-1)
    return bool(ok) if X.ndim == 1 else ok


def unshape_info(basis: LatticeBasis, X, with_flag: bool = False):
    """Information vector ``b`` with ``encode(b) = X``.

    Computed as ``round((X + 1) (2G)^{-1})`` in integer arithmetic. For a
    non-member the rounded value is still returned; ``with_flag`` adds a
    boolean that is true only when ``X`` was a member.
    """
    X = basis._check(X)
    y = X + 1  # (X + 1) = 2 b G
    k = basis.k
    two_info = y[..., :k]  # 2 b_info
    b_info = np.floor_divide(two_info + 1, 2)
    four_par = y[..., k:] - int_matmul(two_info, basis.P)  # 4 b_par
    b_par = np.floor_divide(four_par + 2, 4)
    b = np.concatenate([b_info, b_par], axis=-1)
    if with_flag:
        return b, is_member(basis, X)
    return b


# The squared distances to the two cosets are 16x the bracketed terms, so the
# nearest-point log-likelihood ratio is four times llr_from_observation.
EXACT_LLR_GAIN = 4.0


def llr_from_observation(y, sigma2: float) -> np.ndarray:
    """Bitwise LLRs, positive favouring the -1 (bit 0) coset.

    ``2 [((y-1)/4 - round)^2 - ((y+1)/4 - round)^2] / sigma2``; multiply by
    ``EXACT_LLR_GAIN`` for the nearest-point log-likelihood ratio.
    """
    y = np.asarray(y, dtype=np.float64)
    a = (y - 1.0) / 4.0
    c = (y + 1.0) / 4.0
    return 2.0 * ((a - rnd(a)) ** 2 - (c - rnd(c)) ** 2) / sigma2


def decode(basis: LatticeBasis, y, sigma2: float, known=None, max_iter: int = DEFAULT_MAX_ITER,
           llr_gain: float = 1.0):
    """Iterative lattice decode of one observation ``y = X + noise``.

    ``known`` optionally marks coordinates whose value is known to be -1;
    they enter the decoder with maximal confidence and are forced in the
    output. ``llr_gain`` scales the channel LLRs. Returns ``(X_hat, converged)``;
    the estimate is returned even when the decoder did not converge.
    """
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (basis.n,):
        raise ValueError(f"expected length {basis.n}, got shape {y.shape}")
    gamma = llr_gain * llr_from_observation(y, sigma2)
    if known is not None:
        known = np.asarray(known, dtype=bool)
        gamma[known] = kernels.MESSAGE_CLIP
    bits, converged, _ = spa_decode(basis.H, gamma, max_iter)
    c = 2.0 * bits - 1.0
    X = (c + 4.0 * rnd((y - c) / 4.0)).astype(np.int64)
    if known is not None:
        X[known] = -1
    return X, converged


def write_words(path, words) -> None:
    words = np.atleast_2d(np.asarray(words, dtype=np.int64))
    with open(path, "w") as fh:
        for w in words:
            fh.write(" ".join(str(int(v)) for v in w) + "\n")


def read_words(path) -> np.ndarray:
    with open(path) as fh:
        rows = [[int(t) for t in line.split()] for line in fh if line.strip()]
    return np.array(rows, dtype=np.int64)
