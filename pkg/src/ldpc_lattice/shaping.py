"""Power shaping of lattice codewords, rates, and shaping-gain metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammaln

from . import kernels
from .ldpc_core import int_matmul
from .lattice import LatticeBasis, encode, unshape_info

HYPERCUBE = "hypercube"
NESTED = "nested"
METHODS = (HYPERCUBE, NESTED)


class ConstellationError(ValueError):
    """Information vector outside the method's constellation."""


@dataclass(frozen=True)
class ShapingSpec:
    """Per-coordinate constellation sizes and the shaping method.

    ``M`` is the tree-search width for nested shaping; ``None`` means an
    exhaustive search (only sensible for very short codes).
    """

    L: np.ndarray
    method: str = HYPERCUBE
    M: Optional[int] = 5

    def __post_init__(self):
        L = np.ascontiguousarray(self.L, dtype=np.int64).reshape(-1)
        if L.size == 0 or np.any(L < 2) or np.any(L % 2):
            raise ValueError("constellation sizes must be even and >= 2")
        L.setflags(write=False)
        object.__setattr__(self, "L", L)
        if self.method not in METHODS:
            raise ValueError(f"unknown shaping method {self.method!r}")
        if self.M is not None and int(self.M) < 1:
            raise ValueError("M must be >= 1")

    @classmethod
    def uniform(cls, n: int, L: int, method: str = HYPERCUBE, M: Optional[int] = 5):
        return cls(np.full(n, L, dtype=np.int64), method, M)

    @classmethod
    def split(cls, k: int, n: int, L_info: int, L_parity: int, method: str = HYPERCUBE,
              M: Optional[int] = 5):
        """``L_info`` on the first ``k`` coordinates, ``L_parity`` on the rest."""
        L = np.concatenate([np.full(k, L_info), np.full(n - k, L_parity)]).astype(np.int64)
        return cls(L, method, M)

    @property
    def n(self) -> int:
        return int(self.L.size)

    def low(self) -> np.ndarray:
        return -self.L // 2 if self.method == HYPERCUBE else np.zeros_like(self.L)

    def sample(self, rng: np.random.Generator, size=None) -> np.ndarray:
        """Uniform draws from the method's constellation."""
        shape = (self.n,) if size is None else (size, self.n)
        return self.low() + rng.integers(0, self.L, size=shape)

    def contains(self, b) -> bool:
        b = np.asarray(b)
        lo = self.low()
        return bool(np.all((b >= lo) & (b < lo + self.L)))


@dataclass(frozen=True)
class ShapedWord:
    X: np.ndarray        # shaped lattice word, all-odd coordinates
    s: np.ndarray        # translation multiples
    b_prime: np.ndarray  # b - s*L

    @property
    def prescale(self) -> np.ndarray:
        return (self.X + 1) // 2


@dataclass(frozen=True)
class ShapingStats:
    P_R: float
    G_R: float
    gain_db: float
    loss_db: float  # nan when n is odd
    samples: int


def _check_domain(basis: LatticeBasis, b, spec: ShapingSpec) -> np.ndarray:
    b = np.asarray(b, dtype=np.int64)
    if spec.n != basis.n or b.shape[-1] != basis.n:
        raise ValueError("dimension mismatch between basis, spec and b")
    if not spec.contains(b):
        raise ConstellationError(f"information outside the {spec.method} constellation")
    return b


def _finish(basis, b, s, spec) -> ShapedWord:
    b_prime = b - s * spec.L
    return ShapedWord(encode(basis, b_prime), s, b_prime)


def hypercube_translation(basis: LatticeBasis, b, L) -> np.ndarray:
    """Closed-form shifts: zero on information rows, rounded on parity rows."""
    b = np.asarray(b, dtype=np.int64)
    L = np.asarray(L, dtype=np.int64)
    k = basis.k
    p = int_matmul(b[..., :k], basis.P)
    s = np.zeros_like(b)
    Lp = L[k:]
    # round((b_i + p_i/2) / L_i) in exact integer arithmetic
    s[..., k:] = np.floor_divide(2 * b[..., k:] + p + Lp, 2 * Lp)
    return s


def hypercube_shape(basis: LatticeBasis, b, spec: ShapingSpec) -> ShapedWord:
    b = _check_domain(basis, b, spec)
    return _finish(basis, b, hypercube_translation(basis, b, spec.L), spec)


def nested_translation(basis: LatticeBasis, b, L, M: Optional[int]) -> np.ndarray:
    b = np.asarray(b, dtype=np.int64)
    width = 2 ** min(basis.n, 24) if M is None else int(M)
    s = kernels.m_search(b.reshape(-1, basis.n), L, basis.P, basis.k, width)
    return s.reshape(b.shape)


def nested_shape(basis: LatticeBasis, b, spec: ShapingSpec) -> ShapedWord:
    b = _check_domain(basis, b, spec)
    return _finish(basis, b, nested_translation(basis, b, spec.L, spec.M), spec)


def shape(basis: LatticeBasis, b, spec: ShapingSpec) -> ShapedWord:
    fn = hypercube_shape if spec.method == HYPERCUBE else nested_shape
    return fn(basis, b, spec)


def centered_mod(x, L):
    """Residue of ``x`` modulo ``L`` in ``[-L/2, L/2)``."""
    x = np.asarray(x, dtype=np.int64)
    L = np.asarray(L, dtype=np.int64)
    return np.mod(x + L // 2, L) - L // 2


def mod_recover(basis: LatticeBasis, X, spec: ShapingSpec) -> np.ndarray:
    """Original information from a shaped word."""
    b_prime = unshape_info(basis, X)
    if spec.method == HYPERCUBE:
        return centered_mod(b_prime, spec.L)
    return np.mod(b_prime, spec.L)


def _as_L(spec_or_L, n: Optional[int]) -> np.ndarray:
    L = spec_or_L.L if isinstance(spec_or_L, ShapingSpec) else np.asarray(spec_or_L, dtype=np.int64)
    if L.ndim == 0:
        if n is None:
            raise ValueError("n is required with a scalar L")
        L = np.full(n, int(L))
    return L


def rate_hypercube(spec_or_L, k: int, n: int) -> float:
    L = _as_L(spec_or_L, n).astype(np.float64)
    return float((np.log2(L[:k]).sum() + np.log2((4 * L[k:] + 2) / 4).sum()) / n)


def rate_nested(spec_or_L, n: Optional[int] = None) -> float:
    L = _as_L(spec_or_L, n).astype(np.float64)
    return float(np.log2(L).sum() / L.size)


def vnr(basis_or_volume, sigma2: float, n: Optional[int] = None) -> float:
    """Volume-to-noise ratio ``vol^{2/n} / (2 pi e sigma2)``."""
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    if isinstance(basis_or_volume, LatticeBasis):
        log2_vol, n = float(basis_or_volume.n - basis_or_volume.k), basis_or_volume.n
    else:
        if n is None:
            raise ValueError("n is required with a raw volume")
        log2_vol = math.log2(basis_or_volume)
    return 2.0 ** (2.0 * log2_vol / n) / (2.0 * math.pi * math.e * sigma2)


def second_moment_estimate(errors) -> float:
    """Per-dimension second moment ``E||e||^2 / n`` from sampled error vectors."""
    e = np.atleast_2d(np.asarray(errors, dtype=np.float64))
    return float(np.mean(np.sum(e * e, axis=1)) / e.shape[1])


def sphere_nsm(n: int) -> float:
    """Normalized second moment of an n-ball (n even)."""
    return math.exp((2.0 / n) * gammaln(n / 2 + 1)) / (math.pi * (n + 2))


def shaping_gain_db(P: float, log2_vol: float, n: int) -> float:
    return 10.0 * math.log10(2.0 ** (2.0 * log2_vol / n) / (12.0 * P))


def shaping_loss_db(P: float, log2_vol: float, n: int) -> float:
    if n % 2:
        return float("nan")
    G = P / 2.0 ** (2.0 * log2_vol / n)
    return 10.0 * math.log10(G / sphere_nsm(n))


def region_log2_volume(basis: LatticeBasis, spec: ShapingSpec) -> float:
    """log2 volume of the region occupied by the shaped words.

    Every information vector yields a distinct word, and the shaped words are
    points of a translate of the scaled lattice ``2*Lambda`` (volume
    ``2^n * 2^(n-k)``); the region volume is their product.
    """
    return float(np.log2(spec.L.astype(np.float64)).sum()) + basis.n + (basis.n - basis.k)


def estimate_shaping_stats(basis: LatticeBasis, spec: ShapingSpec, samples: int = 10_000,
                           seed: int = 0, batch: int = 2_000) -> ShapingStats:
    """Monte-Carlo energy of shaped words for uniform information vectors."""
    if samples < 1:
        raise ValueError("samples must be positive")
    rng = np.random.default_rng(seed)
    total = 0.0
    done = 0
    while done < samples:
        size = min(batch, samples - done)
        X = shape(basis, spec.sample(rng, size), spec).X.astype(np.float64)
        total += float(np.sum(X * X))
        done += size
    n = basis.n
    P = total / (samples * n)
    log2_vol = region_log2_volume(basis, spec)
    G = P / 2.0 ** (2.0 * log2_vol / n)
    return ShapingStats(P, G, shaping_gain_db(P, log2_vol, n), shaping_loss_db(P, log2_vol, n),
                        samples)
