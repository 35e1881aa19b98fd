"""Resolution/vestigial splits of information vectors for relay coding."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import LatticeBasis
from .shaping import HYPERCUBE, NESTED, ShapingSpec, _check_domain, centered_mod, \
    hypercube_translation, nested_translation


@dataclass(frozen=True)
class OneWayPlan:
    """Coordinates forwarded by the relay (0-based indices)."""

    X_set: np.ndarray
    n: int
    rho: float = 0.5

    def __post_init__(self):
        xs = np.unique(np.asarray(self.X_set, dtype=np.int64))
        if xs.size and (xs[0] < 0 or xs[-1] >= self.n):
            raise ValueError("X_set indices out of range")
        xs.setflags(write=False)
        object.__setattr__(self, "X_set", xs)

    @classmethod
    def random(cls, n: int, rho: float = 0.5, seed: int = 0) -> "OneWayPlan":
        if not 0.0 <= rho <= 1.0:
            raise ValueError("rho must lie in [0, 1]")
        size = math.ceil(rho * n)
        rng = np.random.default_rng(seed)
        return cls(np.sort(rng.choice(n, size=size, replace=False)), n, rho)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.n, dtype=bool)
        m[self.X_set] = True
        return m


@dataclass(frozen=True)
class TwoWayPlan:
    L_r: np.ndarray
    beta: np.ndarray
    m1: int = 1
    m2: int = 1

    def __post_init__(self):
        L_r = np.asarray(self.L_r, dtype=np.int64).reshape(-1)
        beta = np.asarray(self.beta, dtype=np.int64).reshape(-1)
        if L_r.shape != beta.shape or np.any(L_r < 1) or np.any(beta < 1):
            raise ValueError("L_r and beta must be positive and of equal length")
        for m in (self.m1, self.m2):
            if np.any(np.gcd(L_r, int(m)) != 1):
                raise ValueError(f"gain {m} is not coprime to every L_r")
        object.__setattr__(self, "L_r", L_r)
        object.__setattr__(self, "beta", beta)

    @classmethod
    def for_spec(cls, spec: ShapingSpec, L_r, m1: int = 1, m2: int = 1) -> "TwoWayPlan":
        L_r = np.broadcast_to(np.asarray(L_r, dtype=np.int64), spec.L.shape).copy()
        if np.any(spec.L % L_r):
            raise ValueError("every L_i must be a multiple of L_r_i")
        return cls(L_r, spec.L // L_r, m1, m2)

    @property
    def L(self) -> np.ndarray:
        return self.L_r * self.beta


def split_oneway(b, plan: OneWayPlan):
    b = np.asarray(b, dtype=np.int64)
    mask = plan.mask()
    b_r = np.where(mask, b, 0)
    return b_r, b - b_r


def _translation(basis, b, spec: ShapingSpec, L):
    if spec.method == HYPERCUBE:
        return hypercube_translation(basis, b, L)
    return nested_translation(basis, b, L, spec.M)


def pc_decompose_oneway(basis: LatticeBasis, b, spec: ShapingSpec, plan: OneWayPlan):
    """Shaped full word and its shaped resolution part.

    Returns ``(b', b'_r, b'_v)`` with ``b'_v = b' - b'_r``. The resolution
    part is shaped by the same rule as the full word; on information rows
    the shift is zero for hypercube shaping.
    """
    b = _check_domain(basis, b, spec)
    b_r, _ = split_oneway(b, plan)
    L = spec.L
    b_p = b - _translation(basis, b, spec, L) * L
    b_rp = b_r - _translation(basis, b_r, spec, L) * L
    return b_p, b_rp, b_p - b_rp


def smod(x, L):
    """Centered residue in ``[-L/2, L/2)``."""
    return centered_mod(x, L)


def smod2mod(x, L):
    """Map a centered residue to ``[0, L)``."""
    x = np.asarray(x, dtype=np.int64)
    return np.where(x < 0, x + np.asarray(L, dtype=np.int64), x)


def split_twoway(b, plan: TwoWayPlan):
    b = np.asarray(b, dtype=np.int64)
    b_r = np.mod(b, plan.L_r)
    return b_r, b - b_r


def shape_resolution(basis: LatticeBasis, values, spec: ShapingSpec, L_r) -> np.ndarray:
    """Shaped word's information ``b'`` for a residue vector modulo ``L_r``.

    Hypercube shaping works on the centered residue; nested shaping on the
    plain one.
    """
    L_r = np.broadcast_to(np.asarray(L_r, dtype=np.int64), (basis.n,))
    if spec.method == HYPERCUBE:
        c = smod(values, L_r)
        return c - hypercube_translation(basis, c, L_r) * L_r
    c = np.mod(values, L_r)
    return c - nested_translation(basis, c, L_r, spec.M) * L_r


def pc_decompose_twoway(basis: LatticeBasis, b, spec: ShapingSpec, plan: TwoWayPlan):
    """Returns ``(b', b'^(r), b'^(v))``.

    ``b'`` is the shaped source word, ``b'^(r)`` the shaped resolution word
    over the smaller constellation and ``b'^(v) = b' - b^(r)``; the lattice
    words satisfy ``E(b') = E(b^(r)) (+) E(b'^(v))``.
    """
    b = _check_domain(basis, b, spec)
    if plan.L_r.size != basis.n or np.any(plan.L != spec.L):
        raise ValueError("plan does not match the shaping spec")
    b_p = b - _translation(basis, b, spec, spec.L) * spec.L
    b_r, _ = split_twoway(b, plan)
    b_rp = shape_resolution(basis, b_r, spec, plan.L_r)
    return b_p, b_rp, b_p - b_r


def recover_delta(v, m: int, L_r) -> np.ndarray:
    """The unique ``b`` in ``[0, L_r)`` with ``m*b = v (mod L_r)``."""
    L_r = np.asarray(L_r, dtype=np.int64)
    if np.any(np.gcd(L_r, int(m)) != 1):
        raise ValueError(f"{m} is not invertible modulo {L_r}")
    inv = np.vectorize(lambda q: pow(int(m), -1, int(q)) if q > 1 else 0)(L_r)
    return np.mod(np.asarray(v, dtype=np.int64) * inv, L_r)


__all__ = [
    "OneWayPlan", "TwoWayPlan", "split_oneway", "pc_decompose_oneway", "smod", "smod2mod",
    "split_twoway", "shape_resolution", "pc_decompose_twoway", "recover_delta", "NESTED",
]
