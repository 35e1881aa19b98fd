"""Frozen reference numbers and brute-force oracles shared by the tests."""

from __future__ import annotations

import itertools

import numpy as np

from ldpc_lattice.ldpc_core import BinaryParityCheck
from ldpc_lattice.lattice import LatticeBasis, encode, is_member

# Published shaping gains, L = 4: (n, k) -> (hypercube dB, nested dB)
REFERENCE_GAINS = {
    (100, 70): (-1.3065, -1.0162),
    (100, 80): (-1.4842, -0.7846),
    (100, 90): (-1.6665, -0.3717),
    (200, 100): (-0.9291, -0.8750),
    (200, 120): (-1.1124, -0.8926),
    (200, 140): (-1.2968, -0.8395),
    (200, 160): (-1.4798, -0.6593),
    (200, 180): (-1.6621, -0.3203),
    (200, 190): (-1.7565, -0.0633),
}
REFERENCE_GAINS_SEED = 1  # code seed used for every row

RATE_HYPERCUBE_1000_850_L8 = 3.01
RATE_NESTED_1000_850_L8_4 = 2.85
MIN_SUM_POWER_DB_R301 = 17.15
MIN_SUM_POWER_DB_R285 = 16.15
CLOSED_FORM_EX_S2_L8 = 184300 / 6000  # about 30.717
CLOSED_FORM_EX_S2_L2_KN = 22 / 6


def tiny_basis() -> LatticeBasis:
    """n=2, k=1, P=[1] from H = [1 1]."""
    return LatticeBasis.from_parity_check(BinaryParityCheck.from_dense([[1, 1]]))


def small_basis(n=6) -> LatticeBasis:
    """Hand-made code whose P has linearly independent columns."""
    if n == 8:
        H = [[1, 1, 0, 1, 1, 0, 0, 0],
             [0, 1, 1, 1, 0, 1, 0, 0],
             [1, 0, 1, 1, 0, 0, 1, 0]]
    elif n == 6:
        H = [[1, 1, 0, 1, 0, 0],
             [0, 1, 1, 0, 1, 0],
             [0, 0, 1, 0, 0, 1]]
    elif n == 5:
        H = [[1, 1, 0, 1, 0],
             [0, 1, 1, 0, 1]]
    elif n == 4:
        H = [[1, 1, 1, 0],
             [0, 1, 1, 1]]
    else:
        raise ValueError(n)
    return LatticeBasis.from_parity_check(BinaryParityCheck.from_dense(H))


def energy(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    return np.sum(X * X, axis=-1)


def brute_force_nested(basis: LatticeBasis, b, L, span=2):
    """Minimum pre-scale energy ``||(b - sL) G||^2`` and all minimising shifts.

    Shifts range over ``[-span, span]^n``.
    """
    b = np.asarray(b, dtype=np.int64)
    L = np.asarray(L, dtype=np.int64)
    best, arg = None, []
    for s in itertools.product(range(-span, span + 1), repeat=basis.n):
        s = np.array(s, dtype=np.int64)
        e = float(energy(basis.times_g(b - s * L)))
        if best is None or e < best - 1e-9:
            best, arg = e, [s]
        elif abs(e - best) <= 1e-9:
            arg.append(s)
    return best, arg


def count_box_points(basis: LatticeBasis, L) -> int:
    """Lattice words whose pre-scale coordinates lie in the hypercube region.

    Information coordinates range over ``[-L/2, L/2)`` and parity coordinates
    over ``[-L, L]``; membership is checked word by word.
    """
    L = np.asarray(L, dtype=np.int64)
    k = basis.k
    ranges = [range(-int(l) // 2, int(l) // 2) for l in L[:k]]
    ranges += [range(-int(l), int(l) + 1) for l in L[k:]]
    pts = np.array(list(itertools.product(*ranges)), dtype=np.int64)
    return int(np.sum(is_member(basis, 2 * pts - 1)))
