"""Block-Markov decode-and-forward over full-duplex Gaussian relay channels.

Two topologies are simulated: a one-way relay channel (source, relay,
destination) and a two-way relay channel (two sources exchanging messages
through a relay). Each trial transmits ``T`` fresh blocks over ``T + 1``
channel uses; the relay is silent in the first block and the source(s) in
the last.

Sweeps are parameterised by the sum transmit energy
``P_S E{x_S^2} + P_R E{x_R^2}``; a fixed share of it goes to the relay.
Per-trial random streams come from ``SeedSequence([seed, point, trial])``,
and trials are processed in fixed-size chunks, so results do not depend on
the number of worker processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from .decomposition import (
    OneWayPlan,
    TwoWayPlan,
    pc_decompose_oneway,
    recover_delta,
    shape_resolution,
    smod,
    smod2mod,
)
from .lattice import EXACT_LLR_GAIN, LatticeBasis, decode, encode, unshape_info
from .ldpc_core import DEFAULT_MAX_ITER
from .shaping import HYPERCUBE, ShapingSpec, mod_recover, shape

ONE_WAY = "one_way"
TWO_WAY = "two_way"
SIGMA2_FLOOR = 1e-12


class ConfigError(ValueError):
    """Inconsistent channel or simulation configuration."""


@dataclass(frozen=True)
class ChannelConfig:
    """Geometry, noise and powers of either topology (linear units)."""

    topology: str = ONE_WAY
    # one-way links
    d_SR: float = 0.9
    d_RD: float = 0.1
    d_SD: float = 1.0
    alpha_SR: float = 1.0
    alpha_RD: float = 2.0
    alpha_SD: float = 1.0
    N_R: float = 1.0
    N_D: float = 1.0
    P_S: float = 1.0
    P_R: float = 1.0
    # two-way links (reciprocal)
    d_S1R: float = 0.5
    d_S2R: float = 0.5
    d_S1S2: float = 1.0
    alpha_S1R: float = 1.0
    alpha_S2R: float = 5.0
    alpha_S1S2: float = 1.0
    N_S1: float = 1.0
    N_S2: float = 1.0
    P_S1: float = 1.0
    m1: int = 1
    m2: int = 1
    T: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.topology not in (ONE_WAY, TWO_WAY):
            raise ConfigError(f"unknown topology {self.topology!r}")
        names = ("d_SR", "d_RD", "d_SD") if self.topology == ONE_WAY else ("d_S1R", "d_S2R", "d_S1S2")
        for name in names:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        noises = ("N_R", "N_D") if self.topology == ONE_WAY else ("N_R", "N_S1", "N_S2")
        for name in noises:
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        for name in ("P_S", "P_R", "P_S1"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.T < 2:
            raise ConfigError("T must be at least 2")
        if self.m1 < 1 or self.m2 < 1:
            raise ConfigError("gains m1, m2 must be positive integers")

    @staticmethod
    def _gain(d, alpha):
        return float(d) ** (-float(alpha))

    @property
    def h_SR(self):
        return self._gain(self.d_SR, self.alpha_SR)

    @property
    def h_RD(self):
        return self._gain(self.d_RD, self.alpha_RD)

    @property
    def h_SD(self):
        return self._gain(self.d_SD, self.alpha_SD)

    @property
    def h_S1R(self):
        return self._gain(self.d_S1R, self.alpha_S1R)

    @property
    def h_S2R(self):
        return self._gain(self.d_S2R, self.alpha_S2R)

    @property
    def h_S1S2(self):
        return self._gain(self.d_S1S2, self.alpha_S1S2)

    @property
    def P_S2(self) -> float:
        """Power of the second source fixed by the alignment condition at the relay."""
        return self.P_S1 * (self.m2 * self.h_S1R / (self.m1 * self.h_S2R)) ** 2

    @property
    def rho(self) -> float:
        return math.sqrt(self.P_S1) * self.h_S1R / self.m1


@dataclass(frozen=True)
class PowerEstimate:
    Ex_S2: float
    Ex_R2: float


@dataclass(frozen=True)
class SerRecord:
    sum_power_db: float
    trials: int
    symbol_errors: int
    symbols: int
    stage_errors: tuple = (0, 0, 0)
    lattice_errors: int = 0  # wrong coordinates of the recombined lattice word

    @property
    def ser(self) -> float:
        return self.symbol_errors / self.symbols if self.symbols else float("nan")

    @property
    def lattice_ser(self) -> float:
        return self.lattice_errors / self.symbols if self.symbols else float("nan")


@dataclass(frozen=True)
class SimOptions:
    """Monte-Carlo controls.

    ``noise_model='exact'`` passes the true post-scaling variance
    ``N / (P h^2)`` to the decoder; ``'amplitude'`` passes ``N / (sqrt(P) h)``.
    ``energy_model='empirical'`` measures codeword energies by sampling;
    ``'closed_form'`` uses the closed forms of :func:`power_estimates_oneway`
    (one-way hypercube only). ``llr_model='exact'`` feeds the decoder
    nearest-point LLRs; ``'quarter'`` uses the quarter-scale form.
    """

    max_trials: int = 200
    min_trials: int = 1
    target_errors: Optional[int] = 200
    chunk: int = 4
    relay_share: Optional[float] = None
    noise_model: str = "exact"
    llr_model: str = "exact"
    interference_aware: bool = False
    energy_model: str = "empirical"
    energy_samples: int = 4000
    max_iter: int = DEFAULT_MAX_ITER
    workers: int = 1
    direction: str = "s2"  # two-way: "s2" (S2 decodes S1) or "both"

    @property
    def llr_gain(self) -> float:
        return EXACT_LLR_GAIN if self.llr_model == "exact" else 1.0

    def __post_init__(self):
        if self.noise_model not in ("exact", "amplitude"):
            raise ConfigError("noise_model must be 'exact' or 'amplitude'")
        if self.llr_model not in ("exact", "quarter"):
            raise ConfigError("llr_model must be 'exact' or 'quarter'")
        if self.energy_model not in ("empirical", "closed_form"):
            raise ConfigError("energy_model must be 'empirical' or 'closed_form'")
        if self.direction not in ("s2", "both"):
            raise ConfigError("direction must be 's2' or 'both'")
        if self.relay_share is not None and not 0.0 <= self.relay_share < 1.0:
            raise ConfigError("relay_share must lie in [0, 1)")
        if self.max_trials < 1 or self.chunk < 1 or self.workers < 1:
            raise ConfigError("max_trials, chunk and workers must be positive")


DEFAULT_RELAY_SHARE = {ONE_WAY: 0.05, TWO_WAY: 0.5}


def awgn(x, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if sigma2 == 0:
        return x.copy()
    return x + math.sqrt(sigma2) * rng.standard_normal(x.shape)


# ---------------------------------------------------------------- energies

def power_estimates_oneway(L: int, n: int, k: int, x_frac: float = 0.5) -> PowerEstimate:
    """Closed-form energy estimates for hypercube shaping with uniform ``L``.

    This closed-form approximation undercounts the energy
    of the information coordinates; see :func:`exact_energy_hypercube`.
    """
    L = float(L)
    ex_s = (k * (L ** 2 + (L - 2) ** 2 + 18) + 8 * (n - k) * (L ** 2 + 6)) / (6 * n)
    ic_x = x_frac * k
    ic_xc = k - ic_x
    ex_r = (ic_x * ((L ** 2 + (L - 2) ** 2) / 6 + 3) / n
            + (n - k) * (4 * L ** 2 + 1) / (3 * n) + ic_xc / n)
    return PowerEstimate(ex_s, ex_r)


def exact_energy_hypercube(L: int, n: int, k: int) -> float:
    """Mean ``X'^2`` per dimension for uniform ``b`` and uniform parity residues."""
    L = float(L)
    return (k * (L ** 2 + 11) / 3 + (n - k) * (4 * L ** 2 + 11) / 3) / n


def _mean_energy(X) -> float:
    X = np.asarray(X, dtype=np.float64)
    return float(np.mean(X * X))


def measure_energies_oneway(basis: LatticeBasis, spec: ShapingSpec, plan: OneWayPlan,
                            samples: int = 4000, seed: int = 0) -> PowerEstimate:
    rng = np.random.default_rng(seed)
    b = spec.sample(rng, samples)
    bp, brp, _ = pc_decompose_oneway(basis, b, spec, plan)
    return PowerEstimate(_mean_energy(encode(basis, bp)), _mean_energy(encode(basis, brp)))


def measure_energies_twoway(basis: LatticeBasis, spec: ShapingSpec, plan: TwoWayPlan,
                            samples: int = 4000, seed: int = 0) -> PowerEstimate:
    rng = np.random.default_rng(seed)
    b1, b2 = spec.sample(rng, samples), spec.sample(rng, samples)
    X1, X2 = shape(basis, b1, spec), shape(basis, b2, spec)
    total = plan.m1 * X1.b_prime + plan.m2 * X2.b_prime
    XR = encode(basis, shape_resolution(basis, total, spec, plan.L_r))
    return PowerEstimate(0.5 * (_mean_energy(X1.X) + _mean_energy(X2.X)), _mean_energy(XR))


# ------------------------------------------------------------------ bounds

def df_bound_oneway(cfg: ChannelConfig, Ex_S2: float, Ex_R2: float) -> float:
    """Decode-and-forward rate (bits per dimension) at the configured powers."""
    qs, qr = cfg.P_S * Ex_S2, cfg.P_R * Ex_R2
    relay = math.log2(1 + cfg.h_SR ** 2 * qs / cfg.N_R) if cfg.N_R > 0 else math.inf
    dest = (math.log2(1 + (cfg.h_SD ** 2 * qs + cfg.h_RD ** 2 * qr) / cfg.N_D)
            if cfg.N_D > 0 else math.inf)
    return 0.5 * min(relay, dest)


def min_sum_power_oneway(cfg: ChannelConfig, rate: float) -> float:
    """Smallest ``P_S E{x_S^2} + P_R E{x_R^2}`` (linear) supporting ``rate``."""
    K = 2.0 ** (2.0 * rate) - 1.0
    qs = K * cfg.N_R / cfg.h_SR ** 2
    if cfg.h_RD > cfg.h_SD:
        qr = max(0.0, (K * cfg.N_D - cfg.h_SD ** 2 * qs) / cfg.h_RD ** 2)
    else:
        qs = max(qs, K * cfg.N_D / cfg.h_SD ** 2)
        qr = 0.0
    return qs + qr


def df_bound_twoway(cfg: ChannelConfig, energies: PowerEstimate,
                    Ex_S2_second: Optional[float] = None):
    """Rate pair ``(R1, R2)`` at the configured powers."""
    e1 = energies.Ex_S2
    e2 = energies.Ex_S2 if Ex_S2_second is None else Ex_S2_second
    g1 = cfg.h_S1R ** 2 * cfg.P_S1 * e1
    g2 = cfg.h_S2R ** 2 * cfg.P_S2 * e2
    qr = cfg.P_R * energies.Ex_R2

    def one(gi, gj, direct, N_dst):
        if gi <= 0:
            return 0.0
        a = 0.5 * math.log2(1 + direct / N_dst) if N_dst > 0 else math.inf
        inner = gi / (gi + gj) + (gi / cfg.N_R if cfg.N_R > 0 else math.inf)
        b = max(0.5 * math.log2(inner), 0.0)
        return min(a, b)

    # S1 -> S2 is received at S2, S2 -> S1 at S1; links are reciprocal
    r1 = one(g1, g2, cfg.h_S2R ** 2 * qr + cfg.h_S1S2 ** 2 * cfg.P_S1 * e1, cfg.N_S2)
    r2 = one(g2, g1, cfg.h_S1R ** 2 * qr + cfg.h_S1S2 ** 2 * cfg.P_S2 * e2, cfg.N_S1)
    return r1, r2


def min_sum_power_twoway(cfg: ChannelConfig, rate: float):
    """Smallest sum energy giving ``R1 = R2 = rate`` under the alignment condition.

    Both sources use the same constellation, so the alignment condition on
    powers carries over to ``q = P * E{x^2}``. Solved as a linear program in
    ``(q_s1, q_r)``; returns ``(total, q_s1, q_s2, q_r)``.
    """
    c2 = (cfg.m2 * cfg.h_S1R / (cfg.m1 * cfg.h_S2R)) ** 2  # q_s2 = c2 * q_s1
    K = 2.0 ** (2.0 * rate)
    h1q = cfg.h_S1R ** 2
    h2q = cfg.h_S2R ** 2 * c2
    # relay terms: the interference fraction is constant under alignment
    frac1 = h1q / (h1q + h2q)
    frac2 = h2q / (h1q + h2q)
    rows, rhs = [], []
    # variables (q_s1, q_r); q_s2 = c2 q_s1
    rows.append([-h1q / cfg.N_R, 0.0]); rhs.append(-(K - frac1))
    rows.append([-h2q / cfg.N_R, 0.0]); rhs.append(-(K - frac2))
    rows.append([-cfg.h_S1S2 ** 2 / cfg.N_S2, -cfg.h_S2R ** 2 / cfg.N_S2]); rhs.append(-(K - 1))
    rows.append([-cfg.h_S1S2 ** 2 * c2 / cfg.N_S1, -cfg.h_S1R ** 2 / cfg.N_S1]); rhs.append(-(K - 1))
    res = linprog([1.0 + c2, 1.0], A_ub=rows, b_ub=rhs, bounds=[(0, None), (0, None)],
                  method="highs")
    if not res.success:
        raise RuntimeError(f"bound LP failed: {res.message}")
    q1, qr = res.x
    return float(res.fun), float(q1), float(c2 * q1), float(qr)


def to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def from_db(x: float) -> float:
    return 10.0 ** (x / 10.0)


# -------------------------------------------------------------- simulation

@dataclass(frozen=True)
class _Context:
    basis: LatticeBasis
    spec: ShapingSpec
    plan: object
    cfg: ChannelConfig
    opts: SimOptions


def _sigma2(opts: SimOptions, N: float, P: float, h: float, interference: float = 0.0) -> float:
    if opts.noise_model == "exact":
        s2 = N / (P * h * h)
    else:
        s2 = N / (math.sqrt(P) * h)
    if opts.interference_aware:
        s2 += interference / (P * h * h)
    return max(s2, SIGMA2_FLOOR)


def _known_masks_oneway(basis: LatticeBasis, spec: ShapingSpec, plan: OneWayPlan):
    """Coordinates known to equal -1 in the resolution and vestigial words.

    Only hypercube shaping fixes the shift of information rows to zero, so
    nested shaping gets no side information.
    """
    if spec.method != HYPERCUBE:
        return None, None
    info = np.zeros(basis.n, dtype=bool)
    info[:basis.k] = True
    in_x = plan.mask()
    return info & ~in_x, info & in_x


def _oneway_trial(ctx: _Context, P_S: float, P_R: float, E: PowerEstimate, seq: np.random.SeedSequence):
    basis, spec, plan, cfg, opts = ctx.basis, ctx.spec, ctx.plan, ctx.cfg, ctx.opts
    src_rng, relay_rng, dest_rng = (np.random.default_rng(s) for s in seq.spawn(3))
    T, n = cfg.T, basis.n
    b = spec.sample(src_rng, T)
    bp, _, bvp = pc_decompose_oneway(basis, b, spec, plan)
    X = encode(basis, bp)
    aS, aR = math.sqrt(P_S), math.sqrt(P_R)
    stage = [0, 0, 0]

    if P_R == 0:
        errors = lat = 0
        s2 = _sigma2(opts, cfg.N_D, P_S, cfg.h_SD)
        for t in range(T):
            y = awgn(cfg.h_SD * aS * X[t], cfg.N_D, dest_rng)
            Xh, _ = decode(basis, y / (cfg.h_SD * aS), s2, max_iter=opts.max_iter,
                          llr_gain=opts.llr_gain)
            errors += int(np.sum(mod_recover(basis, Xh, spec) != b[t]))
            lat += int(np.sum(Xh != X[t]))
        return errors, T * n, (0, 0, errors), lat

    known_r, known_v = _known_masks_oneway(basis, spec, plan)
    in_x = plan.mask()

    # stage 1: relay decodes each block and re-encodes its resolution part
    s2_relay = _sigma2(opts, cfg.N_R, P_S, cfg.h_SR)
    relay_tx = np.empty((T, n), dtype=np.int64)
    for t in range(T):
        y = awgn(cfg.h_SR * aS * X[t], cfg.N_R, relay_rng)
        Xh, _ = decode(basis, y / (cfg.h_SR * aS), s2_relay, max_iter=opts.max_iter,
                          llr_gain=opts.llr_gain)
        bh = mod_recover(basis, Xh, spec)
        stage[0] += int(np.sum(bh != b[t]))
        _, brp_hat, _ = pc_decompose_oneway(basis, bh, spec, plan)
        relay_tx[t] = encode(basis, brp_hat)

    # destination receives T + 1 blocks
    yD = np.zeros((T + 1, n))
    yD[:T] += cfg.h_SD * aS * X
    yD[1:] += cfg.h_RD * aR * relay_tx
    yD = awgn(yD, cfg.N_D, dest_rng)

    # stage 2: resolution word of block t from block t + 1
    interf = cfg.h_SD ** 2 * P_S * E.Ex_S2
    s2_res = _sigma2(opts, cfg.N_D, P_R, cfg.h_RD, interf)
    Xr = np.empty((T, n), dtype=np.int64)
    for t in range(T):
        Xr[t], _ = decode(basis, yD[t + 1] / (cfg.h_RD * aR), s2_res, known=known_r,
                          max_iter=opts.max_iter,
                          llr_gain=opts.llr_gain)
        br_hat = mod_recover(basis, Xr[t], spec)
        stage[1] += int(np.sum(br_hat != np.where(in_x, b[t], 0)))

    # stage 3: strip resolution parts, decode vestigial word, recombine
    s2_v = _sigma2(opts, cfg.N_D, P_S, cfg.h_SD)
    errors = lat = 0
    for t in range(T):
        y = yD[t] - cfg.h_SD * aS * (Xr[t] + 1.0)
        if t > 0:
            y = y - cfg.h_RD * aR * Xr[t - 1]
        Xv, _ = decode(basis, y / (cfg.h_SD * aS), s2_v, known=known_v, max_iter=opts.max_iter,
                          llr_gain=opts.llr_gain)
        stage[2] += int(np.sum(unshape_info(basis, Xv) != bvp[t]))
        X_hat = Xv + Xr[t] + 1
        lat += int(np.sum(X_hat != X[t]))
        errors += int(np.sum(mod_recover(basis, X_hat, spec) != b[t]))
    return errors, T * n, tuple(stage), lat


def _reduce(values, L, method):
    return smod(values, L) if method == HYPERCUBE else np.mod(values, L)


def _twoway_receive(ctx: _Context, b_own, b_other, bp_other, X_other, XR_tx, P_other, P_R,
                    h_direct, h_relay, N, m_own, m_other, E: PowerEstimate, rng):
    """Decoding at one source of the other source's message.

    Returns ``(errors, stage2, stage3, lattice_errors)``.
    """
    basis, spec, plan, opts = ctx.basis, ctx.spec, ctx.plan, ctx.opts
    T, n = b_own.shape
    L, L_r = spec.L, plan.L_r
    ell = int(L_r[0])
    a_o, aR = math.sqrt(P_other), math.sqrt(P_R)
    y = np.zeros((T + 1, n))
    y[:T] += h_direct * a_o * X_other
    y[1:] += h_relay * aR * XR_tx
    y = awgn(y, N, rng)
    stage2 = stage3 = 0

    gamma = h_relay * aR
    interf = h_direct ** 2 * P_other * E.Ex_S2
    s2_res = _sigma2(opts, N, P_R, h_relay, interf)
    b_r_hat = np.empty((T, n), dtype=np.int64)
    XR_hat = np.empty((T, n), dtype=np.int64)
    for t in range(T):
        y2 = y[t + 1] - m_own * gamma * (encode(basis, b_own[t]) + 1.0)
        Xd, _ = decode(basis, y2 / gamma, s2_res, max_iter=opts.max_iter,
                          llr_gain=opts.llr_gain)
        bd = unshape_info(basis, Xd)
        b1 = _reduce(bd + m_own * b_own[t], L_r, spec.method)
        b2 = smod2mod(b1, L_r) if spec.method == HYPERCUBE else b1
        v = np.mod(b2 - m_own * b_own[t], L_r)
        b_r_hat[t] = recover_delta(v, m_other, L_r)
        XR_hat[t] = encode(basis, bd + m_own * b_own[t])
        stage2 += int(np.sum(b_r_hat[t] != np.mod(b_other[t], L_r)))

    hd = h_direct * a_o
    s2_v = max(_sigma2(opts, N, P_other, h_direct) / ell ** 2, SIGMA2_FLOOR)
    errors = lat = 0
    for t in range(T):
        y3 = y[t] - hd * (encode(basis, b_r_hat[t]) + 1.0)
        if t > 0:
            y3 = y3 - gamma * XR_hat[t - 1]
        w = (y3 / hd + 1.0) / ell - 1.0
        Xv, _ = decode(basis, w, s2_v, max_iter=opts.max_iter,
                          llr_gain=opts.llr_gain)
        bv_hat = ell * unshape_info(basis, Xv)
        stage3 += int(np.sum(bv_hat != bp_other[t] - np.mod(b_other[t], L_r)))
        lat += int(np.sum(encode(basis, b_r_hat[t] + bv_hat) != X_other[t]))
        b_hat = _reduce(b_r_hat[t] + bv_hat, L, spec.method)
        errors += int(np.sum(b_hat != b_other[t]))
    return errors, stage2, stage3, lat


def _twoway_trial(ctx: _Context, P_S1: float, P_R: float, E: PowerEstimate, seq: np.random.SeedSequence):
    basis, spec, plan, cfg, opts = ctx.basis, ctx.spec, ctx.plan, ctx.cfg, ctx.opts
    rngs = [np.random.default_rng(s) for s in seq.spawn(5)]
    T, n = cfg.T, basis.n
    m1, m2 = plan.m1, plan.m2
    P_S2 = P_S1 * (m2 * cfg.h_S1R / (m1 * cfg.h_S2R)) ** 2
    rho = math.sqrt(P_S1) * cfg.h_S1R / m1

    b1, b2 = spec.sample(rngs[0], T), spec.sample(rngs[1], T)
    w1, w2 = shape(basis, b1, spec), shape(basis, b2, spec)
    X1, X2 = w1.X, w2.X

    # stage 1: the relay decodes the integer combination of both words
    s2_relay = _sigma2(opts, cfg.N_R, rho * rho, 1.0)
    XR_tx = np.empty((T, n), dtype=np.int64)
    relay_err = 0
    for t in range(T):
        yR = awgn(rho * (m1 * X1[t] + m2 * X2[t]), cfg.N_R, rngs[2])
        yR = yR - rho * (1 - m1 - m2)
        Xh, _ = decode(basis, yR / rho, s2_relay, max_iter=opts.max_iter,
                          llr_gain=opts.llr_gain)
        total = unshape_info(basis, Xh)
        relay_err += int(np.sum(total != m1 * w1.b_prime[t] + m2 * w2.b_prime[t]))
        XR_tx[t] = encode(basis, shape_resolution(basis, total, spec, plan.L_r))

    errors, st2, st3, lat = _twoway_receive(ctx, b2, b1, w1.b_prime, X1, XR_tx, P_S1, P_R,
                                       cfg.h_S1S2, cfg.h_S2R, cfg.N_S2, m2, m1, E, rngs[3])
    symbols = T * n
    if opts.direction == "both":
        e2, s2_, s3_, l2 = _twoway_receive(ctx, b1, b2, w2.b_prime, X2, XR_tx, P_S2, P_R,
                                           cfg.h_S1S2, cfg.h_S1R, cfg.N_S1, m1, m2, E, rngs[4])
        errors, st2, st3, symbols = errors + e2, st2 + s2_, st3 + s3_, 2 * symbols
        lat += l2
    return errors, symbols, (relay_err, st2, st3), lat


def _run_chunk(args):
    ctx, kind, point, first, count, p_a, p_r, E = args
    fn = _oneway_trial if kind == ONE_WAY else _twoway_trial
    errors = symbols = lat = 0
    stage = np.zeros(3, dtype=np.int64)
    for trial in range(first, first + count):
        seq = np.random.SeedSequence([ctx.cfg.seed, point, trial])
        e, s, st, la = fn(ctx, p_a, p_r, E, seq)
        errors += e
        symbols += s
        lat += la
        stage += np.asarray(st)
    return errors, symbols, tuple(int(v) for v in stage), lat


def _sweep(ctx: _Context, kind: str, points, E: PowerEstimate, pool):
    opts = ctx.opts
    records = []
    for point, (sum_db, p_a, p_r) in enumerate(points):
        errors = symbols = trials = lat = 0
        stage = np.zeros(3, dtype=np.int64)
        while trials < opts.max_trials:
            # a fixed batch of chunks per round keeps stopping independent of workers
            batch = []
            start = trials
            for _ in range(max(1, opts.workers)):
                if start >= opts.max_trials:
                    break
                count = min(opts.chunk, opts.max_trials - start)
                batch.append((ctx, kind, point, start, count, p_a, p_r, E))
                start += count
            results = list(pool.map(_run_chunk, batch)) if pool else [_run_chunk(a) for a in batch]
            for (e, s, st, la), a in zip(results, batch):
                errors += e
                symbols += s
                lat += la
                stage += np.asarray(st)
                trials += a[4]
                if (opts.target_errors is not None and trials >= opts.min_trials
                        and errors >= opts.target_errors):
                    break
            if (opts.target_errors is not None and trials >= opts.min_trials
                    and errors >= opts.target_errors):
                break
        records.append(SerRecord(sum_db, trials, errors, symbols, tuple(int(v) for v in stage),
                                 lat))
    return records


def _pool(opts: SimOptions):
    return ProcessPoolExecutor(max_workers=opts.workers) if opts.workers > 1 else None


def _energies_oneway(basis, spec, plan, opts, cfg) -> PowerEstimate:
    if opts.energy_model == "closed_form":
        if spec.method != HYPERCUBE or len(set(spec.L.tolist())) != 1:
            raise ConfigError("closed-form energies need hypercube shaping with uniform L")
        frac = float(np.mean(plan.mask()[:basis.k]))
        return power_estimates_oneway(int(spec.L[0]), basis.n, basis.k, frac)
    return measure_energies_oneway(basis, spec, plan, opts.energy_samples, cfg.seed)


def _share(opts: SimOptions, topology: str) -> float:
    return DEFAULT_RELAY_SHARE[topology] if opts.relay_share is None else opts.relay_share


def _check_oneway(basis, spec, plan, cfg):
    if cfg.topology != ONE_WAY:
        raise ConfigError("configuration is not one-way")
    if spec.n != basis.n or plan.n != basis.n:
        raise ConfigError("basis, spec and plan dimensions differ")


def oneway_powers(cfg: ChannelConfig, E: PowerEstimate, sum_power_db: float, share: float):
    total = from_db(sum_power_db)
    return (1 - share) * total / E.Ex_S2, share * total / E.Ex_R2


def twoway_powers(cfg: ChannelConfig, E: PowerEstimate, sum_power_db: float, share: float):
    total = from_db(sum_power_db)
    c2 = (cfg.m2 * cfg.h_S1R / (cfg.m1 * cfg.h_S2R)) ** 2
    q_sources = (1 - share) * total
    return q_sources / ((1 + c2) * E.Ex_S2), share * total / E.Ex_R2


def simulate_oneway(basis: LatticeBasis, spec: ShapingSpec, plan: OneWayPlan, cfg: ChannelConfig,
                    sum_power_db: Optional[Sequence[float]] = None,
                    opts: SimOptions = SimOptions()):
    """SER of the one-way scheme; one record per sum-power point.

    With ``sum_power_db=None`` a single point at the configured ``P_S`` and
    ``P_R`` is simulated.
    """
    _check_oneway(basis, spec, plan, cfg)
    E = _energies_oneway(basis, spec, plan, opts, cfg)
    if sum_power_db is None:
        points = [(to_db(cfg.P_S * E.Ex_S2 + cfg.P_R * E.Ex_R2), cfg.P_S, cfg.P_R)]
    else:
        share = _share(opts, ONE_WAY)
        points = [(float(p), *oneway_powers(cfg, E, p, share)) for p in sum_power_db]
    ctx = _Context(basis, spec, plan, cfg, opts)
    pool = _pool(opts)
    try:
        return _sweep(ctx, ONE_WAY, points, E, pool)
    finally:
        if pool:
            pool.shutdown()


def simulate_twoway(basis: LatticeBasis, spec: ShapingSpec, plan: TwoWayPlan, cfg: ChannelConfig,
                    sum_power_db: Optional[Sequence[float]] = None,
                    opts: SimOptions = SimOptions()):
    """SER at S2 of S1's message (or both directions); one record per point.

    The second source's power follows from the alignment condition at the
    relay. The vestigial decode needs a uniform resolution size.
    """
    if cfg.topology != TWO_WAY:
        raise ConfigError("configuration is not two-way")
    if spec.n != basis.n or plan.L_r.size != basis.n or np.any(plan.L != spec.L):
        raise ConfigError("basis, spec and plan dimensions differ")
    if np.unique(plan.L_r).size != 1:
        raise ConfigError("the two-way decoder needs the same L_r on every coordinate")
    if (plan.m1, plan.m2) != (cfg.m1, cfg.m2):
        raise ConfigError("plan and channel gains m1, m2 differ")
    if opts.energy_model != "empirical":
        raise ConfigError("two-way energies are measured, not closed-form")
    E = measure_energies_twoway(basis, spec, plan, opts.energy_samples, cfg.seed)
    c2 = (cfg.m2 * cfg.h_S1R / (cfg.m1 * cfg.h_S2R)) ** 2
    if sum_power_db is None:
        total = cfg.P_S1 * (1 + c2) * E.Ex_S2 + cfg.P_R * E.Ex_R2
        points = [(to_db(total), cfg.P_S1, cfg.P_R)]
    else:
        share = _share(opts, TWO_WAY)
        points = [(float(p), *twoway_powers(cfg, E, p, share)) for p in sum_power_db]
    ctx = _Context(basis, spec, plan, cfg, opts)
    pool = _pool(opts)
    try:
        return _sweep(ctx, TWO_WAY, points, E, pool)
    finally:
        if pool:
            pool.shutdown()


def snr_at_ser(records: Sequence[SerRecord], target: float) -> float:
    """Sum power (dB) where the SER curve crosses ``target``, by log-linear interpolation.

    Returns ``nan`` when the curve never reaches the target.
    """
    pts = sorted((r.sum_power_db, r.ser) for r in records)
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        if y0 > target >= y1:
            if y1 <= 0:
                return x1
            f = (math.log10(y0) - math.log10(target)) / (math.log10(y0) - math.log10(y1))
            return x0 + f * (x1 - x0)
    if pts and pts[0][1] <= target:
        return pts[0][0]
    return float("nan")


__all__ = [
    "ChannelConfig", "PowerEstimate", "SerRecord", "SimOptions", "ConfigError", "awgn",
    "power_estimates_oneway", "exact_energy_hypercube", "measure_energies_oneway",
    "measure_energies_twoway", "df_bound_oneway", "min_sum_power_oneway", "df_bound_twoway",
    "min_sum_power_twoway", "simulate_oneway", "simulate_twoway", "snr_at_ser", "to_db",
    "from_db", "oneway_powers", "twoway_powers", "ONE_WAY", "TWO_WAY",
]
