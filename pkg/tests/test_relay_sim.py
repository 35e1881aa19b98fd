import math

import numpy as np
import pytest

from _oracles import CLOSED_FORM_EX_S2_L2_KN, CLOSED_FORM_EX_S2_L8
from ldpc_lattice.decomposition import OneWayPlan, TwoWayPlan, pc_decompose_oneway
from ldpc_lattice.lattice import (EXACT_LLR_GAIN, LatticeBasis, decode, encode, is_member,
                                  lattice_add)
from ldpc_lattice.relay_sim import (
    TWO_WAY,
    ChannelConfig,
    ConfigError,
    PowerEstimate,
    SerRecord,
    SimOptions,
    awgn,
    df_bound_oneway,
    df_bound_twoway,
    exact_energy_hypercube,
    from_db,
    measure_energies_oneway,
    min_sum_power_oneway,
    min_sum_power_twoway,
    oneway_powers,
    power_estimates_oneway,
    simulate_oneway,
    simulate_twoway,
    snr_at_ser,
    to_db,
)
from ldpc_lattice.shaping import ShapingSpec, mod_recover, shape


@pytest.fixture(scope="module")
def basis():
    return LatticeBasis.regular(100, 90, 3, seed=1)


def test_awgn():
    rng = np.random.default_rng(0)
    x = np.arange(5.0)
    assert np.array_equal(awgn(x, 0.0, rng), x)
    z = awgn(np.zeros(1_000_000), 2.5, rng)
    assert z.var() == pytest.approx(2.5, rel=0.01)
    assert abs(z.mean()) < 3 * math.sqrt(2.5 / z.size)


def test_config_validation():
    with pytest.raises(ConfigError):
        ChannelConfig(topology="three_way")
    with pytest.raises(ConfigError):
        ChannelConfig(d_SR=0)
    with pytest.raises(ConfigError):
        ChannelConfig(N_D=-1)
    with pytest.raises(ConfigError):
        ChannelConfig(T=1)
    with pytest.raises(ConfigError):
        SimOptions(noise_model="guess")
    with pytest.raises(ConfigError):
        SimOptions(relay_share=1.0)


def test_gains_follow_distances():
    cfg = ChannelConfig(d_RD=0.2)
    assert cfg.h_SR == pytest.approx(1 / 0.9) and cfg.h_RD == pytest.approx(25.0)
    assert cfg.h_SD == 1.0


def test_oneway_min_power_golden():
    cfg = ChannelConfig()
    assert to_db(min_sum_power_oneway(cfg, 3.01)) == pytest.approx(17.15, abs=0.05)
    assert to_db(min_sum_power_oneway(cfg, 2.85)) == pytest.approx(16.15, abs=0.05)


def test_oneway_bound_consistent_with_min_power():
    cfg = ChannelConfig()
    total = min_sum_power_oneway(cfg, 3.0)
    K = 2.0 ** 6 - 1
    qs = K * cfg.N_R / cfg.h_SR ** 2
    rate = df_bound_oneway(ChannelConfig(P_S=qs, P_R=total - qs), 1.0, 1.0)
    assert rate == pytest.approx(3.0, abs=1e-9)
    assert df_bound_oneway(ChannelConfig(P_S=0, P_R=0), 1.0, 1.0) == 0.0


def test_twoway_bound_cases():
    E = PowerEstimate(5.0, 3.0)
    sym = ChannelConfig(topology=TWO_WAY, alpha_S2R=1.0, P_S1=10.0, P_R=10.0)
    r1, r2 = df_bound_twoway(sym, E)
    assert r1 == pytest.approx(r2) and r1 > 0
    assert df_bound_twoway(ChannelConfig(topology=TWO_WAY, P_S1=0.0, P_R=4.0), E) == (0.0, 0.0)
    r1, r2 = df_bound_twoway(ChannelConfig(topology=TWO_WAY, P_S1=1.0, P_R=30.0), E)
    assert 0 < r1 < math.inf and 0 < r2 < math.inf


def test_twoway_min_power_meets_rate():
    cfg = ChannelConfig(topology=TWO_WAY)
    total, q1, q2, qr = min_sum_power_twoway(cfg, 2.85)
    assert total == pytest.approx(q1 + q2 + qr)
    probe = ChannelConfig(topology=TWO_WAY, P_S1=q1, P_R=qr)
    r1, r2 = df_bound_twoway(probe, PowerEstimate(1.0, 1.0))
    assert min(r1, r2) == pytest.approx(2.85, abs=1e-6)


def test_closed_form_energies():
    assert power_estimates_oneway(8, 1000, 850).Ex_S2 == pytest.approx(CLOSED_FORM_EX_S2_L8)
    assert power_estimates_oneway(2, 10, 10).Ex_S2 == pytest.approx(CLOSED_FORM_EX_S2_L2_KN)


def _shaped_energy(n, k, L, samples, seed=0):
    basis = LatticeBasis.regular(n, k, 3, seed=1)
    spec = ShapingSpec.uniform(n, L)
    X = shape(basis, spec.sample(np.random.default_rng(seed), samples), spec).X
    return float(np.mean(X.astype(float) ** 2))


def test_sampled_energy_matches_exact_expression():
    # 10^5 symbols
    assert _shaped_energy(200, 170, 8, 500) == pytest.approx(exact_energy_hypercube(8, 200, 170), rel=0.01)


@pytest.mark.xfail(strict=True, reason="closed-form estimate omits part of the information-row energy")
def test_sampled_energy_matches_closed_form():
    est = power_estimates_oneway(8, 200, 170).Ex_S2
    assert _shaped_energy(200, 170, 8, 500) == pytest.approx(est, rel=0.01)


def test_energy_accounting(basis):
    spec = ShapingSpec.uniform(basis.n, 8)
    plan = OneWayPlan.random(basis.n, 0.5, seed=1)
    cfg = ChannelConfig()
    E = measure_energies_oneway(basis, spec, plan, samples=1000, seed=0)
    P_S, P_R = oneway_powers(cfg, E, 20.0, 0.3)
    # 10^5 fresh symbols per transmitter, sent with the powers chosen for 20 dB
    b = spec.sample(np.random.default_rng(7), 1000)
    bp, brp, _ = pc_decompose_oneway(basis, b, spec, plan)
    sent = P_S * np.mean(encode(basis, bp) ** 2.0) + P_R * np.mean(encode(basis, brp) ** 2.0)
    assert sent == pytest.approx(from_db(20.0), rel=0.02)


def _oneway(basis, method="hypercube"):
    spec = ShapingSpec.uniform(basis.n, 8, method)
    plan = OneWayPlan.random(basis.n, 0.5, seed=1)
    return spec, plan


@pytest.mark.parametrize("method", ["hypercube", "nested"])
def test_oneway_zero_noise_exact(basis, method):
    spec, plan = _oneway(basis, method)
    cfg = ChannelConfig(N_R=0.0, N_D=0.0, P_S=1.0, P_R=1.0, T=10, seed=3)
    (rec,) = simulate_oneway(basis, spec, plan, cfg,
                             opts=SimOptions(max_trials=10, target_errors=None, energy_samples=200))
    assert rec.trials * cfg.T == 100 and rec.symbol_errors == 0 and rec.lattice_errors == 0


@pytest.mark.parametrize("method", ["hypercube", "nested"])
def test_twoway_zero_noise_exact(basis, method):
    spec = ShapingSpec.split(basis.k, basis.n, 8, 4, method)
    plan = TwoWayPlan.for_spec(spec, 2)
    cfg = ChannelConfig(topology=TWO_WAY, N_R=0.0, N_S1=0.0, N_S2=0.0, P_S1=1.0, P_R=1.0, seed=3)
    (rec,) = simulate_twoway(basis, spec, plan, cfg,
                             opts=SimOptions(max_trials=10, target_errors=None, energy_samples=200,
                                             direction="both"))
    assert rec.symbols == 2 * 10 * cfg.T * basis.n and rec.symbol_errors == 0


def test_relay_sum_is_lattice_addition(basis):
    spec = ShapingSpec.uniform(basis.n, 8)
    rng = np.random.default_rng(0)
    X1 = shape(basis, spec.sample(rng, 50), spec).X
    X2 = shape(basis, spec.sample(rng, 50), spec).X
    rho = 1.7
    y = rho * (X1 + X2) - rho * (1 - 1 - 1)
    sums = lattice_add(X1, X2)
    assert np.allclose(y / rho, sums, rtol=0, atol=1e-9) and is_member(basis, sums).all()


def test_relay_off_is_point_to_point(basis):
    spec, plan = _oneway(basis)
    cfg = ChannelConfig(P_S=1 / 0.5 ** 2, P_R=0.0, T=10, seed=2)
    opts = SimOptions(max_trials=20, target_errors=None, energy_samples=200)
    (rec,) = simulate_oneway(basis, spec, plan, cfg, opts=opts)
    # direct decode at the same receive SNR (sigma = 0.5 after scaling)
    rng = np.random.default_rng(11)
    b = spec.sample(rng, 200)
    X = shape(basis, b, spec).X
    err = 0
    for t in range(len(b)):
        Xh, _ = decode(basis, X[t] + rng.normal(0, 0.5, basis.n), 0.25, llr_gain=EXACT_LLR_GAIN)
        err += int(np.sum(mod_recover(basis, Xh, spec) != b[t]))
    p_ref = err / b.size
    # errors cluster in failed frames (200 frames per side), hence the loose relative bound
    assert p_ref > 0.01 and rec.ser == pytest.approx(p_ref, rel=0.25)


def test_ser_monotone_and_crossing(basis):
    spec, plan = _oneway(basis)
    cfg = ChannelConfig(seed=4)
    opts = SimOptions(max_trials=6, target_errors=None, energy_samples=200)
    recs = simulate_oneway(basis, spec, plan, cfg, [16.0, 20.0, 24.0], opts)
    sers = [r.ser for r in recs]
    assert sers[0] > sers[1] >= sers[2]
    x = snr_at_ser(recs, 0.5 * (sers[0] + sers[1]))
    assert 16.0 < x <= 20.0


def test_determinism_across_workers(basis):
    spec, plan = _oneway(basis)
    cfg = ChannelConfig(seed=9)
    runs = [simulate_oneway(basis, spec, plan, cfg, [19.0],
                            SimOptions(max_trials=4, chunk=1, target_errors=None,
                                       energy_samples=200, workers=w))
            for w in (1, 2)]
    assert runs[0] == runs[1]


def test_snr_at_ser_interpolation():
    recs = [SerRecord(10.0, 1, 100, 1000), SerRecord(12.0, 1, 1, 1000), SerRecord(14.0, 1, 0, 1000)]
    assert snr_at_ser(recs, 0.01) == pytest.approx(11.0)
    assert math.isnan(snr_at_ser(recs[:1], 1e-3))
    assert snr_at_ser(recs, 1e-5) == 14.0


def test_configuration_mismatch(basis):
    spec, plan = _oneway(basis)
    with pytest.raises(ConfigError):
        simulate_oneway(basis, spec, plan, ChannelConfig(topology=TWO_WAY))
    spec2 = ShapingSpec.uniform(basis.n, 8)
    with pytest.raises(ConfigError):
        simulate_twoway(basis, spec2, TwoWayPlan.for_spec(spec2, 2),
                        ChannelConfig(topology=TWO_WAY, m2=3))
    with pytest.raises(ConfigError):
        simulate_oneway(basis, ShapingSpec.uniform(basis.n, 8, "nested"), plan, ChannelConfig(),
                        opts=SimOptions(energy_model="closed_form"))
