import numpy as np
import pytest

from ldpc_lattice.decomposition import (
    OneWayPlan,
    TwoWayPlan,
    pc_decompose_oneway,
    pc_decompose_twoway,
    recover_delta,
    smod,
    smod2mod,
    split_oneway,
    split_twoway,
)
from ldpc_lattice.lattice import LatticeBasis, encode, lattice_add
from ldpc_lattice.shaping import ShapingSpec, mod_recover


@pytest.fixture(scope="module")
def basis():
    return LatticeBasis.regular(100, 90, 3, seed=1)


def test_split_oneway_examples():
    plan = OneWayPlan([0, 2], 4)
    b_r, b_v = split_oneway([2, -1, 0, 3], plan)
    assert b_r.tolist() == [2, 0, 0, 0] and b_v.tolist() == [0, -1, 0, 3]
    b_r, b_v = split_oneway([2, -1, 0, 3], OneWayPlan([], 4))
    assert not b_r.any() and b_v.tolist() == [2, -1, 0, 3]


def test_plan_random():
    plan = OneWayPlan.random(101, 0.5, seed=3)
    assert plan.X_set.size == 51 and plan.mask().sum() == 51
    assert np.array_equal(plan.X_set, OneWayPlan.random(101, 0.5, seed=3).X_set)
    with pytest.raises(ValueError):
        OneWayPlan([0, 4], 4)
    with pytest.raises(ValueError):
        OneWayPlan.random(10, 1.5)


def test_unshaped_split_is_linear(basis):
    plan = OneWayPlan.random(basis.n, 0.5, seed=1)
    b = np.random.default_rng(0).integers(-8, 8, (1000, basis.n))
    b_r, b_v = split_oneway(b, plan)
    assert np.array_equal(encode(basis, b), lattice_add(encode(basis, b_r), encode(basis, b_v)))


@pytest.mark.parametrize("method", ["hypercube", "nested"])
def test_oneway_identity_and_recovery(basis, method):
    spec = ShapingSpec.uniform(basis.n, 8, method)
    plan = OneWayPlan.random(basis.n, 0.5, seed=1)
    b = spec.sample(np.random.default_rng(1), 1000)
    bp, brp, bvp = pc_decompose_oneway(basis, b, spec, plan)
    assert np.array_equal(encode(basis, bp), lattice_add(encode(basis, brp), encode(basis, bvp)))
    b_r, b_v = split_oneway(b, plan)
    assert np.array_equal(mod_recover(basis, encode(basis, bp), spec), b)
    assert np.array_equal(mod_recover(basis, encode(basis, brp), spec), np.mod(b_r - spec.low(), 8) + spec.low())
    if method == "hypercube":
        L = spec.L
        assert np.all(np.abs(basis.times_g(bp)) <= L) and np.all(np.abs(basis.times_g(brp)) <= L)


def test_vestigial_zero_on_info_in_x(basis):
    spec = ShapingSpec.uniform(basis.n, 8)
    plan = OneWayPlan.random(basis.n, 0.5, seed=1)
    b = spec.sample(np.random.default_rng(2), 500)
    _, _, bvp = pc_decompose_oneway(basis, b, spec, plan)
    cols = plan.mask() & (np.arange(basis.n) < basis.k)
    Xv = encode(basis, bvp)
    assert np.all(basis.times_g(bvp)[:, cols] == 0) and np.all(Xv[:, cols] == -1)


def test_oneway_zero_input(basis):
    for method in ("hypercube", "nested"):
        spec = ShapingSpec.uniform(basis.n, 8, method)
        out = pc_decompose_oneway(basis, np.zeros(basis.n, dtype=int), spec,
                                  OneWayPlan.random(basis.n, 0.5))
        assert all(not o.any() for o in out)


def test_smod_examples():
    assert [int(smod(x, 4)) for x in (3, 5, -1)] == [-1, 1, -1]
    assert int(smod2mod(-2, 4)) == 2 and int(smod2mod(1, 4)) == 1
    x = np.arange(-10, 11)
    assert np.array_equal(smod2mod(smod(x, 4), 4), np.mod(x, 4))


def test_split_twoway_examples():
    plan = TwoWayPlan([2, 2], [4, 4])
    b_r, b_v = split_twoway([5, -3], plan)
    assert b_r.tolist() == [1, 1] and b_v.tolist() == [4, -4]


def test_plan_validation():
    with pytest.raises(ValueError):
        TwoWayPlan([4], [2], m1=2)
    with pytest.raises(ValueError):
        TwoWayPlan.for_spec(ShapingSpec.uniform(3, 6), 4)
    with pytest.raises(ValueError):
        TwoWayPlan([0], [1])


@pytest.mark.parametrize("method", ["hypercube", "nested"])
def test_twoway_identity_and_modulo_linearity(basis, method):
    spec = ShapingSpec.uniform(basis.n, 4, method)
    plan = TwoWayPlan.for_spec(spec, 2)
    b = spec.sample(np.random.default_rng(3), 1000)
    bp, brp, bvp = pc_decompose_twoway(basis, b, spec, plan)
    b_r, _ = split_twoway(b, plan)
    assert np.array_equal(encode(basis, bp), lattice_add(encode(basis, b_r), encode(basis, bvp)))
    L, L_r = spec.L, plan.L_r
    assert np.array_equal(np.mod(bp, L), np.mod(np.mod(b_r, L_r) + np.mod(bvp, L), L))
    # the shaped resolution word stays in the residue class of b
    assert np.array_equal(np.mod(brp, L_r), np.mod(b, L_r))


def test_twoway_zero_input(basis):
    spec = ShapingSpec.uniform(basis.n, 4, "nested")
    out = pc_decompose_twoway(basis, np.zeros(basis.n, dtype=int), spec, TwoWayPlan.for_spec(spec, 2))
    assert all(not o.any() for o in out)


def test_recover_delta():
    assert recover_delta(np.arange(8), 1, 8).tolist() == list(range(8))
    assert int(recover_delta((3 * 3) % 4, 3, 4)) == 3
    b = np.arange(8)
    assert np.array_equal(recover_delta(np.mod(5 * b, 8), 5, 8), b)
    with pytest.raises(ValueError):
        recover_delta(1, 2, 4)
