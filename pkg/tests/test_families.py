import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lccs_lsh.families import (
    W_PRESETS,
    CrossPolytopeFamily,
    CrossPolytopeFunction,
    RandomProjectionFamily,
    RandomProjectionFunction,
    cp_hash,
    cp_rho,
    estimate_p,
    family_params,
    make_family,
    normal_cdf,
    rho,
    rp_collision_prob,
    rp_hash,
    vertex_of_symbol,
)


def rp_prob_mp(tau, w):
    # independent high-precision evaluation of the same closed form
    r = mpmath.mpf(w) / tau
    phi = mpmath.ncdf(-r)
    return float(1 - 2 * phi - 2 / (mpmath.sqrt(2 * mpmath.pi) * r) * (1 - mpmath.exp(-r * r / 2)))


def test_rp_hash_examples():
    assert rp_hash(RandomProjectionFunction(np.array([0.3, -1.0]), 0.0, 1.0), [0.0, 0.0]) == 0
    assert rp_hash(RandomProjectionFunction(np.array([1.0, 0.0, 0.0]), 0.0, 1.0), [2.5, 7.0, -3.0]) == 2
    assert rp_hash(RandomProjectionFunction(np.array([1.0]), 0.0, 1.0), [-0.3]) == -1


def test_rp_function_validates():
    with pytest.raises(ValueError):
        RandomProjectionFunction(np.ones(2), 0.0, 0.0)
    with pytest.raises(ValueError):
        RandomProjectionFunction(np.ones(2), 1.5, 1.0)
    with pytest.raises(ValueError):
        rp_hash(RandomProjectionFunction(np.ones(2), 0.0, 1.0), [1.0, 2.0, 3.0])


def test_rp_collision_at_w():
    assert rp_collision_prob(1.0, 1.0) == pytest.approx(0.3687463803725072, abs=1e-12)
    assert rp_collision_prob(4.0, 4.0) == pytest.approx(rp_prob_mp(1.0, 1.0), abs=1e-12)


@pytest.mark.parametrize("ratio", [0.01, 0.1, 0.5, 1, 2, 4, 50])
def test_rp_collision_matches_mpmath(ratio):
    assert rp_collision_prob(ratio, 1.0) == pytest.approx(rp_prob_mp(ratio, 1.0), rel=1e-10, abs=1e-14)


def test_rp_collision_limits():
    assert rp_collision_prob(1e-6, 1.0) == pytest.approx(1.0, abs=1e-5)
    assert rp_collision_prob(1e6, 1.0) == pytest.approx(0.0, abs=1e-5)
    with pytest.raises(ValueError):
        rp_collision_prob(0.0, 1.0)


@settings(max_examples=100)
@given(st.floats(0.01, 100), st.floats(1.01, 10))
def test_rp_collision_decreasing(tau, factor):
    assert rp_collision_prob(tau * factor, 1.0) < rp_collision_prob(tau, 1.0)


def test_normal_cdf():
    assert normal_cdf(0.0) == 0.5
    assert normal_cdf(-1.0) == pytest.approx(float(mpmath.ncdf(-1)), abs=1e-15)
    assert normal_cdf(-30.0) > 0


def test_cp_hash_identity():
    f = CrossPolytopeFunction(np.eye(4))
    e3 = np.array([0.0, 0.0, 1.0, 0.0])
    assert cp_hash(f, e3) == 3
    assert cp_hash(f, -np.eye(4)[0]) == 4 + 1
    assert (vertex_of_symbol(3, 4) == e3).all()
    assert (vertex_of_symbol(5, 4) == -np.eye(4)[0]).all()


def test_cp_hash_rejects_bad_input():
    f = CrossPolytopeFunction(np.eye(3))
    with pytest.raises(ValueError):
        cp_hash(f, np.zeros(3))
    with pytest.raises(ValueError):
        cp_hash(f, np.array([2.0, 0.0, 0.0]))


def test_cp_equal_inputs_same_symbol(rng):
    fam = CrossPolytopeFamily(8)
    H = fam.sample(200, 3)
    o = fam.prepare(rng.normal(size=(1, 8)))
    assert (H(o) == H(o.copy())).all()
    assert H(o).min() >= 1 and H(o).max() <= 16


def test_cp_batch_matches_scalar(rng):
    fam = CrossPolytopeFamily(5)
    H = fam.sample(6, 11)
    X = fam.prepare(rng.normal(size=(9, 5)))
    batch = H(X)
    for j in range(6):
        for r in range(9):
            assert batch[r, j] == cp_hash(H.function(j), X[r])


def test_cp_rho_examples():
    assert cp_rho(2.0, 0.5) == pytest.approx(0.2)
    assert cp_rho(2.0, 1e-9) == pytest.approx(0.25)
    assert cp_rho(1.0 + 1e-9, 0.7) == pytest.approx(1.0, abs=1e-6)
    for c, R in [(0.9, 0.5), (2.0, 0.0), (2.0, 1.0)]:
        with pytest.raises(ValueError):
            cp_rho(c, R)


def test_estimate_p_rp():
    fam = RandomProjectionFamily(4, 2.0)
    assert estimate_p(fam, 0.0, 1000) == 1.0
    assert estimate_p(fam, 2.0, 40000, seed=5) == pytest.approx(rp_collision_prob(2.0, 2.0), abs=0.01)


def test_estimate_p_cp():
    fam = CrossPolytopeFamily(16)
    assert estimate_p(fam, 0.0, 2000) == 1.0
    assert estimate_p(fam, 2.0, 2000) == 0.0
    near, far = estimate_p(fam, 0.5, 4000), estimate_p(fam, 1.4, 4000)
    assert near > far


def test_rho_and_params():
    assert rho(0.5, 0.25) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        rho(0.25, 0.5)
    p = family_params(RandomProjectionFamily(10, 4.0), 1.0, 2.0)
    assert p.p1 == rp_collision_prob(1.0, 4.0) and p.p2 == rp_collision_prob(2.0, 4.0)
    assert 0 < p.rho < 1


def test_family_sampling_deterministic():
    fam = RandomProjectionFamily(6, 3.0)
    a, b = fam.sample(10, 42), fam.sample(10, 42)
    assert (a.A == b.A).all() and (a.b == b.b).all()
    assert ((0 <= a.b) & (a.b < 3.0)).all()


def test_make_family_and_presets():
    assert isinstance(make_family("angular", 3), CrossPolytopeFamily)
    assert make_family("euclidean", 3, W_PRESETS["sift"]).w == 226.0
    with pytest.raises(ValueError):
        make_family("euclidean", 3)
    with pytest.raises(ValueError):
        make_family("hamming", 3)
    assert W_PRESETS == {"msong": 18.75, "sift": 226.0, "gist": 11294.0, "glove": 4.65, "deep": 0.66}


def test_angular_prepare_normalizes():
    X = CrossPolytopeFamily(3).prepare(np.array([[3.0, 4.0, 0.0]]))
    assert np.allclose(X, [[0.6, 0.8, 0.0]])
    with pytest.raises(ValueError):
        CrossPolytopeFamily(3).prepare(np.zeros((1, 3)))


def test_cp_collision_ordering():
    fam = CrossPolytopeFamily(16)
    taus = [0.3, 0.6, 1.0, 1.4]
    ps = [estimate_p(fam, t, 6000, seed=j) for j, t in enumerate(taus)]
    assert all(a > b for a, b in zip(ps, ps[1:]))
    # ln(1/p) follows the ordering of tau^2 / (4 - tau^2)
    shape = [t * t / (4 - t * t) for t in taus]
    assert np.argsort([-math.log(p) for p in ps]).tolist() == np.argsort(shape).tolist()
