import numpy as np
import pytest
from hypothesis import given, strategies as st

from srbb.errors import InvalidArgument
from srbb.paths import (Leg, PairPotential, PathConfig, brownian_batch, hamiltonian, hamiltonian_batch,
                        hamiltonian_bound, interaction_V, leg_pair_energies, pair_matrix, phi, sample_bridge,
                        u_factor)
from srbb.rng import RngSpec


def test_potential_shapes():
    step = PairPotential("step", 2.0, 1.0)
    assert step(0.5) == 2.0 and step(1.0) == 2.0 and step(1.0001) == 0.0
    bump = PairPotential("bump", 2.0, 2.0)
    assert bump(0.0) == 2.0 and bump(2.0) == 0.0
    assert bump(1.0) == pytest.approx(2.0 * 0.75 ** 2)
    assert bump.continuous and not step.continuous
    tab = PairPotential("table", R=2.0, table_r=(0.0, 1.0, 2.0), table_v=(3.0, 1.0, 0.0))
    assert tab(0.5) == pytest.approx(2.0) and tab(1.5) == pytest.approx(0.5) and tab(3.0) == 0.0
    assert tab.L_bound == 3.0 and tab.continuous


@pytest.mark.parametrize("kw", [dict(kind="cube"), dict(R=0.0), dict(eta=-1.0),
                                dict(kind="table", table_r=(0.0, 0.0), table_v=(1.0, 0.0)),
                                dict(kind="table", table_r=(0.0, 1.0), table_v=(1.0,))])
def test_potential_validation(kw):
    with pytest.raises(InvalidArgument):
        PairPotential(**kw)


def test_bridge_pins_both_ends_and_has_bridge_covariance():
    gen = np.random.default_rng(0)
    start, end = np.array([0.5, -1.0]), np.array([2.0, 0.0])
    b = brownian_batch(gen, 200_000, 8, 0.25, 2, start, end)
    assert np.array_equal(b[:, 0], np.broadcast_to(start, (200_000, 2)))
    assert np.array_equal(b[:, -1], np.broadcast_to(end, (200_000, 2)))
    t = np.arange(9) * 0.25
    mean = start + np.outer(t / 2.0, end - start)
    assert np.allclose(b.mean(axis=0), mean, atol=0.01)
    # Var of the bridge at time s over [0, T] is s (T - s) / T
    assert np.allclose(b[:, :, 0].var(axis=0), t * (2.0 - t) / 2.0, atol=0.01)


def test_sample_bridge_shapes():
    rng = RngSpec(1)
    p = sample_bridge([0, 0, 0], [1, 0, 0], 3.0, 4, rng, index=5)
    assert isinstance(p, PathConfig) and p.k == 3 and len(p.legs) == 3
    q = sample_bridge([0, 0, 0], [1, 0, 0], 3.0, 4, rng, index=5)
    assert np.array_equal(p.positions, q.positions)
    leg = sample_bridge([0.0], [1.0], 0.3, 5, rng)
    assert isinstance(leg, Leg) and leg.M == 5
    with pytest.raises(InvalidArgument):
        sample_bridge([0.0], [1.0, 2.0], 1.0, 4, rng)
    with pytest.raises(InvalidArgument):
        sample_bridge([0.0], [1.0], -1.0, 4, rng)


def test_trapezoid_matches_loop_oracle():
    gen = np.random.default_rng(5)
    M, beta = 6, 1.5
    a = gen.normal(size=(M + 1, 3))
    b = gen.normal(size=(M + 1, 3))
    v = PairPotential("bump", 1.0, 2.0)
    dt = beta / M
    ref = 0.0
    for t in range(M + 1):
        r = np.linalg.norm(a[t] - b[t])
        vt = (1 - r * r / 4) ** 2 if r <= 2 else 0.0
        ref += (0.5 if t in (0, M) else 1.0) * dt * vt
    assert interaction_V(Leg(a, beta), Leg(b, beta), v) == pytest.approx(ref, rel=1e-14)


def test_pair_matrix_matches_leg_energies():
    gen = np.random.default_rng(6)
    k, M = 4, 5
    paths = brownian_batch(gen, 3, k * M, 1.0 / M, 2)
    v = PairPotential("step", 1.0, 1.0)
    V = pair_matrix(paths, k, M, 1.0, v)
    for i in range(k):
        for j in range(k):
            if i == j:
                assert np.all(V[:, i, j] == 0)
                continue
            ref = leg_pair_energies(paths[:, i * M:(i + 1) * M + 1], paths[:, j * M:(j + 1) * M + 1], 1.0, v)
            assert np.allclose(V[:, i, j], ref, rtol=1e-14, atol=0)


@given(seed=st.integers(0, 10**6), k=st.integers(1, 6), eta=st.floats(0.0, 5.0))
def test_hamiltonian_within_elementary_bound(seed, k, eta):
    v = PairPotential("step", eta, 1.0)
    paths = brownian_batch(np.random.default_rng(seed), 4, k * 4, 0.25, 3)
    H = hamiltonian_batch(pair_matrix(paths, k, 4, 1.0, v))
    assert np.all(H >= 0) and np.all(H <= hamiltonian_bound(v, k) * (1 + 1e-12))


def test_coincident_legs_saturate():
    leg = Leg(np.zeros((5, 2)))
    v = PairPotential("step", 2.0, 1.0)
    assert interaction_V(leg, leg, v) == pytest.approx(2.0)
    assert u_factor(leg, leg, 0.5, v) == pytest.approx(1 - np.exp(-1.0))
    B = PathConfig(np.zeros((9, 2)), 4)
    assert hamiltonian(B, v) == pytest.approx(2.0)


def test_phi():
    assert phi(2.0, 0.0, 3) == pytest.approx((4 * np.pi) ** -1.5)
    assert phi(1.0, [3.0, 4.0], 2) == pytest.approx(np.exp(-12.5) / (2 * np.pi))
