import numpy as np
import pytest

from mfrs.oracles import td_fixpoint
from mfrs.potential import (
    NonConvergence,
    PotentialFn,
    TabularPotential,
    expected_td_sweeps,
    policy_transition,
    shaping_reward,
    expected_shaping_check,
)


def chain(n=4):
    """Deterministic chain, one action moving right; last state absorbing terminal."""
    T = np.zeros((n, 1, n))
    for s in range(n - 1):
        T[s, 0, s + 1] = 1.0
    T[n - 1, 0, n - 1] = 1.0
    terminal = np.zeros(n, bool)
    terminal[-1] = True
    return T, np.ones((n, 1)), terminal


@pytest.fixture
def pot(rng):
    return PotentialFn(7, hidden=(16, 16), lr=1e-2, gamma=0.9, rng=rng)


def test_zero_initialised(pot, rng):
    for _ in range(10):
        assert pot.value(rng.normal(size=3), rng.normal(size=2), rng.normal(size=2)) == 0.0


def test_value_is_deterministic(pot, rng):
    pot.net.biases[-1][:] = 0.3
    s, a, g = rng.normal(size=3), rng.normal(size=2), rng.normal(size=2)
    assert pot.value(s, a, g) == pot.value(s, a, g)


def test_tabular_value_is_lookup():
    tab = TabularPotential(3, 2, 0.1, 0.9)
    tab.table[2, 1] = -4.5
    assert tab.value(2, 1) == -4.5


def test_zero_reward_on_zero_potential_is_a_fixed_point(pot, rng):
    before = [p.copy() for p in pot.net.params]
    f, loss = pot.td_step(rng.normal(size=3), rng.normal(size=2), rng.normal(size=3),
                          rng.normal(size=2), rng.normal(size=2), 0.0)
    assert f == 0.0 and loss == 0.0
    for a, b in zip(before, pot.net.params):
        np.testing.assert_array_equal(a, b)


def test_loss_value_for_half_reward(pot, rng):
    _, loss = pot.td_step(rng.normal(size=3), rng.normal(size=2), rng.normal(size=3),
                          rng.normal(size=2), rng.normal(size=2), 0.5)
    assert loss == 0.125


def test_loss_is_half_squared_td_error(pot, rng):
    pot.net.biases[-1][:] = 0.2
    pot.net.weights[-1][:] = rng.normal(scale=0.1, size=pot.net.weights[-1].shape)
    s, a, s2, a2, g = (rng.normal(size=k) for k in (3, 2, 3, 2, 2))
    delta = -0.7 + 0.9 * pot.value(s2, a2, g) - pot.value(s, a, g)
    _, loss = pot.td_step(s, a, s2, a2, g, 0.7)
    assert loss == pytest.approx(0.5 * delta ** 2, rel=1e-12)


def test_shaping_reward_uses_snapshots(pot, rng):
    pot.net.biases[-1][:] = 0.1
    s, a, s2, a2, g = (rng.normal(size=k) for k in (3, 2, 3, 2, 2))
    before = pot.value(s, a, g)
    f, _ = pot.td_step(s, a, s2, a2, g, 0.4)
    assert f == pytest.approx(0.9 * pot.value(s2, a2, g) - before, rel=1e-12)


def test_constant_potential_telescopes():
    assert shaping_reward(2.5, 2.5, 1.0) == 0.0
    assert shaping_reward(0.0, 0.0, 0.99) == 0.0


def test_terminal_next_state_has_zero_potential(pot, rng):
    pot.net.biases[-1][:] = 3.0
    s, a, s2, a2, g = (rng.normal(size=k) for k in (3, 2, 3, 2, 2))
    phi = pot.value(s, a, g)
    f, loss = pot.td_step(s, a, s2, a2, g, 1.0, terminal=True)
    assert f == -phi
    assert loss == pytest.approx(0.5 * (-1.0 - phi) ** 2)


def test_network_td_drives_error_down_on_fixed_transition(rng):
    pot = PotentialFn(4, hidden=(16, 16), lr=1e-2, gamma=0.5, rng=rng)
    s, a, g = np.array([0.1]), np.array([0.2]), np.array([0.3, 0.4])
    losses = [pot.td_step(s, a, s, a, g, 0.8)[1] for _ in range(3000)]
    assert losses[-1] < 1e-6 < losses[0]
    # phi* = -r / (1 - gamma)
    assert pot.value(s, a, g) == pytest.approx(-1.6, abs=1e-2)


def test_tabular_td_fixed_point_on_three_state_chain():
    tab = TabularPotential(3, 1, 0.3, 0.9)
    r = np.array([0.2, -0.5, 1.0])
    for _ in range(2000):
        tab.td_step(0, 0, 1, 0, r[0])
        tab.td_step(1, 0, 2, 0, r[1])
        tab.td_step(2, 0, 2, 0, r[2], terminal=True)
    deltas = [-r[0] + 0.9 * tab.table[1, 0] - tab.table[0, 0],
              -r[1] + 0.9 * tab.table[2, 0] - tab.table[1, 0],
              -r[2] - tab.table[2, 0]]
    assert np.max(np.abs(deltas)) < 1e-12


def test_expected_sweeps_match_linear_oracle():
    T, pi, terminal = chain()
    M = policy_transition(T, pi, terminal)
    r = np.array([0.3, -0.2, 0.9, 0.5])
    phi, _, _ = expected_td_sweeps(M, r, 0.9, 0.5, 10 ** 5)
    np.testing.assert_allclose(phi, td_fixpoint(M, -r, 0.9), atol=1e-10)


def test_expected_shaping_chain():
    T, pi, terminal = chain()
    r = np.array([[0.3], [-0.2], [0.9], [0.5]])
    assert expected_shaping_check(T, pi, r, 0.9, sweeps=10 ** 5, terminal=terminal) < 1e-6


def test_expected_shaping_stochastic_two_state():
    T = np.array([[[0.7, 0.3], [0.2, 0.8]],
                  [[0.5, 0.5], [0.9, 0.1]]])
    pi = np.array([[0.4, 0.6], [0.75, 0.25]])
    r = np.array([[0.1, -0.4], [0.8, 0.3]])
    assert expected_shaping_check(T, pi, r, 0.9) < 1e-3


def test_expected_shaping_gamma_zero_one_sweep():
    T, pi, terminal = chain()
    r = np.array([[0.3], [-0.2], [0.9], [0.5]])
    M = policy_transition(T, pi, terminal)
    phi, _, _ = expected_td_sweeps(M, r, 0.0, 1.0, 1)
    np.testing.assert_array_equal(phi, -r.ravel())
    assert expected_shaping_check(T, pi, r, 0.0, lr=1.0, sweeps=2, terminal=terminal) == 0.0


def test_gap_shrinks_with_sweeps():
    T, pi, terminal = chain()
    M = policy_transition(T, pi, terminal)
    r = np.array([0.3, -0.2, 0.9, 0.5])
    gaps = []
    for n in (1, 2, 4, 8, 16, 32):
        phi, _, _ = expected_td_sweeps(M, r, 0.9, 0.3, n)
        gaps.append(np.max(np.abs(0.9 * M @ phi - phi - r)))
    assert all(b <= a for a, b in zip(gaps, gaps[1:]))


def test_non_convergence_reported():
    T, pi, terminal = chain()
    with pytest.raises(NonConvergence, match="residual"):
        expected_shaping_check(T, pi, np.ones((4, 1)), 0.99, lr=0.01, sweeps=3, terminal=terminal)
