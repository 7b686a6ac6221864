import numpy as np
import pytest
from scipy import stats

from mfrs.agent import DDPGAgent, Normalizer, ReplayBuffer
from mfrs.gradcheck import relative_error
from mfrs.nn import Adam, Mlp, TrainingDivergence


def _fill(buf, n, rng):
    for i in range(n):
        buf.add(rng.normal(size=4), rng.normal(size=2), rng.normal(size=4), float(i),
                rng.normal(size=4), i % 7 == 0)


def test_replay_layout(rng):
    buf = ReplayBuffer(4, 2, 4, capacity=100)
    buf.add(np.arange(4.0), [9.0, 8.0], np.arange(4.0) + 10, 3.5, np.full(4, 7.0), True)
    s, a, s2, r, g, term = buf.sample(rng, 1)
    np.testing.assert_array_equal(s[0], np.arange(4.0))
    np.testing.assert_array_equal(a[0], [9.0, 8.0])
    np.testing.assert_array_equal(s2[0], np.arange(4.0) + 10)
    assert r.shape == (1, 1) and r[0, 0] == 3.5 and term[0, 0] == 1.0
    np.testing.assert_array_equal(g[0], np.full(4, 7.0))


def test_replay_wraps_and_grows(rng):
    buf = ReplayBuffer(4, 2, 4, capacity=10_000)
    _fill(buf, 9000, rng)
    assert len(buf) == 9000
    small = ReplayBuffer(4, 2, 4, capacity=50)
    _fill(small, 120, rng)
    assert len(small) == 50
    rewards = np.concatenate([small.sample(rng, 50)[3][:, 0] for _ in range(40)])
    # only the newest 50 rewards (70..119) survive
    assert rewards.min() >= 70 and rewards.max() <= 119


def test_replay_underfull_raises(rng):
    buf = ReplayBuffer(4, 2, 4, capacity=10)
    _fill(buf, 3, rng)
    with pytest.raises(ValueError):
        buf.sample(rng, 4)


def test_replay_sampling_is_uniform():
    rng = np.random.default_rng(0)
    buf = ReplayBuffer(1, 1, 1, capacity=50)
    for i in range(50):
        buf.add([0.0], [0.0], [0.0], float(i), [0.0], False)
    idx = np.concatenate([buf.sample_indices(rng, 1000) for _ in range(100)])
    counts = np.bincount(idx, minlength=50)
    assert counts.sum() == 100_000
    assert stats.chisquare(counts).pvalue > 1e-3


@pytest.fixture
def agent(rng):
    return DDPGAgent(4, 2, 4, rng, hidden=(16, 16), gamma=0.9)


def test_policy_in_bounds_and_act(agent, rng):
    for _ in range(20):
        s, g = 10 * rng.normal(size=4), 10 * rng.normal(size=4)
        assert np.all(np.abs(agent.policy(s, g)) <= 1.0)
        assert np.all(np.abs(agent.act(s, g, 5.0, rng)) <= 1.0)
    s, g = rng.normal(size=4), rng.normal(size=4)
    np.testing.assert_array_equal(agent.act(s, g, 0.0, rng), agent.policy(s, g))
    a1 = agent.act(s, g, 0.4, np.random.default_rng(3))
    a2 = agent.act(s, g, 0.4, np.random.default_rng(3))
    np.testing.assert_array_equal(a1, a2)


def _batch(rng, n=32, term=None):
    term = rng.integers(0, 2, (n, 1)).astype(float) if term is None else term
    return (rng.normal(size=(n, 4)), rng.uniform(-1, 1, (n, 2)), rng.normal(size=(n, 4)),
            rng.normal(size=(n, 1)), rng.normal(size=(n, 4)), term)


def test_critic_fits_fixed_batch(agent, rng):
    batch = _batch(rng)
    first = agent.critic_update(batch)
    for _ in range(300):
        last = agent.critic_update(batch)
    assert last < 0.2 * first


def test_terminal_rows_do_not_bootstrap(rng):
    agent = DDPGAgent(4, 2, 4, rng, hidden=(8,), gamma=0.9)
    agent.critic_target.flat[:] = 0.0
    agent.critic_target.biases[-1][:] = 50.0  # target critic is the constant 50
    n = 8
    b = _batch(rng, n, term=np.ones((n, 1)))
    q = agent.q_value(b[0], b[1], b[4])[:, None]
    assert agent.critic_update(b) == pytest.approx(np.mean((q - b[3]) ** 2))
    b = _batch(rng, n, term=np.zeros((n, 1)))
    q = agent.q_value(b[0], b[1], b[4])[:, None]
    assert agent.critic_update(b) == pytest.approx(np.mean((q - b[3] - 45.0) ** 2))


def test_constant_critic_gives_zero_actor_step(agent, rng):
    agent.critic.weights[-1][:] = 0.0
    agent.critic.biases[-1][:] = 2.0
    before = agent.actor.flat.copy()
    assert agent.actor_update(_batch(rng)) == pytest.approx(2.0)
    np.testing.assert_array_equal(agent.actor.flat, before)


def test_actor_climbs_quadratic_critic(rng):
    """With Q = -|a|^2 the policy should shrink its actions."""
    agent = DDPGAgent(4, 2, 4, rng, hidden=(16, 16), actor_lr=1e-2)

    class Quadratic:
        def forward_cache(self, x):
            a = x[:, 4:6]
            return -(a * a).sum(1, keepdims=True), a

        def backward(self, a, grad_out):
            gin = np.zeros((len(a), 10))
            gin[:, 4:6] = -2.0 * a * grad_out
            return None, gin

    agent.critic = Quadratic()
    batch = _batch(rng, 64)
    norm = lambda: np.abs(agent.actor.forward(agent._actor_in(batch[0], batch[4]))).mean()
    start = norm()
    for _ in range(200):
        agent.actor_update(batch)
    assert norm() < 0.1 * start


def test_actor_gradient_matches_finite_differences(agent, rng):
    """Gradient of mean Q(s, pi(s)) w.r.t. actor params through both nets."""
    s, _, _, _, g, _ = _batch(rng, 6)

    def objective():
        a = agent.actor.forward(agent._actor_in(s, g))
        return agent.q_value(s, a, g).mean()

    a, a_cache = agent.actor.forward_cache(agent._actor_in(s, g))
    q, q_cache = agent.critic.forward_cache(agent._critic_in(s, a, g))
    _, gin = agent.critic.backward(q_cache, np.full_like(q, 1.0 / len(q)))
    grads, _ = agent.actor.backward(a_cache, gin[:, 4:6])
    h = 1e-6
    for k in rng.choice(agent.actor.flat.size, 64, replace=False):
        old = agent.actor.flat[k]
        agent.actor.flat[k] = old + h
        up = objective()
        agent.actor.flat[k] = old - h
        down = objective()
        agent.actor.flat[k] = old
        num = (up - down) / (2 * h)
        assert relative_error(grads.flat[k], num, floor=1e-8) < 1e-4


def test_soft_targets_track(agent, rng):
    agent.critic.flat[:] += 1.0
    gap = np.abs(agent.critic.flat - agent.critic_target.flat).max()
    agent.update_targets()
    new_gap = np.abs(agent.critic.flat - agent.critic_target.flat).max()
    assert new_gap == pytest.approx((1 - agent.tau) * gap)


def test_divergence_is_raised(agent, rng):
    b = list(_batch(rng))
    b[3] = np.full_like(b[3], np.inf)
    with pytest.raises(TrainingDivergence):
        agent.critic_update(tuple(b))


def test_normalizer():
    n = Normalizer([1.0, 2.0], [2.0, 4.0])
    np.testing.assert_array_equal(n(np.array([[3.0, 6.0]])), [[1.0, 1.0]])
