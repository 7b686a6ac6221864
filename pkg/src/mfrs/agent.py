"""Goal-conditioned DDPG: replay buffer, actor/critic updates, exploration."""

import numpy as np

from .nn import Adam, Mlp, TrainingDivergence, soft_update

REPLAY_SIZE = 10 ** 6


class ReplayBuffer:
    """Ring buffer of ``(s, a, s', r', g, terminal)`` rows with uniform sampling."""

    def __init__(self, obs_dim, act_dim, goal_dim, capacity=REPLAY_SIZE):
        self.capacity = int(capacity)
        self.dims = (obs_dim, act_dim, obs_dim, 1, goal_dim, 1)
        self.width = sum(self.dims)
        self._data = np.empty((min(self.capacity, 4096), self.width))
        self._next = 0
        self.size = 0

    def __len__(self):
        return self.size

    def add(self, s, a, s_next, r, g, terminal):
        if self.size < self.capacity and self.size == len(self._data):
            grown = np.empty((min(self.capacity, 2 * len(self._data)), self.width))
            grown[:self.size] = self._data[:self.size]
            self._data = grown
        self._data[self._next] = np.concatenate([s, a, s_next, [r], g, [float(terminal)]])
        self._next = (self._next + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample_indices(self, rng, n):
        return rng.integers(0, self.size, size=n)

    def sample(self, rng, n):
        if self.size < n:
            raise ValueError("buffer holds %d transitions, need %d" % (self.size, n))
        rows = self._data[self.sample_indices(rng, n)]
        out, i = [], 0
        for d in self.dims:
            out.append(rows[:, i:i + d])
            i += d
        s, a, s2, r, g, term = out
        return s, a, s2, r, g, term


class Normalizer:
    """Fixed affine map of network inputs: ``(x - center) / scale``."""

    def __init__(self, center, scale):
        self.center = np.asarray(center, dtype=float)
        self.scale = np.asarray(scale, dtype=float)

    def __call__(self, x):
        return (x - self.center) / self.scale


class DDPGAgent:
    """Actor ``pi(s, g)`` and critic ``Q(s, a, g)`` with slowly tracking targets."""

    def __init__(self, obs_dim, act_dim, goal_dim, rng, hidden=(256, 256), actor_lr=3e-4,
                 critic_lr=1e-3, gamma=0.99, tau=1e-3, obs_norm=None, goal_norm=None):
        self.obs_dim, self.act_dim, self.goal_dim = obs_dim, act_dim, goal_dim
        self.gamma, self.tau = gamma, tau
        self.actor = Mlp([obs_dim + goal_dim, *hidden, act_dim], rng, out_activation="tanh")
        self.critic = Mlp([obs_dim + act_dim + goal_dim, *hidden, 1], rng)
        self.actor_target = self.actor.copy()
        self.critic_target = self.critic.copy()
        self.actor_opt = Adam(self.actor, actor_lr)
        self.critic_opt = Adam(self.critic, critic_lr)
        self.obs_norm = obs_norm or Normalizer(np.zeros(obs_dim), np.ones(obs_dim))
        self.goal_norm = goal_norm or Normalizer(np.zeros(goal_dim), np.ones(goal_dim))

    # inputs are batches: (n, obs_dim) etc.
    def _actor_in(self, s, g):
        return np.concatenate([self.obs_norm(s), self.goal_norm(g)], axis=1)

    def _critic_in(self, s, a, g):
        return np.concatenate([self.obs_norm(s), a, self.goal_norm(g)], axis=1)

    def policy(self, s, g):
        """Deterministic action for a single state/goal pair."""
        return self.actor.forward(self._actor_in(s[None, :], g[None, :]))[0]

    def act(self, s, g, noise_std, rng):
        a = self.policy(s, g)
        if noise_std > 0:
            a = a + rng.normal(0.0, noise_std, size=a.shape)
        return np.clip(a, -1.0, 1.0)

    def q_value(self, s, a, g):
        return self.critic.forward(self._critic_in(s, a, g))[:, 0]

    def critic_update(self, batch):
        """One Adam step on the mean squared Bellman error; returns the pre-step loss.

        Terminal rows bootstrap with zero.
        """
        s, a, s2, r, g, term = batch
        a2 = self.actor_target.forward(self._actor_in(s2, g))
        q_next = self.critic_target.forward(self._critic_in(s2, a2, g))
        y = r + self.gamma * (1.0 - term) * q_next
        q, cache = self.critic.forward_cache(self._critic_in(s, a, g))
        err = q - y
        loss = float(np.mean(err * err))
        if not np.isfinite(loss):
            raise TrainingDivergence("critic loss is %r" % loss)
        grads, _ = self.critic.backward(cache, 2.0 * err / len(err))
        self.critic_opt.step(self.critic, grads)
        return loss

    def actor_update(self, batch):
        """One Adam ascent step on mean Q(s, pi(s, g), g); returns the pre-step objective."""
        s, _, _, _, g, _ = batch
        a, a_cache = self.actor.forward_cache(self._actor_in(s, g))
        q, q_cache = self.critic.forward_cache(self._critic_in(s, a, g))
        objective = float(np.mean(q))
        if not np.isfinite(objective):
            raise TrainingDivergence("actor objective is %r" % objective)
        _, gin = self.critic.backward(q_cache, np.full_like(q, 1.0 / len(q)))
        dq_da = gin[:, self.obs_dim:self.obs_dim + self.act_dim]
        grads, _ = self.actor.backward(a_cache, -dq_da)
        self.actor_opt.step(self.actor, grads)
        return objective

    def update_targets(self):
        soft_update(self.actor_target, self.actor, self.tau)
        soft_update(self.critic_target, self.critic, self.tau)

    def nets(self):
        return {"actor": self.actor, "critic": self.critic,
                "actor_target": self.actor_target, "critic_target": self.critic_target}
