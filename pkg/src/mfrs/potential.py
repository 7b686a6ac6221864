"""Learned action-dependent potential turning an arbitrary reward into shaping.

The potential is trained by on-policy TD with reward ``-r_obj``; the shaping
reward ``f = gamma * phi_new(s', a') - phi_old(s, a)`` then matches
``r_obj`` in expectation once the potential has converged.
"""

import numpy as np

from .nn import Adam, Mlp, TrainingDivergence

POTENTIAL_LR = 1e-4


def shaping_reward(phi_next_after, phi_before, gamma):
    return gamma * phi_next_after - phi_before


class PotentialFn:
    """Network potential over ``(s, a, g)``, identically zero at construction."""

    def __init__(self, in_dim, hidden=(256, 256), lr=POTENTIAL_LR, gamma=0.99, rng=None):
        self.net = Mlp([in_dim, *hidden, 1], rng, zero_output=True)
        self.opt = Adam(self.net, lr)
        self.gamma = gamma

    def value(self, s, a, g):
        x = np.concatenate([s, a, g])[None, :]
        return float(self.net.forward(x)[0, 0])

    def td_step(self, s, a, s_next, a_next, g, r_obj, terminal=False):
        """One semi-gradient TD step; returns ``(f, loss)``.

        The loss is ``0.5 * delta**2`` evaluated before the update.  A terminal
        ``s_next`` has potential 0 in both the TD target and ``f``.
        """
        x = np.stack([np.concatenate([s, a, g]), np.concatenate([s_next, a_next, g])])
        y, cache = self.net.forward_cache(x)
        phi_sa = y[0, 0]
        phi_next = 0.0 if terminal else y[1, 0]
        delta = -r_obj + self.gamma * phi_next - phi_sa
        loss = 0.5 * delta * delta
        if not np.isfinite(loss):
            raise TrainingDivergence("potential loss is %r" % loss)
        # d loss / d phi(s, a) = -delta; the bootstrap target is held fixed
        upstream = np.array([[-delta], [0.0]])
        grads, _ = self.net.backward(cache, upstream)
        self.opt.step(self.net, grads)
        phi_next_after = 0.0 if terminal else float(self.net.forward(x[1:])[0, 0])
        return shaping_reward(phi_next_after, phi_sa, self.gamma), float(loss)


class TabularPotential:
    """Table of potentials indexed by ``(state, action)`` with the same TD rule."""

    def __init__(self, n_states, n_actions, lr, gamma):
        self.table = np.zeros((n_states, n_actions))
        self.lr = lr
        self.gamma = gamma

    def value(self, s, a):
        return self.table[s, a]

    def td_step(self, s, a, s_next, a_next, r_obj, terminal=False):
        phi_sa = self.table[s, a]
        phi_next = 0.0 if terminal else self.table[s_next, a_next]
        delta = -r_obj + self.gamma * phi_next - phi_sa
        self.table[s, a] += self.lr * delta
        after = 0.0 if terminal else self.table[s_next, a_next]
        return shaping_reward(after, phi_sa, self.gamma), 0.5 * delta * delta


class NonConvergence(RuntimeError):
    pass


def policy_transition(T, policy, terminal=None):
    """Matrix over state-action pairs: ``M[(s,a),(s',a')] = T[s,a,s'] * pi[s',a']``.

    Rows into terminal states are zeroed (absorbing, zero potential).
    """
    T = np.asarray(T, dtype=float)
    policy = np.asarray(policy, dtype=float)
    n_s, n_a, _ = T.shape
    pi = policy.copy()
    if terminal is not None:
        pi[np.asarray(terminal, dtype=bool)] = 0.0
    return np.einsum("ijk,kl->ijkl", T, pi).reshape(n_s * n_a, n_s * n_a)


def expected_td_sweeps(M, r_obj, gamma, lr, sweeps, tol=1e-13):
    """Synchronous expected TD on a tabular potential; returns ``(phi, sweeps_used, residual)``."""
    r = np.asarray(r_obj, dtype=float).ravel()
    phi = np.zeros_like(r)
    residual = np.inf
    for k in range(1, sweeps + 1):
        delta = -r + gamma * (M @ phi) - phi
        phi = phi + lr * delta
        residual = np.max(np.abs(delta))
        if residual < tol:
            return phi, k, residual
    return phi, sweeps, residual


def expected_shaping_check(T, policy, r_obj, gamma, lr=0.5, sweeps=10 ** 5, terminal=None,
                   converge_tol=1e-9):
    """Largest ``|E[f] - r_obj|`` after expected TD converges under a fixed policy.

    ``T[s, a, s']`` are transition probabilities, ``policy[s, a]`` action
    probabilities and ``r_obj[s, a]`` the reward the shaping should reproduce.
    """
    r = np.asarray(r_obj, dtype=float)
    M = policy_transition(T, policy, terminal)
    phi, used, residual = expected_td_sweeps(M, r, gamma, lr, sweeps)
    if residual > converge_tol:
        raise NonConvergence("TD residual %.3e after %d sweeps" % (residual, used))
    expected_f = gamma * (M @ phi) - phi
    return float(np.max(np.abs(expected_f - r.ravel())))
