"""Deterministic gridworld used to check shaping invariance with tabular learners.

Cells are indexed ``row * size + col``; actions are up, down, left, right.
Entering the goal ends the episode with reward 100, entering the obstacle
costs -10 (the agent passes through), every other step is free.  The
magnetic objective places a spherical target magnet on the goal cell and
an obstacle magnet on the obstacle cell, in the plane ``z = 0``.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import align_magnetization_toward
from .magnets import QuadratureSpec, SphericalMagnet
from .potential import TabularPotential
from .reward import FieldStats, GoalLayout, intensities, magnetic_reward_from

MOVES = np.array([(-1, 0), (1, 0), (0, -1), (0, 1)])
GOAL_REWARD = 100.0
OBSTACLE_REWARD = -10.0


@dataclass
class GridWorld:
    size: int = 7
    start: tuple = (6, 3)
    goal: tuple = (0, 3)
    obstacle: tuple = (3, 1)
    horizon: int = 50
    cell: float = 0.05

    @property
    def n_states(self):
        return self.size * self.size

    n_actions = 4

    def index(self, rc):
        return int(rc[0]) * self.size + int(rc[1])

    def coords(self, s):
        return divmod(int(s), self.size)

    def move(self, s, a):
        r, c = np.add(self.coords(s), MOVES[a])
        r = min(max(r, 0), self.size - 1)
        c = min(max(c, 0), self.size - 1)
        return self.index((r, c))

    def step(self, s, a):
        """``(s', reward, terminal)``."""
        s2 = self.move(s, a)
        if s2 == self.index(self.goal):
            return s2, GOAL_REWARD, True
        if s2 == self.index(self.obstacle):
            return s2, OBSTACLE_REWARD, False
        return s2, 0.0, False

    def tables(self):
        """Deterministic successor, reward and terminal tables for value iteration."""
        nxt = np.zeros((self.n_states, 4), dtype=int)
        rew = np.zeros((self.n_states, 4))
        for s in range(self.n_states):
            for a in range(4):
                nxt[s, a], rew[s, a], _ = self.step(s, a)
        terminal = np.zeros(self.n_states, bool)
        terminal[self.index(self.goal)] = True
        return nxt, rew, terminal

    def position(self, s):
        r, c = self.coords(s)
        return np.array([c * self.cell, -r * self.cell, 0.0])

    def layout(self, radius=0.02):
        goal = self.position(self.index(self.goal))
        orient = align_magnetization_toward(goal, self.position(self.index(self.start)))
        target = SphericalMagnet.placed(goal, radius, orient)
        return GoalLayout(target, [SphericalMagnet.placed(self.position(self.index(self.obstacle)),
                                                          radius)])


class MagneticGridObjective:
    """Magnetic reward of the cell entered, with statistics refreshed per episode."""

    def __init__(self, world, quad=None):
        layout = world.layout()
        self.stats = FieldStats(1, 10 ** 6)
        quad = quad or QuadratureSpec(32, 32)
        self.raw = [intensities(world.position(s), layout, quad) for s in range(world.n_states)]

    def __call__(self, s):
        h_t, h_o = self.raw[s]
        self.stats.insert(h_t, h_o)
        return magnetic_reward_from(h_t, h_o, self.stats)

    def end_episode(self):
        self.stats.update()


def _argmax(values, rng=None, tol=0.0):
    best = values.max()
    cands = np.flatnonzero(values >= best - tol)
    if rng is None or len(cands) == 1:
        return int(cands[0])
    return int(rng.choice(cands))


def q_learning(world, episodes, seed, shaped=False, gamma=0.9, alpha=1.0, epsilon=0.1,
               phi_lr=0.5, quad=None):
    """Tabular Q-learning on the sparse reward or on ``r + f`` from a learned magnetic potential.

    The potential starts at zero and takes one on-policy TD step per
    transition, exactly as in the continuous agent.  Returns ``(q, successes,
    phi)`` with ``phi`` the potential table (``None`` for the sparse learner).
    """
    rng = np.random.default_rng(seed)
    q = np.zeros((world.n_states, 4))
    pot = TabularPotential(world.n_states, 4, phi_lr, gamma) if shaped else None
    obj = MagneticGridObjective(world, quad) if shaped else None

    def choose(s):
        if rng.random() < epsilon:
            return int(rng.integers(4))
        return _argmax(q[s], rng)

    successes = np.zeros(episodes, dtype=int)
    start = world.index(world.start)
    for ep in range(episodes):
        s = start
        a = choose(s)
        for _ in range(world.horizon):
            s2, r, term = world.step(s, a)
            a2 = choose(s2)
            if shaped:
                f, _ = pot.td_step(s, a, s2, a2, obj(s2), term)
                r = r + f
            target = r + (0.0 if term else gamma * q[s2].max())
            q[s, a] += alpha * (target - q[s, a])
            s, a = s2, a2
            if term:
                successes[ep] = 1
                break
        if shaped:
            obj.end_episode()
    return q, successes, (pot.table if shaped else None)


def greedy_policy(q, tol=1e-9):
    """Greedy action per state, ties broken toward the lowest action index."""
    return np.array([_argmax(row, None, tol) for row in q])


def reachable(world, policy):
    """States visited when following ``policy`` from the start until the goal or the horizon."""
    s, seen = world.index(world.start), []
    goal = world.index(world.goal)
    for _ in range(world.horizon):
        seen.append(s)
        s = world.move(s, policy[s])
        if s == goal:
            break
    return sorted(set(seen))


def episodes_to_rate(success_curves, rate=0.95):
    """First episode (1-based) at which the across-run mean success reaches ``rate``."""
    mean = np.mean(success_curves, axis=0)
    hit = np.flatnonzero(mean >= rate)
    return int(hit[0]) + 1 if hit.size else None
