"""Magnetic reward: standardized target/obstacle intensities squashed to (-1, 1)."""

from dataclasses import dataclass, field

import numpy as np

from .magnets import EPS, intensity_at

MAGNET_BUFFER_SIZE = 10 ** 6


def standardize(h, mu, sigma, eps=EPS):
    return (h - mu) / (sigma + eps)


def combine(h_target, h_obstacles):
    """Target z-score minus the mean obstacle z-score (no obstacles: target alone)."""
    h_obstacles = np.asarray(h_obstacles, dtype=float)
    if h_obstacles.size == 0:
        return h_target
    return h_target - np.mean(h_obstacles, axis=-1)


def softsign(x):
    return x / (1.0 + np.abs(x))


@dataclass
class GoalLayout:
    """Target magnet plus obstacle magnets for one episode."""

    target: object
    obstacles: list = field(default_factory=list)

    @property
    def target_position(self):
        return self.target.center

    @property
    def obstacle_positions(self):
        return [o.center for o in self.obstacles]

    @property
    def magnets(self):
        return [self.target, *self.obstacles]

    def goal_vector(self, dim=3):
        """Flattened ``[P_T, P_O1, ..., P_ON]`` using the first ``dim`` coordinates."""
        return np.concatenate([np.asarray(p)[:dim] for p in
                               [self.target_position, *self.obstacle_positions]])


class RingBuffer:
    """Fixed-capacity FIFO of floats."""

    def __init__(self, capacity):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = int(capacity)
        self._data = np.empty(min(self.capacity, 1024))
        self._next = 0
        self.size = 0

    def append(self, value):
        if self.size < self.capacity and self.size == len(self._data):
            grown = np.empty(min(self.capacity, 2 * len(self._data)))
            grown[:self.size] = self._data[:self.size]
            self._data = grown
        self._data[self._next] = value
        self._next = (self._next + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def extend(self, values):
        for v in np.ravel(values):
            self.append(v)

    def values(self):
        return self._data[:self.size]

    def __len__(self):
        return self.size


class FieldStats:
    """Per-magnet intensity buffers with the mean/std used for standardization.

    Slot 0 is the target, slots 1..N the obstacles.  Statistics start at
    ``(0, 1)`` and only change when :meth:`update` is called.
    """

    def __init__(self, n_obstacles, capacity=MAGNET_BUFFER_SIZE):
        self.buffers = [RingBuffer(capacity) for _ in range(n_obstacles + 1)]
        self.mu = np.zeros(n_obstacles + 1)
        self.sigma = np.ones(n_obstacles + 1)

    @property
    def n_obstacles(self):
        return len(self.buffers) - 1

    def insert(self, h_target, h_obstacles=()):
        self.buffers[0].append(h_target)
        for buf, h in zip(self.buffers[1:], h_obstacles):
            buf.append(h)

    def update(self):
        """Population mean/std over each buffer; empty buffers keep their values."""
        for i, buf in enumerate(self.buffers):
            if len(buf):
                v = buf.values()
                self.mu[i] = v.mean()
                self.sigma[i] = v.std()
        return self


def update_stats(stats):
    return stats.update()


def intensities(position, layout, quad=None):
    """Raw field intensities of the target and each obstacle at ``position``."""
    p = np.asarray(position, dtype=float)
    h_t = float(intensity_at(layout.target, p, quad))
    h_o = np.array([float(intensity_at(o, p, quad)) for o in layout.obstacles])
    return h_t, h_o


def magnetic_reward_from(h_target, h_obstacles, stats, eps=EPS):
    zt = standardize(h_target, stats.mu[0], stats.sigma[0], eps)
    zo = standardize(np.asarray(h_obstacles, dtype=float), stats.mu[1:], stats.sigma[1:], eps)
    return float(softsign(combine(zt, zo)))


def magnetic_reward(position, layout, stats, quad=None, eps=EPS):
    """Return ``(H_T, [H_Oi], R_m)`` for the agent at ``position``.

    ``stats`` is read, never modified; the caller inserts the returned raw
    intensities into the magnet buffer.
    """
    h_t, h_o = intensities(position, layout, quad)
    return h_t, h_o, magnetic_reward_from(h_t, h_o, stats, eps)
