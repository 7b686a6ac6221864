"""Independent reference computations used by the verification suites.

Nothing here calls the production code paths it is meant to check.
"""

import numpy as np
from scipy import linalg


def _panel_rule(a, b, panels, order):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * w).ravel()
    return nodes, weights


def cuboid_charge_field(size, magnetization, points, panels=24, order=12):
    """Field of a z-magnetized box ``[0,l]x[0,w]x[0,h]`` from its pole charges.

    Integrates sigma = +M on the top face and -M on the bottom face with a
    composite Gauss-Legendre rule and the Coulomb kernel (p - q)/|p - q|^3.
    """
    l, w, h = size
    xs, wx = _panel_rule(0.0, l, panels, order)
    ys, wy = _panel_rule(0.0, w, panels, order)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    W = np.outer(wx, wy)
    X, Y, W = X.ravel(), Y.ravel(), W.ravel()
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.zeros_like(pts)
    for z0, sign in ((h, 1.0), (0.0, -1.0)):
        dx = pts[:, 0:1] - X
        dy = pts[:, 1:2] - Y
        dz = pts[:, 2:3] - z0
        inv = W / (dx * dx + dy * dy + dz * dz) ** 1.5
        out += sign * np.stack([(dx * inv).sum(1), (dy * inv).sum(1), (dz * inv).sum(1)], axis=1)
    return magnetization / (4 * np.pi) * out


def dipole_field(moment, points):
    """Point-dipole H field ``(3 (m.rhat) rhat - m) / (4 pi r^3)``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    m = np.asarray(moment, dtype=float)
    r = np.linalg.norm(pts, axis=1, keepdims=True)
    rhat = pts / r
    return (3 * (rhat @ m)[:, None] * rhat - m) / (4 * np.pi * r ** 3)


def td_fixpoint(P, reward, gamma):
    """Solve ``phi = reward + gamma * P @ phi`` exactly."""
    n = len(reward)
    return linalg.solve(np.eye(n) - gamma * np.asarray(P), np.asarray(reward, dtype=float))


def value_iteration(next_state, reward, terminal, gamma, tol=1e-12, max_iter=100000):
    """Optimal Q for a deterministic tabular MDP.

    ``next_state[s, a]`` and ``reward[s, a]`` describe the transitions;
    terminal states have zero value.
    """
    n_s, n_a = reward.shape
    Q = np.zeros((n_s, n_a))
    for _ in range(max_iter):
        V = np.where(terminal, 0.0, Q.max(axis=1))
        Q_new = reward + gamma * V[next_state]
        if np.max(np.abs(Q_new - Q)) < tol:
            return Q_new
        Q = Q_new
    return Q
