"""Distance-based comparison shapers."""

from enum import Enum

import numpy as np


class ShaperKind(str, Enum):
    NS = "ns"
    PBRS_DIST = "pbrs"
    DPBA_DIST = "dpba"
    MFRS = "mfrs"


def split_goal(g, dim):
    """``g = [P_T, P_O1, ..., P_ON]`` -> (target, (N, dim) obstacle array)."""
    g = np.asarray(g, dtype=float)
    return g[:dim], g[dim:].reshape(-1, dim)


def distance_score(agent, target, obstacles):
    """``-d(agent, target) + mean_i d(agent, obstacle_i)``; the mean of nothing is 0."""
    agent = np.asarray(agent, dtype=float)
    score = -np.linalg.norm(agent - np.asarray(target, dtype=float))
    obstacles = np.asarray(obstacles, dtype=float)
    if obstacles.size:
        score += np.mean(np.linalg.norm(agent - obstacles.reshape(-1, agent.size), axis=1))
    return float(score)


def pbrs_potential(s, g, dim):
    target, obstacles = split_goal(g, dim)
    return distance_score(np.asarray(s)[:dim], target, obstacles)


def pbrs_shaping(s, s_next, g, gamma, dim):
    return gamma * pbrs_potential(s_next, g, dim) - pbrs_potential(s, g, dim)


def dpba_distance_reward(s, g, dim):
    """Objective reward handed to the learned-potential transform (same formula as the PBRS potential)."""
    return pbrs_potential(s, g, dim)
