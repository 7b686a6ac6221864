"""Shaping strategies plugged into the training loop.

Each shaper sees one transition at a time and returns ``(f, potential_loss)``.
Learned shapers all share :class:`~mfrs.potential.PotentialFn`; they differ only
in the objective reward they ask the potential to express.
"""

import numpy as np

from .baselines import distance_score, pbrs_potential
from .magnets import EPS, QuadratureSpec
from .potential import PotentialFn
from .reward import FieldStats, combine, intensities, magnetic_reward_from

NAN = float("nan")


class NoShaping:
    learned = False

    def begin_episode(self, layout):
        pass

    def step(self, s, a, s_next, a_next, g, terminal):
        return 0.0, NAN

    def end_episode(self):
        pass


class StatePotentialShaping:
    """``f = gamma * phi(s') - phi(s)`` for a state potential (0 at termination).

    Within an episode ``phi(s_t)`` is reused from the previous step; the
    first state is evaluated with ``potential.peek`` when available so that
    recording potentials only see each visited state once.
    """

    learned = False

    def __init__(self, potential, gamma):
        self.potential = potential
        self.gamma = gamma
        self._cached = None

    def begin_episode(self, layout):
        self._cached = None
        if hasattr(self.potential, "begin_episode"):
            self.potential.begin_episode(layout)

    def step(self, s, a, s_next, a_next, g, terminal):
        if self._cached is None:
            peek = getattr(self.potential, "peek", self.potential)
            self._cached = peek(s, g)
        phi_next = self.potential(s_next, g)
        f = self.gamma * (0.0 if terminal else phi_next) - self._cached
        self._cached = phi_next
        return f, NAN

    def end_episode(self):
        if hasattr(self.potential, "end_episode"):
            self.potential.end_episode()


class LearnedShaping:
    """Potential over (s, a, g) trained online so that ``E[f]`` tracks ``objective``."""

    learned = True

    def __init__(self, objective, potential):
        self.objective = objective
        self.potential = potential

    def begin_episode(self, layout):
        self.objective.begin_episode(layout)

    def step(self, s, a, s_next, a_next, g, terminal):
        r_obj = self.objective(s_next, g)
        return self.potential.td_step(s, a, s_next, a_next, g, r_obj, terminal)

    def end_episode(self):
        self.objective.end_episode()


# -- objectives ----------------------------------------------------------


class _PositionObjective:
    def __init__(self, agent_position):
        self.agent_position = agent_position
        self.layout = None

    def begin_episode(self, layout):
        self.layout = layout

    def end_episode(self):
        pass


class MagneticObjective(_PositionObjective):
    """Magnetic reward at the agent's position; raw intensities feed the magnet buffer.

    With ``normalize=False`` the raw combination ``H_T - mean H_O`` is returned
    instead (no z-scores, no Softsign).
    """

    def __init__(self, agent_position, n_obstacles, capacity, quad=None, eps=EPS,
                 normalize=True):
        super().__init__(agent_position)
        self.stats = FieldStats(n_obstacles, capacity)
        self.quad = quad or QuadratureSpec()
        self.eps = eps
        self.normalize = normalize

    def _evaluate(self, s, record):
        h_t, h_o = intensities(self.agent_position(s), self.layout, self.quad)
        if record:
            self.stats.insert(h_t, h_o)
        if not self.normalize:
            return float(combine(h_t, h_o))
        return magnetic_reward_from(h_t, h_o, self.stats, self.eps)

    def __call__(self, s, g):
        return self._evaluate(s, True)

    def peek(self, s, g):
        return self._evaluate(s, False)

    def end_episode(self):
        self.stats.update()


class MagneticPotential(MagneticObjective):
    """Magnetic reward used directly as a state potential."""


class DistanceObjective(_PositionObjective):
    """``-d(agent, target) + mean_i d(agent, obstacle_i)`` between centre points."""

    def __call__(self, s, g):
        p = self.agent_position(s)
        return distance_score(p, self.layout.target_position, self.layout.obstacle_positions)


class DistanceFieldObjective(_PositionObjective):
    """Magnetic pipeline with negated centre distances in place of intensities."""

    def __init__(self, agent_position, n_obstacles, capacity, eps=EPS):
        super().__init__(agent_position)
        self.stats = FieldStats(n_obstacles, capacity)
        self.eps = eps

    def __call__(self, s, g):
        p = self.agent_position(s)
        h_t = -float(np.linalg.norm(p - self.layout.target_position))
        h_o = np.array([-float(np.linalg.norm(p - q)) for q in self.layout.obstacle_positions])
        self.stats.insert(h_t, h_o)
        return magnetic_reward_from(h_t, h_o, self.stats, self.eps)

    def end_episode(self):
        self.stats.update()


ABLATIONS = ("full", "no-mf", "no-nt", "no-srt")


def make_shaper(kind, env, cfg, rng, ablation="full"):
    """Build the shaper for ``kind`` (a :class:`~mfrs.baselines.ShaperKind` value)."""
    kind = getattr(kind, "value", kind)
    c = env.config
    pos = env.agent_position
    in_dim = c.obs_dim + c.dim + c.goal_dim
    quad = QuadratureSpec(cfg.quad_nodes, cfg.quad_nodes)

    def potential():
        return PotentialFn(in_dim, cfg.hidden, cfg.potential_lr, cfg.gamma, rng)

    if kind == "ns":
        return NoShaping()
    if kind == "pbrs":
        return StatePotentialShaping(lambda s, g: pbrs_potential(s, g, c.dim), cfg.gamma)
    if kind == "dpba":
        return LearnedShaping(DistanceObjective(pos), potential())
    if kind != "mfrs":
        raise ValueError("unknown shaper %r" % (kind,))
    if ablation == "full":
        return LearnedShaping(MagneticObjective(pos, c.n_obstacles, cfg.magnet_buffer, quad,
                                                cfg.eps), potential())
    if ablation == "no-mf":
        return LearnedShaping(DistanceFieldObjective(pos, c.n_obstacles, cfg.magnet_buffer,
                                                     cfg.eps), potential())
    if ablation == "no-nt":
        return LearnedShaping(MagneticObjective(pos, c.n_obstacles, cfg.magnet_buffer, quad,
                                                cfg.eps, normalize=False), potential())
    if ablation == "no-srt":
        return StatePotentialShaping(MagneticPotential(pos, c.n_obstacles, cfg.magnet_buffer,
                                                       quad, cfg.eps), cfg.gamma)
    raise ValueError("unknown ablation %r" % (ablation,))
