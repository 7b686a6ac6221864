"""Episode loop: act, shape, store, and train at episode end."""

from dataclasses import dataclass, field, fields

import numpy as np

from .agent import REPLAY_SIZE, DDPGAgent, Normalizer, ReplayBuffer
from .env import NavEnv
from .magnets import EPS
from .nn import TrainingDivergence
from .reward import MAGNET_BUFFER_SIZE
from .shapers import make_shaper

METRIC_FIELDS = ("episode", "success", "timesteps", "return", "critic_loss", "actor_obj",
                 "phi_loss")


@dataclass
class TrainConfig:
    episodes: int = 10000
    gamma: float = 0.99
    tau: float = 1e-3
    actor_lr: float = 3e-4
    critic_lr: float = 1e-3
    potential_lr: float = 1e-4
    batch_size: int = 128
    updates_per_episode: int = 100
    replay_size: int = REPLAY_SIZE
    magnet_buffer: int = MAGNET_BUFFER_SIZE
    noise_std: float = 0.4
    hidden: tuple = (256, 256)
    quad_nodes: int = 64
    eps: float = EPS
    policy: str = "learned"  # or "scripted"
    # action fed to the potential's TD target: noiseless policy output or the executed one
    phi_next_action: str = "behaviour"  # or "policy"

    def __post_init__(self):
        self.hidden = tuple(int(h) for h in self.hidden)
        if self.episodes < 1 or self.batch_size < 1:
            raise ValueError("episodes and batch size must be >= 1")
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float) and v < 0:
                raise ValueError("%s must be non-negative" % f.name)
        if self.policy not in ("learned", "scripted"):
            raise ValueError("policy must be 'learned' or 'scripted'")
        if self.phi_next_action not in ("policy", "behaviour"):
            raise ValueError("phi_next_action must be 'policy' or 'behaviour'")


@dataclass
class EpisodeMetrics:
    episode: int
    success: int
    timesteps: int
    ret: float
    critic_loss: float = float("nan")
    actor_obj: float = float("nan")
    phi_loss: float = float("nan")

    def row(self):
        return (self.episode, self.success, self.timesteps, self.ret, self.critic_loss,
                self.actor_obj, self.phi_loss)


def make_agent(env, cfg, rng):
    c = env.config
    mid = 0.5 * (c.low + c.high)[:c.dim]
    half = 0.5 * (c.high - c.low)[:c.dim]
    half = np.where(half > 0, half, 1.0)
    obs_norm = Normalizer(np.concatenate([mid, np.zeros(c.dim)]),
                          np.concatenate([half, np.ones(c.dim)]))
    n_goal = c.goal_dim // c.dim
    goal_norm = Normalizer(np.tile(mid, n_goal), np.tile(half, n_goal))
    return DDPGAgent(c.obs_dim, c.dim, c.goal_dim, rng, cfg.hidden, cfg.actor_lr, cfg.critic_lr,
                     cfg.gamma, cfg.tau, obs_norm, goal_norm)


def _seeded(seed):
    ss = np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in ss.spawn(5)]


class Trainer:
    """One seeded training job.

    ``on_transition(info)`` receives a dict per environment step with the
    stored transition and the reward decomposition; ``on_layout(episode,
    env)`` is called after each reset.  The same seed gives the same stream.
    """

    def __init__(self, cfg, env_config, shaper_kind, seed, ablation="full", on_transition=None,
                 on_layout=None):
        self.cfg = cfg
        self.env_rng, init_rng, self.noise_rng, self.sample_rng, pot_rng = _seeded(seed)
        self.env = NavEnv(env_config)
        self.agent = make_agent(self.env, cfg, init_rng)
        self.shaper = make_shaper(shaper_kind, self.env, cfg, pot_rng, ablation)
        c = self.env.config
        self.replay = ReplayBuffer(c.obs_dim, c.dim, c.goal_dim, cfg.replay_size)
        self.on_transition = on_transition
        self.on_layout = on_layout

    def _explore(self, a):
        if self.cfg.noise_std > 0:
            a = a + self.noise_rng.normal(0.0, self.cfg.noise_std, a.shape)
        return np.clip(a, -1.0, 1.0)

    def run_episode(self, episode):
        cfg, env, agent, shaper = self.cfg, self.env, self.agent, self.shaper
        scripted = cfg.policy == "scripted"
        s, layout = env.reset(self.env_rng)
        g = env.goal()
        shaper.begin_episode(layout)
        if self.on_layout is not None:
            self.on_layout(episode, env)
        ret, phi_losses, t = 0.0, [], 0
        a = env.scripted_action() if scripted else self._explore(agent.policy(s, g))
        while True:
            s_next, r, done, info = env.step(a)
            t += 1
            ret += r
            if scripted:
                a_next = explored = env.scripted_action()
            else:
                a_next = agent.policy(s_next, g)
                # draw the noise every step so both settings share one noise stream
                explored = self._explore(a_next)
            a_phi = explored if cfg.phi_next_action == "behaviour" else a_next
            f, phi_loss = shaper.step(s, a, s_next, a_phi, g, info["terminal"])
            if shaper.learned:
                phi_losses.append(phi_loss)
            r_shaped = r + f
            self.replay.add(s, a, s_next, r_shaped, g, info["terminal"])
            if self.on_transition is not None:
                self.on_transition({"s": s, "a": a, "s_next": s_next, "g": g, "r": r, "f": f,
                                    "r_shaped": r_shaped, "terminal": info["terminal"]})
            if done:
                break
            s = s_next
            a = explored

        c_losses, a_objs = [], []
        if not scripted and len(self.replay) >= cfg.batch_size:
            for _ in range(cfg.updates_per_episode):
                batch = self.replay.sample(self.sample_rng, cfg.batch_size)
                c_losses.append(agent.critic_update(batch))
                a_objs.append(agent.actor_update(batch))
                agent.update_targets()
        # statistics refresh strictly after the policy update
        shaper.end_episode()
        return EpisodeMetrics(
            episode, int(info["episode_success"]), t, ret,
            float(np.mean(c_losses)) if c_losses else float("nan"),
            float(np.mean(a_objs)) if a_objs else float("nan"),
            float(np.mean(phi_losses)) if phi_losses else float("nan"))

    def episodes(self):
        for episode in range(1, self.cfg.episodes + 1):
            yield self.run_episode(episode)


def train(cfg, env_config, shaper_kind, seed, ablation="full", **hooks):
    """Generator of :class:`EpisodeMetrics` for one seeded run."""
    return Trainer(cfg, env_config, shaper_kind, seed, ablation, **hooks).episodes()
