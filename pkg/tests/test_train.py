import numpy as np
import pytest

from mfrs.env import EnvConfig
from mfrs.nn import TrainingDivergence
from mfrs.train import METRIC_FIELDS, EpisodeMetrics, TrainConfig, Trainer, train

SMALL = dict(episodes=6, hidden=(8, 8), batch_size=16, updates_per_episode=3, quad_nodes=16)


@pytest.mark.parametrize("kwargs", [dict(episodes=0), dict(batch_size=0), dict(tau=-1.0),
                                    dict(policy="random"), dict(phi_next_action="x")])
def test_config_rejects(kwargs):
    with pytest.raises(ValueError):
        TrainConfig(**{**SMALL, **kwargs})


@pytest.mark.parametrize("kind", ["ns", "pbrs", "dpba", "mfrs"])
def test_runs_are_bitwise_reproducible(kind):
    env = EnvConfig(task="II", horizon=30)
    a = [m.row() for m in train(TrainConfig(**SMALL), env, kind, seed=4)]
    b = [m.row() for m in train(TrainConfig(**SMALL), env, kind, seed=4)]
    assert len(a) == 6
    np.testing.assert_array_equal(np.array(a, float), np.array(b, float))
    c = [m.row() for m in train(TrainConfig(**SMALL), env, kind, seed=5)]
    assert not np.array_equal(np.array(a, float), np.array(c, float))


def test_metrics_ranges():
    env = EnvConfig(task="IV", horizon=25)
    for m in train(TrainConfig(**SMALL), env, "mfrs", seed=0):
        assert m.success in (0, 1)
        assert 1 <= m.timesteps <= 25
        assert np.isfinite(m.phi_loss)
        assert len(m.row()) == len(METRIC_FIELDS)


def test_no_updates_before_a_full_batch():
    cfg = TrainConfig(**{**SMALL, "batch_size": 10_000})
    ms = list(train(cfg, EnvConfig(horizon=20), "ns", seed=0))
    assert all(np.isnan(m.critic_loss) and np.isnan(m.actor_obj) for m in ms)
    assert all(np.isnan(m.phi_loss) for m in ms)


def test_scripted_policy_obstacle_free_always_succeeds():
    cfg = TrainConfig(**{**SMALL, "episodes": 30, "policy": "scripted"})
    env = EnvConfig(task="II", obstacle_free=True)
    ms = list(train(cfg, env, "ns", seed=1))
    assert all(m.success == 1 for m in ms)
    assert all(np.isnan(m.critic_loss) for m in ms)


def test_divergence_surfaces():
    tr = Trainer(TrainConfig(**SMALL), EnvConfig(horizon=20), "ns", seed=0)
    tr.agent.critic.flat[:] = np.nan
    with pytest.raises(TrainingDivergence):
        for _ in tr.episodes():
            pass


def test_layout_hook():
    seen = []
    tr = Trainer(TrainConfig(**SMALL), EnvConfig(horizon=5), "ns", seed=0,
                 on_layout=lambda ep, env: seen.append(env.layout_rows(ep)))
    list(tr.episodes())
    assert [rows[0][0] for rows in seen] == list(range(1, 7))


def test_episode_metrics_row():
    m = EpisodeMetrics(3, 1, 17, -5.0)
    assert m.row()[:4] == (3, 1, 17, -5.0)
