import numpy as np
import pytest

from mfrs.env import (REWARD_COLLISION, REWARD_STEP, REWARD_SUCCESS, TASKS, EnvConfig,
                      InfeasibleLayout, NavEnv, collides)
from mfrs.magnets import CuboidMagnet, SphericalMagnet


def _disjoint(a, b, margin=0.0):
    if isinstance(a, CuboidMagnet):
        a, b = b, a
    if isinstance(b, CuboidMagnet):
        return b.distance_to(a.center) > a.radius + margin
    return np.linalg.norm(a.center - b.center) > a.radius + b.radius + margin


@pytest.mark.parametrize("kwargs", [dict(dim=4), dict(task="V"), dict(horizon=0),
                                    dict(step_size=0.0), dict(success_radius=-1.0),
                                    dict(workspace_low=(1, 1, 1), workspace_high=(0, 0, 0))])
def test_config_rejects(kwargs):
    with pytest.raises(ValueError):
        EnvConfig(**kwargs)


@pytest.mark.parametrize("task", TASKS)
@pytest.mark.parametrize("dim", [2, 3])
def test_dimensions(task, dim):
    env = NavEnv(EnvConfig(task=task, dim=dim))
    s, _ = env.reset(np.random.default_rng(0))
    assert s.shape == (env.config.obs_dim,) == (2 * dim,)
    assert env.goal().shape == (env.config.goal_dim,)
    n = 1 if task in ("I", "II") else 3
    assert env.config.goal_dim == dim * (1 + n)


@pytest.mark.parametrize("task", TASKS)
def test_layouts_never_intersect(task):
    env = NavEnv(EnvConfig(task=task))
    rng = np.random.default_rng(7)
    start = env.config.start_position
    for _ in range(10_000):
        lay = env.sample_layout(rng)
        tgt = lay.target
        assert not collides(start, lay)
        assert np.linalg.norm(tgt.center - start) >= env.config.min_start_distance
        for i, o in enumerate(lay.obstacles):
            assert _disjoint(tgt, o)
            for q in lay.obstacles[i + 1:]:
                assert _disjoint(o, q)


def test_task_dynamics():
    rng = np.random.default_rng(3)
    fixed = NavEnv(EnvConfig(task="I"))
    a1, a2 = fixed.sample_layout(rng), fixed.sample_layout(rng)
    np.testing.assert_array_equal(a1.obstacle_positions, a2.obstacle_positions)
    assert not np.array_equal(a1.target_position, a2.target_position)
    moving = NavEnv(EnvConfig(task="II"))
    b1, b2 = moving.sample_layout(rng), moving.sample_layout(rng)
    assert not np.array_equal(b1.obstacle_positions, b2.obstacle_positions)
    iii = NavEnv(EnvConfig(task="III"))
    c1, c2 = iii.sample_layout(rng), iii.sample_layout(rng)
    np.testing.assert_array_equal(c1.target_position, c2.target_position)


def test_rotator_angle_bounded():
    env = NavEnv(EnvConfig(task="II"))
    rng = np.random.default_rng(1)
    for _ in range(200):
        ang = env.sample_layout(rng).obstacles[0].pose.angles
        # placement pose stores the inverse rotation
        assert abs(ang[2]) <= env.config.rotator_max_angle + 1e-12


def test_target_magnetised_toward_start():
    env = NavEnv(EnvConfig(task="IV"))
    lay = env.sample_layout(np.random.default_rng(2))
    d = env.config.start_position - lay.target_position
    # the field is strongest along the magnetisation axis, so the axial point beats a side point
    r = 2.5 * lay.target.radius
    axial = lay.target_position + r * d / np.linalg.norm(d)
    side = lay.target_position + r * np.array([-d[1], d[0], 0.0]) / np.linalg.norm(d)
    assert lay.target.intensity(axial) > lay.target.intensity(side)


def test_infeasible_layout_raises():
    cfg = EnvConfig(task="IV", min_start_distance=10.0, max_attempts=20)
    with pytest.raises(InfeasibleLayout):
        NavEnv(cfg).sample_layout(np.random.default_rng(0))


@pytest.mark.parametrize("task", TASKS)
def test_reward_values_and_flags(task):
    env = NavEnv(EnvConfig(task=task, horizon=60))
    rng = np.random.default_rng(11)
    for _ in range(20):
        env.reset(rng)
        done = False
        while not done:
            _, r, done, info = env.step(rng.uniform(-1, 1, 2))
            assert r in (REWARD_SUCCESS, REWARD_COLLISION, REWARD_STEP)
            assert (r == REWARD_SUCCESS) == info["success"]
            if info["success"]:
                assert done and info["terminal"]
            if info["episode_success"]:
                assert info["success"]
            assert not (info["terminal"] and info["truncated"])
            p = env.state.position
            assert np.all(p >= env.config.low) and np.all(p <= env.config.high)
            assert p[2] == 0.0
        assert env.state.t <= 60


def test_horizon_truncates():
    env = NavEnv(EnvConfig(task="I", horizon=5))
    env.reset(np.random.default_rng(0))
    for t in range(5):
        _, r, done, info = env.step(np.zeros(2))
        assert r == REWARD_STEP
    assert done and info["truncated"] and not info["terminal"]


def test_collision_terminates_only_when_asked():
    for flag in (False, True):
        env = NavEnv(EnvConfig(task="I", terminate_on_collision=flag))
        env.reset(np.random.default_rng(0))
        # the fixed rotator stands between start and the top half of the workspace
        info = {}
        for _ in range(40):
            _, r, done, info = env.step(np.array([0.0, 1.0]))
            if info["collision"]:
                break
        assert info["collision"] and r == REWARD_COLLISION
        assert info["terminal"] is flag
        assert done is flag


def test_action_clipped_and_observed():
    env = NavEnv(EnvConfig(task="I"))
    env.reset(np.random.default_rng(0))
    s, *_ = env.step(np.array([5.0, -5.0]))
    np.testing.assert_allclose(s[2:], [1.0, -1.0])
    np.testing.assert_allclose(s[:2], env.config.start_position[:2] + [0.02, -0.02])


@pytest.mark.parametrize("task", TASKS)
@pytest.mark.parametrize("dim", [2, 3])
def test_scripted_policy_solves_obstacle_free(task, dim):
    env = NavEnv(EnvConfig(task=task, dim=dim, obstacle_free=True))
    rng = np.random.default_rng(5)
    for _ in range(100):
        env.reset(rng)
        done = False
        while not done:
            _, r, done, info = env.step(env.scripted_action())
        assert info["episode_success"]


def test_reset_is_deterministic():
    a, b = NavEnv(EnvConfig(task="IV")), NavEnv(EnvConfig(task="IV"))
    ra, rb = np.random.default_rng(9), np.random.default_rng(9)
    for _ in range(5):
        sa, la = a.reset(ra)
        sb, lb = b.reset(rb)
        np.testing.assert_array_equal(sa, sb)
        np.testing.assert_array_equal(a.goal(), b.goal())


def test_layout_rows():
    env = NavEnv(EnvConfig(task="III"))
    env.reset(np.random.default_rng(0))
    rows = env.layout_rows(4)
    assert len(rows) == 4 and rows[0][:3] == (4, "target", 0)
    assert isinstance(env.state.layout.obstacles[0], SphericalMagnet)


def test_success_after_collision_is_not_episode_success():
    env = NavEnv(EnvConfig(task="I"))
    env.reset(np.random.default_rng(0))
    lay = env.state.layout
    # put the target straight behind the fixed bar
    lay.target = SphericalMagnet.placed(np.array([0.0, 0.33, 0.0]), 0.02)
    hit, done = False, False
    while not done:
        _, r, done, info = env.step(env.scripted_action())
        hit = hit or info["collision"]
    assert hit and info["success"] and not info["episode_success"]
