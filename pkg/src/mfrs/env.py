"""Point-mass navigation toward a magnet target among magnet obstacles.

Four goal-dynamics regimes:

* ``I``   single cuboid rotator at a fixed angle, target resampled
* ``II``  rotator angle and target both resampled
* ``III`` three spherical obstacles resampled, target fixed
* ``IV``  target and three spherical obstacles resampled

In 2-D the agent moves in the ``z = 0`` plane that cuts every magnet
through its centre.
"""

from dataclasses import dataclass, field

import numpy as np

from .geometry import align_magnetization_toward, rot_z
from .magnets import CuboidMagnet, SphericalMagnet
from .reward import GoalLayout

REWARD_SUCCESS = 100.0
REWARD_COLLISION = -10.0
REWARD_STEP = -1.0
TASKS = ("I", "II", "III", "IV")


class InfeasibleLayout(RuntimeError):
    pass


@dataclass
class EnvConfig:
    dim: int = 2
    task: str = "II"
    workspace_low: tuple = (-0.35, -0.35, 0.0)
    workspace_high: tuple = (0.35, 0.35, 0.3)
    start: tuple = (0.0, -0.3, 0.15)
    step_size: float = 0.02
    success_radius: float = 0.02
    horizon: int = 200
    terminate_on_collision: bool = False
    obstacle_free: bool = False
    target_radius: float = 0.02
    cuboid_size: tuple = (0.1, 0.4, 0.05)
    rotator_pivot: tuple = (0.0, -0.1, 0.15)
    rotator_max_angle: float = float(np.deg2rad(60.0))
    sphere_radii: tuple = (0.02, 0.04, 0.06)
    fixed_target: tuple = (0.0, 0.25, 0.15)
    min_start_distance: float = 0.1
    clearance: float = 0.01
    max_attempts: int = 10 ** 4

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError("dim must be 2 or 3")
        if self.task not in TASKS:
            raise ValueError("task must be one of %s" % (TASKS,))
        if self.success_radius <= 0 or self.horizon < 1 or self.step_size <= 0:
            raise ValueError("success radius, step size and horizon must be positive")
        lo, hi = self.low, self.high
        if np.any(hi[:self.dim] <= lo[:self.dim]):
            raise ValueError("empty workspace")

    def _plane(self, p):
        p = np.array(p, dtype=float)
        if self.dim == 2:
            p[2] = 0.0
        return p

    @property
    def low(self):
        return self._plane(self.workspace_low)

    @property
    def high(self):
        return self._plane(self.workspace_high)

    @property
    def start_position(self):
        return self._plane(self.start)

    @property
    def obs_dim(self):
        return 2 * self.dim

    @property
    def n_obstacles(self):
        if self.obstacle_free:
            return 0
        return 1 if self.task in ("I", "II") else len(self.sphere_radii)

    @property
    def goal_dim(self):
        return self.dim * (1 + self.n_obstacles)


def collides(p, layout):
    """True when ``p`` lies in (or on) any obstacle."""
    return any(bool(o.contains(p)) for o in layout.obstacles)


def _clear_of(center, radius, magnet, margin):
    if isinstance(magnet, CuboidMagnet):
        return magnet.distance_to(center) > radius + margin
    return np.linalg.norm(center - magnet.center) > radius + magnet.radius + margin


@dataclass
class EnvState:
    position: np.ndarray
    last_action: np.ndarray
    layout: GoalLayout
    t: int = 0
    collided: bool = False
    info: dict = field(default_factory=dict)


class NavEnv:
    def __init__(self, config=None):
        self.config = config or EnvConfig()
        self.state = None

    # -- sampling -------------------------------------------------------
    def _uniform(self, rng):
        c = self.config
        p = rng.uniform(c.low, c.high) if c.dim == 3 else np.append(
            rng.uniform(c.low[:2], c.high[:2]), 0.0)
        return p

    def _rotator(self, angle):
        c = self.config
        pivot = c._plane(c.rotator_pivot)
        center = pivot + rot_z(angle) @ np.array([0.0, c.cuboid_size[1] / 2, 0.0])
        return CuboidMagnet.placed(center, c.cuboid_size, (0.0, 0.0, angle))

    def _sample_obstacles(self, rng):
        c = self.config
        if c.obstacle_free:
            return []
        if c.task == "I":
            return [self._rotator(0.0)]
        if c.task == "II":
            return [self._rotator(rng.uniform(-c.rotator_max_angle, c.rotator_max_angle))]
        return None  # spheres are placed jointly with the target

    def _target_ok(self, p, obstacles):
        c = self.config
        if np.linalg.norm(p - c.start_position) < c.min_start_distance:
            return False
        return all(_clear_of(p, c.target_radius, o, c.clearance) for o in obstacles)

    def sample_layout(self, rng):
        c = self.config
        start = c.start_position
        for _ in range(c.max_attempts):
            obstacles = self._sample_obstacles(rng)
            if obstacles is None:
                target = c._plane(c.fixed_target) if c.task == "III" else self._uniform(rng)
                obstacles, ok = [], True
                for r in c.sphere_radii:
                    center = self._uniform(rng)
                    s = SphericalMagnet.placed(center, r)
                    if (np.linalg.norm(center - target) <= r + c.target_radius + c.clearance
                            or not all(_clear_of(center, r, o, c.clearance) for o in obstacles)
                            or np.linalg.norm(center - start) <= r + c.clearance):
                        ok = False
                        break
                    obstacles.append(s)
                if not ok or np.linalg.norm(target - start) < c.min_start_distance:
                    continue
            else:
                target = self._uniform(rng)
                if not self._target_ok(target, obstacles):
                    continue
                if any(o.contains(start) for o in obstacles):
                    continue
            orient = align_magnetization_toward(target, start)
            return GoalLayout(SphericalMagnet.placed(target, c.target_radius, orient), obstacles)
        raise InfeasibleLayout("no feasible layout after %d attempts" % c.max_attempts)

    # -- dynamics -------------------------------------------------------
    def observation(self):
        st = self.state
        return np.concatenate([st.position[:self.config.dim], st.last_action])

    def goal(self):
        return self.state.layout.goal_vector(self.config.dim)

    def agent_position(self, s):
        """3-D position embedded in an observation vector."""
        p = np.zeros(3)
        p[:self.config.dim] = s[:self.config.dim]
        return p

    def reset(self, rng):
        c = self.config
        layout = self.sample_layout(rng)
        self.state = EnvState(c.start_position.copy(), np.zeros(c.dim), layout)
        return self.observation(), layout

    def step(self, action):
        c, st = self.config, self.state
        a = np.clip(np.asarray(action, dtype=float), -1.0, 1.0)
        move = np.zeros(3)
        move[:c.dim] = c.step_size * a
        st.position = np.clip(st.position + move, c.low, c.high)
        st.last_action = a
        st.t += 1
        success = np.linalg.norm(st.position - st.layout.target_position) <= c.success_radius
        hit = collides(st.position, st.layout) or (c.dim == 3 and st.position[2] <= c.low[2])
        st.collided = st.collided or hit
        if success:
            r = REWARD_SUCCESS
        elif hit:
            r = REWARD_COLLISION
        else:
            r = REWARD_STEP
        terminal = bool(success or (hit and c.terminate_on_collision))
        truncated = not terminal and st.t >= c.horizon
        info = {"success": bool(success), "collision": bool(hit), "terminal": terminal,
                "truncated": truncated, "episode_success": bool(success and not st.collided)}
        return self.observation(), r, terminal or truncated, info

    def scripted_action(self):
        """Straight line toward the target centre."""
        st = self.state
        d = (st.layout.target_position - st.position)[:self.config.dim]
        return np.clip(d / self.config.step_size, -1.0, 1.0)

    def layout_rows(self, episode):
        """Rows ``(episode, kind, idx, x, y, z)`` describing the current layout."""
        lay = self.state.layout
        rows = [(episode, "target", 0, *lay.target_position)]
        rows += [(episode, "obstacle", i, *p) for i, p in enumerate(lay.obstacle_positions)]
        return rows
