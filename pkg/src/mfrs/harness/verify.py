"""Property suites with measured residuals; the report is plain JSON-ready data.

Each suite returns ``{"suite", "passed", "properties": [...]}`` where every
property carries ``name``, ``value``, ``threshold`` and ``passed``.  Nothing
time-dependent goes into a report, so repeated runs are identical.
"""

import numpy as np

from ..geometry import (MagnetPose, align_magnetization_toward, from_magnet_frame,
                        rotation_matrix, to_magnet_frame)
from ..gradcheck import mlp_gradient_error
from ..gridworld import GridWorld, MagneticGridObjective, episodes_to_rate, greedy_policy, \
    q_learning, reachable
from ..magnets import CuboidMagnet, QuadratureSpec, SphericalMagnet, axial_sphere_intensity, \
    cuboid_field, sphere_intensity
from ..nn import Mlp
from ..oracles import cuboid_charge_field, td_fixpoint
from ..potential import expected_td_sweeps, policy_transition, expected_shaping_check
from ..reward import FieldStats, combine, softsign, standardize

SUITES = ("geometry", "magnets", "pipeline", "shaping", "invariance", "gradcheck")


def _plain(v):
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    return float(v)


def _prop(name, value, threshold, passed=None, **extra):
    value, threshold = _plain(value), _plain(threshold)
    if passed is None:
        passed = bool(value < threshold)
    out = {"name": name, "value": value, "threshold": threshold, "passed": bool(passed)}
    out.update(extra)
    return out


def _suite(name, props):
    return {"suite": name, "passed": all(p["passed"] for p in props), "properties": props}


# -- geometry ---------------------------------------------------------------


def geometry_suite(seed=0):
    rng = np.random.default_rng(seed)
    ortho, det, trip, align = 0.0, 0.0, 0.0, 0.0
    for _ in range(200):
        ang = rng.uniform(-np.pi, np.pi, 3)
        R = rotation_matrix(ang)
        ortho = max(ortho, np.abs(R.T @ R - np.eye(3)).max())
        det = max(det, abs(np.linalg.det(R) - 1.0))
        pose = MagnetPose(rng.normal(size=3), ang)
        p = rng.normal(size=(5, 3))
        trip = max(trip, np.abs(from_magnet_frame(to_magnet_frame(p, pose), pose) - p).max())
        a, b = rng.normal(size=3), rng.normal(size=3)
        d = (b - a) / np.linalg.norm(b - a)
        z = rotation_matrix(align_magnetization_toward(a, b))[:, 2]
        align = max(align, np.abs(z - d).max())
    return _suite("geometry", [
        _prop("rotation_orthonormal", ortho, 1e-12),
        _prop("rotation_determinant", det, 1e-12),
        _prop("frame_round_trip", trip, 1e-12),
        _prop("align_toward_focus", align, 1e-12),
    ])


# -- magnets ------------------------------------------------------------------


def cuboid_exterior_points(size, n=20, seed=0):
    """Points outside the box ``[0,l]x[0,w]x[0,h]``, at least a tenth of its diagonal away."""
    rng = np.random.default_rng(seed)
    size = np.asarray(size, dtype=float)
    diag = np.linalg.norm(size)
    pts = []
    while len(pts) < n:
        p = rng.uniform(-0.75 * diag, size + 0.75 * diag)
        gap = np.maximum(np.maximum(-p, p - size), 0.0)
        if np.linalg.norm(gap) >= 0.1 * diag:
            pts.append(p)
    return np.array(pts)


def cuboid_oracle_error(size=(0.1, 0.4, 0.05), n=20, seed=0):
    m = CuboidMagnet(*size)
    pts = cuboid_exterior_points(size, n, seed)
    h = cuboid_field(m, pts)
    ref = cuboid_charge_field(size, m.magnetization, pts)
    return float(np.max(np.linalg.norm(h - ref, axis=1) / np.linalg.norm(ref, axis=1)))


def sphere_axial_error(nodes, radius=1.0, heights=(1.5, 2.0, 4.0)):
    m = SphericalMagnet(radius)
    z = radius * np.asarray(heights)
    pts = np.stack([np.zeros_like(z), np.zeros_like(z), z], axis=1)
    h = sphere_intensity(m, pts, QuadratureSpec(nodes, nodes))
    ref = axial_sphere_intensity(m, z)
    return float(np.max(np.abs(h - ref) / ref))


def magnets_suite():
    return _suite("magnets", [
        _prop("cuboid_vs_surface_charge_oracle", cuboid_oracle_error(), 1e-3),
        _prop("sphere_axial_64", sphere_axial_error(64), 1e-2),
        _prop("sphere_axial_128", sphere_axial_error(128), 1e-3),
    ])


# -- reward pipeline ------------------------------------------------------------


def pipeline_suite():
    xs = np.linspace(-50, 50, 2001)
    s = softsign(xs)
    props = [
        _prop("softsign_bounded", bool(np.all(np.abs(s) < 1)), True, bool(np.all(np.abs(s) < 1))),
        _prop("softsign_increasing", bool(np.all(np.diff(s) > 0)), True,
              bool(np.all(np.diff(s) > 0))),
        _prop("softsign_odd", bool(np.array_equal(softsign(-xs), -s)), True,
              bool(np.array_equal(softsign(-xs), -s))),
        _prop("softsign_values", [softsign(0.0), softsign(1.0), softsign(-3.0)], [0.0, 0.5, -0.75],
              softsign(0.0) == 0.0 and softsign(1.0) == 0.5 and softsign(-3.0) == -0.75),
        _prop("standardize_centered", standardize(2.5, 2.5, 0.3), 0.0,
              standardize(2.5, 2.5, 0.3) == 0.0),
        _prop("standardize_degenerate_sigma", standardize(1e-7, 0.0, 0.0, 1e-7), 1.0,
              standardize(1e-7, 0.0, 0.0, 1e-7) == 1.0),
        _prop("combine_mean_of_obstacles", combine(1.0, [0.5, 0.5]), 0.5,
              combine(1.0, [0.5, 0.5]) == 0.5),
        _prop("combine_zeros", combine(0.0, [0.0, 0.0, 0.0]), 0.0,
              combine(0.0, [0.0, 0.0, 0.0]) == 0.0),
        _prop("combine_no_obstacles", combine(0.7, []), 0.7, combine(0.7, []) == 0.7),
    ]
    stats = FieldStats(2)
    for v in ([1.0, 1.0, 1.0],):
        for x in v:
            stats.insert(x, [0.0, 2.0])
    stats.update()
    props.append(_prop("population_std_constant", float(stats.sigma[0]), 0.0,
                       stats.sigma[0] == 0.0 and stats.mu[0] == 1.0))
    return _suite("pipeline", props)


# -- expected shaping ---------------------------------------------------------------


def chain_problem(n=4):
    """Deterministic right-moving chain with an absorbing terminal end."""
    T = np.zeros((n, 1, n))
    for s in range(n - 1):
        T[s, 0, s + 1] = 1.0
    T[n - 1, 0, n - 1] = 1.0
    terminal = np.zeros(n, bool)
    terminal[-1] = True
    r = np.linspace(-0.5, 0.75, n)[:, None]
    return T, np.ones((n, 1)), r, terminal


def grid_problem(size=5):
    """Uniform random policy on a small gridworld; the objective is the magnetic reward."""
    world = GridWorld(size=size, start=(size - 1, size // 2), goal=(0, size // 2),
                      obstacle=(size // 2, size // 2 - 1))
    nxt, _, terminal = world.tables()
    T = np.zeros((world.n_states, 4, world.n_states))
    T[np.arange(world.n_states)[:, None], np.arange(4)[None, :], nxt] = 1.0
    obj = MagneticGridObjective(world)
    for s in range(world.n_states):
        obj(s)
    obj.end_episode()
    rm = np.array([obj(s) for s in range(world.n_states)])
    return T, np.full((world.n_states, 4), 0.25), rm[nxt], terminal


def _shaping_props(name, T, policy, r, terminal, gamma):
    gap = expected_shaping_check(T, policy, r, gamma, lr=0.5, terminal=terminal)
    M = policy_transition(T, policy, terminal)
    phi, _, _ = expected_td_sweeps(M, r, gamma, 0.5, 10 ** 5)
    oracle = td_fixpoint(M, -np.asarray(r, dtype=float).ravel(), gamma)
    return [_prop("%s_expected_shaping_gap" % name, gap, 1e-3),
            _prop("%s_td_fixpoint_vs_linear_oracle" % name, np.abs(phi - oracle).max(), 1e-6)]


def shaping_suite(gamma=0.9):
    props = _shaping_props("chain4", *chain_problem(4), gamma)
    props += _shaping_props("grid5x5", *grid_problem(5), gamma)
    return _suite("shaping", props)


# -- policy invariance --------------------------------------------------------


def invariance_suite(runs=20, episodes=5000, rate=0.95, speedup=0.5):
    world = GridWorld()
    sparse, shaped, agree = [], [], []
    for seed in range(runs):
        qs, ss, _ = q_learning(world, episodes, seed, shaped=False)
        qp, sp, _ = q_learning(world, episodes, seed, shaped=True)
        sparse.append(ss)
        shaped.append(sp)
        ps, pp = greedy_policy(qs), greedy_policy(qp)
        states = sorted(set(reachable(world, ps)) | set(reachable(world, pp)))
        agree.append(bool(np.array_equal(ps[states], pp[states])))
    n_sparse = episodes_to_rate(sparse, rate)
    n_shaped = episodes_to_rate(shaped, rate)
    ratio = (float("inf") if n_shaped is None or n_sparse is None
             else n_shaped / n_sparse)
    return _suite("invariance", [
        _prop("greedy_policies_identical", sum(agree), runs, sum(agree) == runs, runs=runs),
        _prop("episodes_to_95pct_ratio", ratio, speedup, ratio <= speedup,
              sparse_episodes=n_sparse, shaped_episodes=n_shaped),
    ])


# -- gradients --------------------------------------------------------------------


def gradcheck_suite(seed=0, hidden=(256, 256), probes=64, obs_dim=4, act_dim=2, goal_dim=4):
    rng = np.random.default_rng(seed)
    nets = {
        "actor": Mlp([obs_dim + goal_dim, *hidden, act_dim], rng, out_activation="tanh"),
        "critic": Mlp([obs_dim + act_dim + goal_dim, *hidden, 1], rng),
        "potential": Mlp([obs_dim + act_dim + goal_dim, *hidden, 1], rng),
    }
    # the potential starts at zero; perturb it so the check sees a generic point
    nets["potential"].weights[-1][:] = rng.uniform(-0.05, 0.05, nets["potential"].weights[-1].shape)
    return _suite("gradcheck", [
        _prop("%s_max_relative_error" % k, mlp_gradient_error(net, rng, probes=probes), 1e-4)
        for k, net in nets.items()])


def verify(suite="all"):
    """Run one suite (or ``"all"``) and return the report dictionary."""
    table = {"geometry": geometry_suite, "magnets": magnets_suite, "pipeline": pipeline_suite,
             "shaping": shaping_suite, "invariance": invariance_suite,
             "gradcheck": gradcheck_suite}
    names = SUITES if suite == "all" else (suite,)
    for n in names:
        if n not in table:
            raise ValueError("unknown suite %r" % (n,))
    reports = [table[n]() for n in names]
    return {"passed": all(r["passed"] for r in reports), "suites": reports}
