"""Seeded training runs written to CSV, with an across-seed aggregate per shaper."""

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..env import NavEnv
from ..nn import TrainingDivergence, load_nets, save_nets
from ..train import METRIC_FIELDS, Trainer, make_agent
from .metrics import average_timesteps, bootstrap_ci, final_window, moving_average

SEED_FIELDS = METRIC_FIELDS + ("success_ma100",)
AGG_METRICS = ("success", "success_ma100", "timesteps", "return")


def label(shaper, ablation="full"):
    return shaper if ablation == "full" else "%s-%s" % (shaper, ablation)


def seed_path(out_dir, name, seed):
    return os.path.join(out_dir, "%s_seed%d.csv" % (name, seed))


def aggregate_path(out_dir, name):
    return os.path.join(out_dir, "%s_aggregate.csv" % name)


def nets_path(out_dir, name, seed):
    return os.path.join(out_dir, "%s_seed%d_nets.npz" % (name, seed))


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


@dataclass
class SeedResult:
    shaper: str
    ablation: str
    seed: int
    rows: list
    diverged: str = ""

    @property
    def success(self):
        return np.array([r[1] for r in self.rows], dtype=float)

    @property
    def timesteps(self):
        return np.array([r[2] for r in self.rows], dtype=float)


def run_seed(cfg, shaper, ablation, seed, layout_path=None, nets_file=None):
    """Train one seed; a divergence ends the run early and is reported, not raised.

    With ``nets_file`` the final actor and critic are saved for :func:`evaluate`.
    """
    rows, layouts = [], []
    on_layout = (lambda ep, env: layouts.extend(env.layout_rows(ep))) if layout_path else None
    trainer = Trainer(cfg.train, cfg.env, shaper, seed, ablation, on_layout=on_layout)
    diverged = ""
    try:
        for m in trainer.episodes():
            rows.append(m.row())
    except TrainingDivergence as exc:
        diverged = str(exc) or "diverged"
    if nets_file and not diverged:
        save_nets(nets_file, actor=trainer.agent.actor, critic=trainer.agent.critic)
    if layout_path:
        with open(layout_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("episode", "kind", "index", "x", "y", "z"))
            w.writerows([(e, k, i, _fmt(x), _fmt(y), _fmt(z)) for e, k, i, x, y, z in layouts])
    return SeedResult(shaper, ablation, seed, rows, diverged)


def _run_job(args):
    return run_seed(*args)


def write_seed_csv(path, rows):
    success = [r[1] for r in rows]
    ma = moving_average(success) if rows else []
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SEED_FIELDS)
        for r, m in zip(rows, ma):
            w.writerow([_fmt(v) for v in r] + [_fmt(m)])


def read_seed_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {k: np.array([float(r[k]) for r in rows]) for k in SEED_FIELDS}


def aggregate(columns):
    """Per-episode mean and bootstrap CI across seeds for each aggregated metric.

    ``columns`` is a list of dicts as returned by :func:`read_seed_csv`; runs
    are truncated to the shortest one.
    """
    n = min(len(c["episode"]) for c in columns)
    header = ["episode"]
    out = [np.arange(1, n + 1)]
    for key in AGG_METRICS:
        x = np.stack([c[key][:n] for c in columns])
        mean, lo, hi = bootstrap_ci(x)
        header += ["%s_mean" % key, "%s_ci_low" % key, "%s_ci_high" % key]
        out += [mean, lo, hi]
    return header, out


def write_aggregate_csv(path, columns):
    header, out = aggregate(columns)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(len(out[0])):
            w.writerow([str(int(out[0][i]))] + [_fmt(c[i]) for c in out[1:]])


@dataclass
class ExperimentResult:
    out_dir: str
    seeds: dict = field(default_factory=dict)  # label -> list of SeedResult

    @property
    def diverged(self):
        return [(name, r.seed, r.diverged) for name, rs in self.seeds.items() for r in rs
                if r.diverged]

    def summary(self):
        """Final-window success and average timesteps per label, per seed and mean."""
        out = {}
        for name, rs in self.seeds.items():
            ok = [r for r in rs if r.rows]
            fw = [final_window(r.success) for r in ok]
            ts = [average_timesteps(r.timesteps) for r in ok]
            out[name] = {"seeds": [r.seed for r in ok],
                         "final_success": fw, "average_timesteps": ts,
                         "final_success_mean": float(np.mean(fw)) if fw else float("nan"),
                         "average_timesteps_mean": float(np.mean(ts)) if ts else float("nan"),
                         "diverged": [r.seed for r in rs if r.diverged]}
        return out


def run_experiment(cfg, dump_layouts=False, keep_nets=False):
    """Run every (shaper, ablation, seed) job and write CSVs into ``cfg.out_dir``.

    Produces ``<label>_seed<k>.csv`` per run and ``<label>_aggregate.csv`` per
    label.  Seeds run in ``cfg.workers`` processes; a diverging seed is
    recorded and its siblings carry on.
    """
    os.makedirs(cfg.out_dir, exist_ok=True)
    jobs = []
    for shaper, ablation in cfg.jobs():
        for seed in cfg.seeds:
            lp = None
            if dump_layouts:
                lp = os.path.join(cfg.out_dir, "%s_seed%d_layouts.csv"
                                  % (label(shaper, ablation), seed))
            np_ = nets_path(cfg.out_dir, label(shaper, ablation), seed) if keep_nets else None
            jobs.append((cfg, shaper, ablation, seed, lp, np_))
    result = ExperimentResult(cfg.out_dir)

    def collect(results):
        # each seed file is written as soon as its run finishes
        for r in results:
            name = label(r.shaper, r.ablation)
            write_seed_csv(seed_path(cfg.out_dir, name, r.seed), r.rows)
            result.seeds.setdefault(name, []).append(r)

    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            collect(pool.map(_run_job, jobs))
    else:
        collect(_run_job(j) for j in jobs)
    for name, rs in result.seeds.items():
        columns = [read_seed_csv(seed_path(cfg.out_dir, name, r.seed)) for r in rs if r.rows]
        if columns:
            write_aggregate_csv(aggregate_path(cfg.out_dir, name), columns)
    return result


def load_results(out_dir, names, seeds):
    """Per-seed metric columns from an existing output directory."""
    return {n: [read_seed_csv(seed_path(out_dir, n, s)) for s in seeds] for n in names}


def evaluate(cfg, nets_file, seed, episodes=100):
    """Greedy rollouts of a saved actor on fresh layouts; returns per-episode rows.

    Layouts come from a stream derived from ``seed`` but disjoint from the
    training one, so the same call always sees the same layouts.
    """
    env = NavEnv(cfg.env)
    agent = make_agent(env, cfg.train, np.random.default_rng(0))
    actor = load_nets(nets_file)["actor"]
    if not actor.same_architecture(agent.actor):
        raise ValueError("saved actor does not match the configured network")
    agent.actor = actor
    rng = np.random.default_rng([seed, 7919])
    rows = []
    for ep in range(1, episodes + 1):
        s, _ = env.reset(rng)
        g = env.goal()
        t, done = 0, False
        while not done:
            s, _, done, info = env.step(agent.policy(s, g))
            t += 1
        rows.append((ep, int(info["episode_success"]), t))
    return rows


def write_eval_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("episode", "success", "timesteps"))
        w.writerows(rows)
