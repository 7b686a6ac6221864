"""Run configuration read from INI files with ``[run]``, ``[train]`` and ``[env]`` sections."""

import configparser
import os
from dataclasses import dataclass, field, fields, replace

from ..env import EnvConfig
from ..shapers import ABLATIONS
from ..train import TrainConfig

SHAPERS = ("ns", "pbrs", "dpba", "mfrs")
OUTPUT_ROOT_VAR = "MFRS_OUTPUT_ROOT"


def default_output_root():
    return os.environ.get(OUTPUT_ROOT_VAR, "runs")


@dataclass
class RunConfig:
    shapers: tuple = ("mfrs",)
    ablations: tuple = ("full",)
    seeds: tuple = (0, 1, 2, 3, 4)
    out_dir: str = ""
    workers: int = 1
    train: TrainConfig = field(default_factory=TrainConfig)
    env: EnvConfig = field(default_factory=EnvConfig)

    def __post_init__(self):
        self.shapers = tuple(self.shapers)
        self.ablations = tuple(self.ablations)
        self.seeds = tuple(int(s) for s in self.seeds)
        if not self.seeds:
            raise ValueError("need at least one seed")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("duplicate seeds")
        for s in self.shapers:
            if s not in SHAPERS:
                raise ValueError("unknown shaper %r" % (s,))
        for a in self.ablations:
            if a not in ABLATIONS:
                raise ValueError("unknown ablation %r" % (a,))
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if not self.out_dir:
            self.out_dir = os.path.join(default_output_root(), "task%s" % self.env.task)

    def jobs(self):
        """``(shaper, ablation)`` pairs; ablations only apply to MFRS."""
        out = []
        for s in self.shapers:
            if s == "mfrs":
                out += [(s, a) for a in self.ablations]
            else:
                out.append((s, "full"))
        return out


def _coerce(text, default):
    text = text.strip()
    if isinstance(default, bool):
        return text.lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    if isinstance(default, tuple):
        items = [t.strip() for t in text.split(",") if t.strip()]
        kind = type(default[0]) if default else float
        if kind is str:
            return tuple(items)
        return tuple(kind(float(t)) if kind is int else kind(t) for t in items)
    return text


def _section(parser, name, cls, base):
    if not parser.has_section(name):
        return base
    known = {f.name: f for f in fields(cls) if f.init}
    updates = {}
    for key, text in parser.items(name):
        if key not in known:
            raise ValueError("unknown key %r in [%s]" % (key, name))
        updates[key] = _coerce(text, getattr(base, key))
    return replace(base, **updates)


def load_config(path=None, **overrides):
    """Build a :class:`RunConfig` from an INI file plus keyword overrides.

    Overrides use the dotted names ``train.<key>`` and ``env.<key>`` or plain
    ``[run]`` keys; ``None`` values are ignored.
    """
    parser = configparser.ConfigParser()
    if path is not None:
        with open(path) as fh:
            parser.read_file(fh)
    train = _section(parser, "train", TrainConfig, TrainConfig())
    env = _section(parser, "env", EnvConfig, EnvConfig())
    run = _section(parser, "run", RunConfig, RunConfig(train=train, env=env, out_dir="-"))
    run_updates, train_updates, env_updates = {}, {}, {}
    for key, value in overrides.items():
        if value is None:
            continue
        if key.startswith("train."):
            train_updates[key[6:]] = value
        elif key.startswith("env."):
            env_updates[key[4:]] = value
        else:
            run_updates[key] = value
    train = replace(train, **train_updates)
    env = replace(env, **env_updates)
    out_dir = run_updates.pop("out_dir", None) or ("" if run.out_dir == "-" else run.out_dir)
    return replace(run, train=train, env=env, out_dir=out_dir, **run_updates)


def dump_config(cfg):
    """INI text describing ``cfg`` (round-trips through :func:`load_config`)."""
    def fmt(v):
        if isinstance(v, tuple):
            return ", ".join(str(x) for x in v)
        return repr(float(v)) if isinstance(v, float) else str(v)

    lines = ["[run]"]
    for key in ("shapers", "ablations", "seeds", "workers", "out_dir"):
        lines.append("%s = %s" % (key, fmt(getattr(cfg, key))))
    for name, obj in (("train", cfg.train), ("env", cfg.env)):
        lines += ["", "[%s]" % name]
        lines += ["%s = %s" % (f.name, fmt(getattr(obj, f.name))) for f in fields(obj) if f.init]
    return "\n".join(lines) + "\n"
