"""Command line entry point: ``mfrs train|ablate|eval|field|verify``.

Every command writes plain files (CSV, JSON, INI) and prints a JSON summary
on stdout.  The exit code is 1 when a verify property fails or a training
seed diverges, 2 for usage errors, and 0 otherwise.
"""

import argparse
import json
import os
import sys

import numpy as np

from .env import NavEnv
from .harness.config import OUTPUT_ROOT_VAR, default_output_root, dump_config, load_config
from .harness.experiment import evaluate, label, nets_path, run_experiment, write_eval_csv
from .harness.field import dump_field_grid, lattice_points
from .harness.verify import SUITES, verify
from .magnets import CuboidMagnet, QuadratureSpec, SphericalMagnet, intensity_at
from .reward import FieldStats


def _ints(text):
    return tuple(int(t) for t in text.split(",") if t.strip())


def _names(text):
    return tuple(t.strip() for t in text.split(",") if t.strip())


def _run_options(p, shaper=True):
    p.add_argument("--config", help="INI file with [run], [train] and [env] sections")
    p.add_argument("--task", choices=("I", "II", "III", "IV"))
    if shaper:
        p.add_argument("--shaper", type=_names, help="comma list of ns, pbrs, dpba, mfrs")
    p.add_argument("--seeds", type=_ints, help="comma list of integer seeds")
    p.add_argument("--episodes", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--out", help="output directory (default $%s/task<X>)" % OUTPUT_ROOT_VAR)
    p.add_argument("--workers", type=int, help="parallel seed workers")


def _config(args, **extra):
    return load_config(args.config, out_dir=args.out, seeds=args.seeds,
                       workers=args.workers, shapers=getattr(args, "shaper", None),
                       **{"env.task": args.task, "env.horizon": args.horizon,
                          "train.episodes": args.episodes}, **extra)


def _emit(obj):
    print(json.dumps(obj, indent=2, sort_keys=True))


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _train(cfg, args):
    os.makedirs(cfg.out_dir, exist_ok=True)
    with open(os.path.join(cfg.out_dir, "config.ini"), "w") as fh:
        fh.write(dump_config(cfg))
    result = run_experiment(cfg, dump_layouts=args.dump_layouts, keep_nets=args.save_nets)
    summary = {"out_dir": cfg.out_dir, "results": result.summary(),
               "diverged": [list(d) for d in result.diverged]}
    _write_json(os.path.join(cfg.out_dir, "summary.json"), summary)
    _emit(summary)
    return 1 if result.diverged else 0


def cmd_train(args):
    ablation = [a for a, on in (("no-mf", args.no_mf), ("no-nt", args.no_nt),
                                ("no-srt", args.no_srt)) if on]
    if len(ablation) > 1:
        raise SystemExit("train takes at most one ablation flag; use 'ablate' for several")
    extra = {"ablations": tuple(ablation)} if ablation else {}
    return _train(_config(args, **extra), args)


def cmd_ablate(args):
    chosen = [a for a, on in (("no-mf", args.no_mf), ("no-nt", args.no_nt),
                              ("no-srt", args.no_srt)) if on]
    ablations = ("full",) + tuple(chosen or ("no-mf", "no-nt", "no-srt"))
    cfg = _config(args, ablations=ablations)
    cfg.shapers = ("mfrs",)
    return _train(cfg, args)


def cmd_eval(args):
    cfg = _config(args)
    summary = {}
    for shaper, ablation in cfg.jobs():
        name = label(shaper, ablation)
        per_seed = {}
        for seed in cfg.seeds:
            path = nets_path(cfg.out_dir, name, seed)
            if not os.path.exists(path):
                raise SystemExit("missing %s (train with --save-nets first)" % path)
            rows = evaluate(cfg, path, seed, args.eval_episodes)
            write_eval_csv(os.path.join(cfg.out_dir, "%s_seed%d_eval.csv" % (name, seed)), rows)
            per_seed[str(seed)] = {"success_rate": float(np.mean([r[1] for r in rows])),
                                   "average_timesteps": float(np.mean([r[2] for r in rows]))}
        summary[name] = per_seed
    _emit(summary)
    return 0


def _axis(text):
    lo, hi, n = text.split(":")
    return np.linspace(float(lo), float(hi), int(n))


def _scene(args):
    if args.scene == "sphere":
        return [SphericalMagnet.placed((0.0, 0.0, 0.0), args.radius)]
    if args.scene == "cuboid":
        return [CuboidMagnet.placed((0.0, 0.0, 0.0), (0.1, 0.4, 0.05))]
    if args.scene == "empty":
        return []
    cfg = load_config(args.config, **{"env.task": args.task})
    env = NavEnv(cfg.env)
    _, layout = env.reset(np.random.default_rng(args.seed))
    return layout.magnets


def cmd_field(args):
    lattice = [_axis(args.x), _axis(args.y), _axis(args.z)]
    magnets = _scene(args)
    quad = QuadratureSpec(args.quad_nodes, args.quad_nodes)
    stats = None
    if args.quantity == "Rm":
        if not magnets:
            raise SystemExit("the Rm landscape needs at least a target magnet")
        # fixed statistics: population moments of each magnet's intensity over the lattice
        pts = lattice_points(lattice)
        h = np.stack([intensity_at(m, pts, quad) for m in magnets], axis=1)
        stats = FieldStats(len(magnets) - 1)
        for row in h:
            stats.insert(row[0], row[1:])
        stats.update()
    os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
    n = dump_field_grid(magnets, lattice, args.out, args.quantity, stats, quad)
    _emit({"path": args.out, "rows": n, "quantity": args.quantity, "magnets": len(magnets)})
    return 0


def cmd_verify(args):
    report = verify(args.suite)
    path = args.report or os.path.join(default_output_root(), "verify_%s.json" % args.suite)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    _write_json(path, report)
    _emit({"passed": report["passed"], "report": path,
           "suites": {s["suite"]: s["passed"] for s in report["suites"]}})
    return 0 if report["passed"] else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="mfrs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, helptext in (("train", cmd_train, "train shapers over seeds"),
                               ("ablate", cmd_ablate, "train MFRS and its ablations")):
        p = sub.add_parser(name, help=helptext)
        _run_options(p, shaper=name == "train")
        p.add_argument("--no-mf", action="store_true", help="distance in place of the field")
        p.add_argument("--no-nt", action="store_true", help="raw intensities, no normalization")
        p.add_argument("--no-srt", action="store_true", help="R^m used directly as the potential")
        p.add_argument("--dump-layouts", action="store_true",
                       help="write per-episode magnet placements")
        p.add_argument("--save-nets", action="store_true", help="keep final networks for eval")
        p.set_defaults(func=fn)

    p = sub.add_parser("eval", help="greedy rollouts of networks saved by train --save-nets")
    _run_options(p)
    p.add_argument("--eval-episodes", type=int, default=100)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("field", help="dump |H| or R^m on a lattice as CSV")
    p.add_argument("--scene", choices=("sphere", "cuboid", "layout", "empty"), default="sphere")
    p.add_argument("--radius", type=float, default=0.02, help="sphere radius")
    p.add_argument("--config")
    p.add_argument("--task", choices=("I", "II", "III", "IV"))
    p.add_argument("--seed", type=int, default=0, help="layout seed for --scene layout")
    p.add_argument("--quantity", choices=("H", "Rm"), default="H")
    p.add_argument("--x", default="-0.3:0.3:31", help="lo:hi:n")
    p.add_argument("--y", default="-0.3:0.3:31", help="lo:hi:n")
    p.add_argument("--z", default="0.1:0.1:1", help="lo:hi:n")
    p.add_argument("--quad-nodes", type=int, default=64)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("verify", help="run property suites and write a JSON report")
    p.add_argument("--suite", choices=("all",) + SUITES, default="all")
    p.add_argument("--report", help="report path (default $%s/verify_<suite>.json)"
                   % OUTPUT_ROOT_VAR)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "func", None) is cmd_field and args.out is None:
        args.out = os.path.join(default_output_root(), "field_%s_%s.csv"
                                % (args.scene, args.quantity))
    try:
        return args.func(args)
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
