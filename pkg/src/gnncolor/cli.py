"""Command line front end: ``gnncolor <command> ...``.

Exit status is 0 on success, 1 for bad input (unreadable or malformed files,
bad flags) and 2 when an engine produced an invalid coloring.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .bench import ColoringFailure, make_orderer, performance_profile, read_records, run_coloring, write_profile, write_records
from .corpus import read_manifest, write_corpus
from .genetic import EvolveConfig, checkpoint_every, evolve, initial_population, write_fitness_history
from .gnn import load_model, save_model
from .graph import load_graph
from .training import LABEL_SOURCES, TrainConfig, train_supervised, write_history

log = logging.getLogger("gnncolor")

EXIT_OK, EXIT_INPUT, EXIT_INVALID = 0, 1, 2


def _graphs(paths):
    return [load_graph(p) for p in paths]


def cmd_color(args) -> int:
    g = load_graph(args.graph)
    make_orderer(args.heuristic)  # fail fast on a bad name or weight file
    records, col = run_coloring(
        g, Path(args.graph).stem, args.heuristic, args.mode, args.workers, args.reps, args.culberson
    )
    write_records(records, sys.stdout)
    best = min(records[: args.reps], key=lambda r: r.seconds)
    log.info("%s: %d colors, best of %d in %.6f s", args.heuristic, best.colors, args.reps, best.seconds)
    if args.out:
        col.dump(args.out)
    return EXIT_OK


def cmd_order(args) -> int:
    g = load_graph(args.graph)
    pm = make_orderer(args.heuristic)(g, args.workers)
    pm.dump(args.out or "/dev/stdout")
    return EXIT_OK


def _split(manifest, name):
    return _graphs(manifest[name])


def cmd_train(args) -> int:
    manifest = read_manifest(args.manifest)
    train = _split(manifest, "train")
    if not train:
        raise ValueError(f"{args.manifest}: no training graphs")
    holdout = _split(manifest, args.holdout)
    cfg = TrainConfig(epochs=args.epochs, lr=args.lr, seed=args.seed, labels=args.labels, layers=args.layers)
    model, history = train_supervised(train, cfg, holdout=holdout)
    save_model(model, args.out)
    write_history(history, args.history or f"{args.out}.csv")
    if history:
        last = history[-1]
        log.info("epoch %d: loss %.4f, %s F1 %.4f, %s colors %d",
                 last.epoch, last.loss, args.holdout, last.f1, args.holdout, last.holdout_colors)
    return EXIT_OK


def cmd_evolve(args) -> int:
    models = [load_model(p) for p in args.checkpoints]
    graphs = _split(read_manifest(args.manifest), "train")
    if not graphs:
        raise ValueError(f"{args.manifest}: no training graphs")
    cfg = EvolveConfig(
        population=args.population,
        truncation=args.truncation,
        generations=args.generations,
        seed=args.seed,
        sigma=args.sigma,
        workers=args.workers,
    )
    pop = initial_population(models, cfg.population, cfg.sigma, cfg.seed)
    cb = None
    if args.checkpoint_every:
        Path(args.checkpoint_dir).mkdir(parents=True, exist_ok=True)
        cb = checkpoint_every(args.checkpoint_every, args.checkpoint_dir)
    best, history = evolve(pop, graphs, cfg, on_generation=cb)
    save_model(best.model, args.out)
    write_fitness_history(history, args.history or f"{args.out}.csv")
    log.info("champion: %d colors (tie-break %d), started at %d",
             best.fitness[0], best.fitness[1], history[0].best_colors)
    return EXIT_OK


def cmd_profile(args) -> int:
    records = [r for p in args.records for r in read_records(p)]
    names = args.heuristics.split(",") if args.heuristics else None
    ks, fractions = performance_profile(records, names, args.max_k)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_profile(ks, fractions, fh)
    else:
        write_profile(ks, fractions, sys.stdout)
    return EXIT_OK


def cmd_corpus(args) -> int:
    manifest = write_corpus(args.directory)
    log.info("wrote %s", manifest)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gnncolor", description="Greedy graph coloring with learned vertex orderings.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    heur = "ff, lf, sl, id, sd or gnn:<weights.gsgc>"
    c = sub.add_parser("color", help="order, color, validate and time one graph")
    c.add_argument("graph", help="edge list, DIMACS .col or binary .csrg file")
    c.add_argument("--heuristic", default="sl", help=heur)
    c.add_argument("--mode", choices=("seq", "par"), default="seq")
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--reps", type=int, default=5)
    c.add_argument("--culberson", type=int, default=0, metavar="K", help="recoloring iterations after the best run")
    c.add_argument("--out", help="write the final coloring here")
    c.set_defaults(func=cmd_color)

    o = sub.add_parser("order", help="write the priority map of one heuristic")
    o.add_argument("graph")
    o.add_argument("--heuristic", default="sl", help=heur)
    o.add_argument("--workers", type=int, default=1)
    o.add_argument("--out")
    o.set_defaults(func=cmd_order)

    t = sub.add_parser("train", help="supervised training on edge labels")
    t.add_argument("--manifest", required=True)
    t.add_argument("--labels", choices=sorted(LABEL_SOURCES), default="sl")
    t.add_argument("--layers", type=int, choices=(2, 3, 4), default=2)
    t.add_argument("--epochs", type=int, default=200)
    t.add_argument("--lr", type=float, default=1e-3)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--holdout", choices=("test", "valid"), default="test", help="split used for per-epoch metrics")
    t.add_argument("--out", required=True, help="checkpoint path")
    t.add_argument("--history", help="metrics CSV (default: <out>.csv)")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("evolve", help="genetic refinement of trained checkpoints")
    e.add_argument("checkpoints", nargs="+")
    e.add_argument("--manifest", required=True)
    e.add_argument("--population", type=int, default=100)
    e.add_argument("--truncation", type=int, default=20)
    e.add_argument("--generations", type=int, default=500)
    e.add_argument("--sigma", type=float, default=0.01)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--checkpoint-every", type=int, default=0, metavar="K")
    e.add_argument("--checkpoint-dir", default=".")
    e.add_argument("--out", required=True, help="champion checkpoint path")
    e.add_argument("--history", help="fitness CSV (default: <out>.csv)")
    e.set_defaults(func=cmd_evolve)

    pr = sub.add_parser("profile", help="performance profile from run-record CSVs")
    pr.add_argument("records", nargs="+")
    pr.add_argument("--heuristics", help="comma separated subset, default all")
    pr.add_argument("--max-k", type=int)
    pr.add_argument("--out")
    pr.set_defaults(func=cmd_profile)

    cp = sub.add_parser("corpus", help="write the built-in benchmark corpus and its manifest")
    cp.add_argument("directory")
    cp.set_defaults(func=cmd_corpus)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    for flag, low in (("workers", 1), ("reps", 1), ("culberson", 0)):
        if getattr(args, flag, low) < low:
            print(f"gnncolor: error: --{flag} must be >= {low}", file=sys.stderr)
            return EXIT_INPUT
    try:
        return args.func(args)
    except ColoringFailure as exc:
        print(f"gnncolor: validation failed: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, ValueError) as exc:
        print(f"gnncolor: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
