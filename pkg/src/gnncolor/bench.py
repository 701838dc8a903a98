"""Timed coloring runs and performance profiles over run records."""
from __future__ import annotations

import csv
import time
from dataclasses import astuple, dataclass
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from .coloring import Coloring, culberson_recolor, greedy_color, jp_color, validate
from .gnn import infer_priorities, load_model
from .graph import CsrGraph
from .ordering import HEURISTICS, PriorityMap

__all__ = [
    "RunRecord",
    "RECORD_HEADER",
    "ColoringFailure",
    "make_orderer",
    "run_coloring",
    "write_records",
    "read_records",
    "performance_profile",
    "write_profile",
]

RECORD_HEADER = ("instance", "heuristic", "workers", "rep", "seconds", "colors")


class ColoringFailure(RuntimeError):
    """An engine produced an invalid or irreproducible coloring."""


@dataclass
class RunRecord:
    instance: str
    heuristic: str
    workers: int
    rep: int
    seconds: float
    colors: int


def make_orderer(heuristic: str):
    """Resolve ``ff|lf|sl|id|sd|gnn:<weights>`` to ``f(graph, workers) -> PriorityMap``."""
    if heuristic.startswith("gnn:"):
        model = load_model(heuristic[4:])
        return lambda g, workers: infer_priorities(g, model, workers)
    try:
        fn = HEURISTICS[heuristic]
    except KeyError:
        raise ValueError(f"unknown heuristic {heuristic!r}") from None
    return lambda g, workers: fn(g, workers=workers)


def run_coloring(
    g: CsrGraph,
    instance: str,
    heuristic: str,
    mode: str = "seq",
    workers: int = 1,
    reps: int = 5,
    culberson: int = 0,
) -> tuple[list[RunRecord], Coloring]:
    """Time ordering plus coloring ``reps`` times, then optionally recolor.

    Records for Culberson iterations carry the heuristic name suffixed with
    ``+C<i>``.  Raises :class:`ColoringFailure` on an invalid coloring or when
    repetitions disagree.
    """
    if mode not in ("seq", "par"):
        raise ValueError(f"mode must be 'seq' or 'par', not {mode!r}")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    order = make_orderer(heuristic)
    w = 1 if mode == "seq" else workers
    records = []
    best = None
    for rep in range(reps):
        t0 = time.perf_counter()
        pm = order(g, w)
        col = greedy_color(g, pm) if mode == "seq" else jp_color(g, pm, workers)
        dt = time.perf_counter() - t0
        if not validate(g, col):
            raise ColoringFailure(f"{heuristic} produced an invalid coloring on {instance}")
        if best is not None and col != best:
            raise ColoringFailure(f"{heuristic} is not reproducible on {instance}")
        best = col
        records.append(RunRecord(instance, heuristic, workers if mode == "par" else 1, rep, dt, col.num_colors))
    col = best
    for i in range(1, culberson + 1):
        t0 = time.perf_counter()
        col = culberson_recolor(g, col)
        dt = time.perf_counter() - t0
        if not validate(g, col):
            raise ColoringFailure(f"recoloring produced an invalid coloring on {instance}")
        records.append(RunRecord(instance, f"{heuristic}+C{i}", 1, 0, dt, col.num_colors))
    return records, col


def best_time(records: Iterable[RunRecord]) -> float:
    return min(r.seconds for r in records)


def write_records(records: Iterable[RunRecord], stream: TextIO, header: bool = True) -> None:
    w = csv.writer(stream)
    if header:
        w.writerow(RECORD_HEADER)
    for r in records:
        row = list(astuple(r))
        row[4] = f"{r.seconds:.6f}"
        w.writerow(row)


def read_records(path: str | Path) -> list[RunRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows and tuple(rows[0].keys()) != RECORD_HEADER:
        raise ValueError(f"{path}: expected header {','.join(RECORD_HEADER)}")
    return [
        RunRecord(r["instance"], r["heuristic"], int(r["workers"]), int(r["rep"]), float(r["seconds"]), int(r["colors"]))
        for r in rows
    ]


def performance_profile(
    records: Iterable[RunRecord], heuristics: Sequence[str] | None = None, max_k: int | None = None
) -> tuple[list[int], dict[str, list[float]]]:
    """Fraction of instances each heuristic colors within ``k`` colors of the best.

    ``k`` runs from 0 to the largest gap observed (or ``max_k``).  All chosen
    heuristics must cover the same instance set.
    """
    colors: dict[str, dict[str, int]] = {}
    for r in records:
        per = colors.setdefault(r.heuristic, {})
        per[r.instance] = min(per.get(r.instance, r.colors), r.colors)
    names = list(heuristics) if heuristics else sorted(colors)
    if not names:
        raise ValueError("no run records to profile")
    missing = [h for h in names if h not in colors]
    if missing:
        raise ValueError(f"no records for {missing}")
    instances = set(colors[names[0]])
    for h in names[1:]:
        if set(colors[h]) != instances:
            raise ValueError(f"heuristic {h} covers a different instance set than {names[0]}")
    inst = sorted(instances)
    table = np.array([[colors[h][i] for i in inst] for h in names])
    gap = table - table.min(axis=0)
    top = int(gap.max()) if max_k is None else max_k
    ks = list(range(top + 1))
    return ks, {h: [float(np.mean(gap[j] <= k)) for k in ks] for j, h in enumerate(names)}


def write_profile(ks: Sequence[int], fractions: dict[str, list[float]], stream: TextIO) -> None:
    w = csv.writer(stream)
    names = list(fractions)
    w.writerow(["k"] + names)
    for i, k in enumerate(ks):
        w.writerow([k] + [f"{fractions[h][i]:.6g}" for h in names])
