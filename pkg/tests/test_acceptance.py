"""Acceptance criteria, one test per criterion (criterion 8 has two parts).

Run with ``pytest tests/test_acceptance.py -v``; a PASS/FAIL line per
criterion is printed in the terminal summary.  Also runnable as a script.
"""
import os

os.environ.setdefault("NUMBA_NUM_THREADS", "8")
# spinning OpenMP workers starve each other when threads outnumber cores
os.environ.setdefault("OMP_WAIT_POLICY", "passive")

import sys
import time
from functools import lru_cache
from pathlib import Path

import networkx as nx
import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))
from conftest import nx_to_csr, random_graph  # noqa: E402
from oracles import optimal_coloring  # noqa: E402

from gnncolor.coloring import culberson_recolor, greedy_color, jp_color, validate  # noqa: E402
from gnncolor.corpus import desk_corpus  # noqa: E402
from gnncolor.genetic import EvolveConfig, evolve, fitness, initial_population  # noqa: E402
from gnncolor.gnn import GnnModel, infer_priorities  # noqa: E402
from gnncolor.graph import erdos_renyi, from_edges, load_graph  # noqa: E402
from gnncolor.ordering import HEURISTICS, PriorityMap, order_sl  # noqa: E402
from gnncolor.training import GraphBatch, TrainConfig, loss_and_grad, make_labels, parameter_init, train_supervised  # noqa: E402

RESULTS: dict[str, tuple[bool, str]] = {}


def report(key, ok, detail):
    RESULTS[key] = (bool(ok), detail)
    assert ok, detail


@lru_cache(None)
def corpus():
    sp = desk_corpus()
    return {k: [g for _, g in v] for k, v in sp.items()}


@lru_cache(None)
def supervised(labels, seed):
    c = corpus()
    return train_supervised(c["train"], TrainConfig(epochs=200, labels=labels, layers=2, seed=seed), holdout=c["test"])


def total_colors(graphs, pm_fn):
    return sum(greedy_color(g, pm_fn(g)).num_colors for g in graphs)


def warm_up():
    g = from_edges(4, [(0, 1), (1, 2), (2, 3)])
    for name in HEURISTICS:
        pm = HEURISTICS[name](g, workers=2)
        greedy_color(g, pm), jp_color(g, pm, 2)
    infer_priorities(g, GnnModel.zeros(2), 2)


def test_c1_correctness():
    warm_up()
    rng = np.random.default_rng(2024)
    model = parameter_init(TrainConfig(seed=1))
    t0 = time.perf_counter()
    problems = []
    for i in range(500):
        g = random_graph(rng, 200)
        orders = {h: fn(g) for h, fn in HEURISTICS.items()}
        orders["gnn"] = infer_priorities(g, model)
        orders["random"] = PriorityMap(rng.integers(0, 5, g.n))
        for h, pm in orders.items():
            col = greedy_color(g, pm)
            if not validate(g, col) or col.num_colors > g.max_degree + 1:
                problems.append(f"graph {i} {h}: invalid or above max degree + 1")
            for w in (1, 2, 4, 8):
                if jp_color(g, pm, w) != col:
                    problems.append(f"graph {i} {h}: JP differs at {w} workers")
        col = greedy_color(g, orders["ff"])
        for _ in range(5):
            nxt = culberson_recolor(g, col)
            if not validate(g, nxt) or nxt.num_colors > col.num_colors:
                problems.append(f"graph {i}: Culberson chain not monotone")
            col = nxt
    dt = time.perf_counter() - t0
    report("1 correctness", not problems and dt < 60,
           f"500 graphs, {len(problems)} violations {problems[:3]}, {dt:.1f} s (limit 60 s)")


def test_c2_optimal_ordering_exists():
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    misses, done = 0, 0
    while done < 200:
        n = int(rng.integers(1, 10))
        G = nx.gnp_random_graph(n, float(rng.uniform(0.15, 0.95)), seed=int(rng.integers(1 << 31)))
        if not nx.is_connected(G):
            continue
        g = nx_to_csr(G)
        best = optimal_coloring(g)
        k = int(best.max()) + 1
        misses += greedy_color(g, PriorityMap(k - best)).num_colors != k
        done += 1
    dt = time.perf_counter() - t0
    report("2 optimal ordering exists", misses == 0 and dt < 300,
           f"200 connected graphs n<=9, {misses} misses, {dt:.1f} s (limit 300 s)")


def test_c3_gradient_check():
    from test_training import SIX, _fd_check, kink_free_model
    t0 = time.perf_counter()
    errs = {L: _fd_check(kink_free_model(L, SIX), SIX) for L in (2, 3, 4)}
    dt = time.perf_counter() - t0
    ok = all(e < 1e-3 for e in errs.values()) and dt < 60
    report("3 gradient check", ok,
           "max relative error " + ", ".join(f"{L} layers {e:.1e}" for L, e in errs.items()) + f"; {dt:.1f} s")


def test_c4_learning_sanity():
    t0 = time.perf_counter()
    _, h_lf = supervised("lf", 0)
    _, h_sl = supervised("sl", 0)
    dt = time.perf_counter() - t0
    f_lf, f_sl = h_lf[-1].f1, h_sl[-1].f1
    report("4 learning sanity", f_lf >= 0.95 and f_sl >= 0.85 and dt < 1800,
           f"held-out F1 after 200 epochs: LF labels {f_lf:.4f} (>=0.95), SL labels {f_sl:.4f} (>=0.85); "
           f"{len(corpus()['train'])} training graphs, {dt:.0f} s for both runs")


def gnn2():
    """Supervised 2-layer SL model; seed picked by validation colors."""
    c = corpus()
    cands = [supervised("sl", s)[0] for s in range(3)]
    val = [total_colors(c["valid"], lambda g, m=m: infer_priorities(g, m)) for m in cands]
    return cands[int(np.argmin(val))], val


def test_c5_quality_ordering():
    c = corpus()
    test = c["test"]
    totals = {h: total_colors(test, fn) for h, fn in HEURISTICS.items()}
    model, val = gnn2()
    totals["gnn2"] = total_colors(test, lambda g: infer_priorities(g, model))
    soft = "holds" if totals["gnn2"] <= totals["sl"] else "does not hold (soft, reported only)"
    RESULTS["5 soft: GNN-2 <= SL"] = (totals["gnn2"] <= totals["sl"], f"GNN-2 {totals['gnn2']} vs SL {totals['sl']}: {soft}")
    report("5 quality ordering", totals["gnn2"] <= totals["lf"] and totals["sd"] <= totals["sl"],
           f"test split ({len(test)} graphs) totals "
           + ", ".join(f"{k.upper()}={v}" for k, v in totals.items())
           + f"; need GNN-2<=LF and SD<=SL (model seed chosen by validation colors {val})")


YOUTUBE = os.environ.get("GNNCOLOR_YOUTUBE")


@pytest.mark.skipif(not YOUTUBE, reason="set GNNCOLOR_YOUTUBE to a com-Youtube edge list")
def test_c6_youtube_spot_check():
    g = load_graph(YOUTUBE)
    paper = {"ff": 39, "lf": 32, "sl": 29}
    got = {h: greedy_color(g, HEURISTICS[h](g)).num_colors for h in paper}
    order_sl(g)
    t = min(_timed(lambda: order_sl(g)) for _ in range(3))
    ok = all(abs(got[h] - paper[h]) <= 2 for h in paper) and t <= 2.1
    report("6 com-Youtube spot check", ok, f"colors {got} vs {paper} (+-2); SL ordering {t:.3f} s (limit 2.1 s)")


def _timed(fn):
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


@lru_cache(None)
def scaling_graph(m):
    return erdos_renyi(m // 8, m, seed=m)


def test_c8_linear_scaling():
    warm_up()
    rows = []
    for m in (10**5, 10**6, 10**7):
        g = scaling_graph(m)
        pm = order_sl(g)
        t_sl = min(_timed(lambda: order_sl(g)) for _ in range(3))
        t_jp = min(_timed(lambda: jp_color(g, pm, 1)) for _ in range(3))
        rows.append((m, t_sl / (g.n + m), t_jp / (g.n + m)))
    spread_sl = max(r[1] for r in rows) / min(r[1] for r in rows)
    spread_jp = max(r[2] for r in rows) / min(r[2] for r in rows)
    report("8a linear scaling", spread_sl < 3 and spread_jp < 3,
           f"time/(n+m) spread SL {spread_sl:.2f}x, JP {spread_jp:.2f}x (limit 3x); "
           + "; ".join(f"m={m:.0e}: SL {a * 1e9:.1f} ns, JP {b * 1e9:.1f} ns" for m, a, b in rows))


def test_c8_parallel_speedup():
    g = scaling_graph(10**7)

    def run(w):
        jp_color(g, order_sl(g, w), w)

    run(8)
    t1 = min(_timed(lambda: run(1)) for _ in range(3))
    t8 = min(_timed(lambda: run(8)) for _ in range(3))
    cores = len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count()
    report("8b parallel speedup", t1 / t8 >= 3,
           f"SL + JP on ER m=1e7: 1 worker {t1:.2f} s, 8 workers {t8:.2f} s, speedup {t1 / t8:.2f}x (need 3x); "
           f"{cores} CPU core(s) available")


def test_c7_genetic_stage():
    c = corpus()
    seeds = [supervised("sl", s)[0] for s in range(3)]
    cfg = EvolveConfig(population=100, truncation=20, generations=50, seed=0)
    pop = initial_population(seeds, cfg.population, cfg.sigma, cfg.seed)
    start = min(fitness(m, c["train"]) for m in pop)
    t0 = time.perf_counter()
    best, hist = evolve(pop, c["train"], cfg)
    dt = time.perf_counter() - t0
    keys = [(r.best_colors, r.best_tiebreak) for r in hist]
    monotone = all(b <= a for a, b in zip(keys, keys[1:]))
    test_before = min(total_colors(c["test"], lambda g, m=m: infer_priorities(g, m)) for m in seeds[:1])
    test_after = total_colors(c["test"], lambda g: infer_priorities(g, best.model))
    report("7 genetic stage", monotone and best.fitness[0] <= start[0],
           f"50 generations, N=100, T=20: training colors {start[0]} -> {best.fitness[0]}, "
           f"champion monotone={monotone}; test colors {test_before} -> {test_after} (info); {dt:.0f} s")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-p", "no:cacheprovider"]))
