"""A small, deterministic benchmark corpus that runs on a laptop.

Stands in for the SNAP / DIMACS collections: heavy-tailed "social" graphs,
clustered small worlds, geometric meshes and dense random instances.  Graphs
are sorted by edge count and split train / test / valid like the large
collections are.
"""
from __future__ import annotations

from pathlib import Path

import networkx as nx
import numpy as np

from .graph import CsrGraph, from_edges, write_edge_list

__all__ = ["GRAPH_SPECS", "make_graph", "desk_corpus", "write_corpus", "read_manifest"]

# name -> (generator, kwargs); seeds are part of the spec so the corpus never drifts
GRAPH_SPECS: dict[str, tuple[str, dict]] = {}


def _add(kind: str, sizes, **common):
    for i, kw in enumerate(sizes):
        kw = {**common, **kw, "seed": 1000 + len(GRAPH_SPECS)}
        tag = "-".join(f"{v}" for k, v in kw.items() if k != "seed")
        GRAPH_SPECS[f"{kind}-{tag}"] = (kind, kw)


_add("ba", [{"n": n, "m": m} for n, m in
            [(300, 3), (400, 2), (600, 6), (700, 3), (1000, 4), (1200, 2), (1500, 3), (2000, 5), (2500, 4),
             (3000, 2), (3500, 6), (4000, 3), (5000, 4), (800, 8)]])
_add("plc", [{"n": n, "m": m, "p": p} for n, m, p in
             [(400, 4, 0.7), (500, 3, 0.3), (800, 7, 0.4), (900, 4, 0.5), (1200, 2, 0.6), (1800, 5, 0.2),
              (2200, 3, 0.4), (2800, 4, 0.3), (3300, 2, 0.8), (4000, 5, 0.5), (4500, 3, 0.1), (1500, 6, 0.6)]])
_add("chunglu", [{"n": n, "gamma": gm} for n, gm in
                 [(800, 2.8), (1000, 2.1), (1500, 2.3), (2000, 2.4), (2500, 2.6), (3000, 2.2), (3500, 2.5),
                  (4000, 2.7), (5000, 2.3), (1200, 2.9), (4500, 2.1), (600, 2.2)]])
_add("ws", [{"n": n, "k": k, "p": p} for n, k, p in
            [(500, 6, 0.2), (700, 4, 0.5), (1000, 8, 0.1), (1500, 10, 0.3), (2000, 6, 0.4), (2500, 4, 0.2),
             (3000, 8, 0.05), (800, 12, 0.3), (1200, 6, 0.7)]])
_add("geo", [{"n": n, "r": r} for n, r in
             [(600, 0.07), (900, 0.08), (1200, 0.05), (1500, 0.04), (2000, 0.035), (2500, 0.03), (400, 0.1),
              (3000, 0.025), (800, 0.06)]])
_add("er", [{"n": n, "p": p} for n, p in
            [(150, 0.3), (250, 0.15), (300, 0.05), (400, 0.08), (500, 0.02), (700, 0.01), (200, 0.5),
             (1000, 0.006), (350, 0.2)]])
_add("queen", [{"k": k} for k in range(5, 15)])
_add("mycielski", [{"k": k} for k in range(4, 10)])


def _chung_lu(n, gamma, seed):
    rng = np.random.default_rng(seed)
    w = (np.arange(1, n + 1) / n) ** (-1.0 / (gamma - 1))
    w *= 3.0 / w.mean()
    # each vertex draws about w/2 partners with probability proportional to weight
    k = rng.poisson(w / 2)
    src = np.repeat(np.arange(n), k)
    dst = rng.choice(n, size=len(src), p=w / w.sum())
    return from_edges(n, np.column_stack([src, dst]))


def _queens(k):
    G = nx.Graph()
    cells = [(r, c) for r in range(k) for c in range(k)]
    G.add_nodes_from(cells)
    for i, (r1, c1) in enumerate(cells):
        for r2, c2 in cells[i + 1:]:
            if r1 == r2 or c1 == c2 or abs(r1 - r2) == abs(c1 - c2):
                G.add_edge((r1, c1), (r2, c2))
    return G


def make_graph(name: str) -> CsrGraph:
    kind, kw = GRAPH_SPECS[name]
    seed = kw["seed"]
    if kind == "ba":
        G = nx.barabasi_albert_graph(kw["n"], kw["m"], seed=seed)
    elif kind == "plc":
        G = nx.powerlaw_cluster_graph(kw["n"], kw["m"], kw["p"], seed=seed)
    elif kind == "ws":
        G = nx.connected_watts_strogatz_graph(kw["n"], kw["k"], kw["p"], seed=seed)
    elif kind == "geo":
        G = nx.random_geometric_graph(kw["n"], kw["r"], seed=seed)
    elif kind == "er":
        G = nx.fast_gnp_random_graph(kw["n"], kw["p"], seed=seed)
    elif kind == "chunglu":
        return _chung_lu(kw["n"], kw["gamma"], seed)
    elif kind == "queen":
        G = nx.convert_node_labels_to_integers(_queens(kw["k"]))
    elif kind == "mycielski":
        G = nx.mycielski_graph(kw["k"])
    else:
        raise ValueError(kind)
    # shuffle ids so the input order carries no structure
    perm = np.random.default_rng(seed).permutation(G.number_of_nodes())
    e = np.array(G.edges(), dtype=np.int64).reshape(-1, 2)
    return from_edges(G.number_of_nodes(), perm[e])


_ROTATION = ("train", "test", "train", "valid", "train", "train", "test", "train", "valid")


def desk_corpus() -> dict[str, list[tuple[str, CsrGraph]]]:
    """All corpus graphs split into train / test / valid.

    Within each generator family graphs are ranked by edge count and dealt out
    in a fixed rotation, so every family is present in the training split.
    """
    split = {"train": [], "test": [], "valid": []}
    families: dict[str, list[tuple[str, CsrGraph]]] = {}
    for name, (kind, _) in GRAPH_SPECS.items():
        families.setdefault(kind, []).append((name, make_graph(name)))
    for items in families.values():
        items.sort(key=lambda t: (t[1].m, t[0]))
        for i, item in enumerate(items):
            split[_ROTATION[i % len(_ROTATION)]].append(item)
    for items in split.values():
        items.sort(key=lambda t: (t[1].m, t[0]))
    return split


def write_corpus(directory: str | Path) -> Path:
    """Write every corpus graph as an edge list plus a ``manifest.txt``; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = ["# path split"]
    for tag, items in desk_corpus().items():
        for name, g in items:
            fname = f"{name}.edges"
            with open(directory / fname, "w") as fh:
                write_edge_list(g, fh)
            lines.append(f"{fname} {tag}")
    manifest = directory / "manifest.txt"
    manifest.write_text("\n".join(lines) + "\n")
    return manifest


def read_manifest(path: str | Path) -> dict[str, list[Path]]:
    """Parse ``<graph path> <train|test|valid>`` lines; relative paths resolve against the manifest."""
    path = Path(path)
    out: dict[str, list[Path]] = {"train": [], "test": [], "valid": []}
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        tok = s.split()
        if len(tok) != 2 or tok[1] not in out:
            raise ValueError(f"{path}:{lineno}: expected '<path> train|test|valid'")
        p = Path(tok[0])
        out[tok[1]].append(p if p.is_absolute() else path.parent / p)
    return out
