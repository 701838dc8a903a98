"""Greedy and Jones-Plassmann coloring driven by a PriorityMap."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numba
import numpy as np

from ._atomic import atomic_fetch_sub
from ._parallel import chunk_bounds, use_workers
from .graph import CsrGraph
from .ordering import PriorityMap

__all__ = [
    "Coloring",
    "greedy_color",
    "jp_color",
    "culberson_recolor",
    "validate",
]


@dataclass(frozen=True, eq=False)
class Coloring:
    c: np.ndarray
    num_colors: int
    max_color_multiplicity: int

    @classmethod
    def from_array(cls, c) -> "Coloring":
        c = np.asarray(c, dtype=np.int64)
        if len(c) == 0:
            return cls(c, 0, 0)
        k = int(c.max()) + 1
        return cls(c, k, int(np.count_nonzero(c == k - 1)))

    def __eq__(self, other):
        if not isinstance(other, Coloring):
            return NotImplemented
        return np.array_equal(self.c, other.c)

    def __repr__(self):
        return f"Coloring(n={len(self.c)}, num_colors={self.num_colors})"

    def dump(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            fh.write(f"# coloring {len(self.c)} {self.num_colors}\n")
            np.savetxt(fh, self.c, fmt="%d")

    @classmethod
    def load(cls, path: str | Path) -> "Coloring":
        with open(path) as fh:
            head = fh.readline().split()
            if head[:2] != ["#", "coloring"] or len(head) != 4:
                raise ValueError("missing '# coloring <n> <num_colors>' header")
            c = np.array([int(x) for x in fh if x.strip()], dtype=np.int64)
        if len(c) != int(head[2]):
            raise ValueError(f"header says {head[2]} vertices, found {len(c)}")
        col = cls.from_array(c)
        if col.num_colors != int(head[3]):
            raise ValueError("color count in header does not match the data")
        return col


@numba.njit(inline="always")
def _before(p, v, u):
    # v is colored before u
    return p[v] > p[u] or (p[v] == p[u] and v < u)


@numba.njit(nogil=True, cache=True)
def _greedy_kernel(offsets, cols, order, maxdeg):
    n = len(offsets) - 1
    color = np.full(n, -1, np.int64)
    mark = np.zeros(maxdeg + 2, np.int64)
    for i in range(n):
        u = order[i]
        stamp = u + 1
        for e in range(offsets[u], offsets[u + 1]):
            c = color[cols[e]]
            if c >= 0:
                mark[c] = stamp
        c = 0
        while mark[c] == stamp:
            c += 1
        color[u] = c
    return color


def greedy_color(g: CsrGraph, pm: PriorityMap) -> Coloring:
    """Color vertices one at a time in priority order with the smallest free color."""
    _check_pm(g, pm)
    if g.n == 0:
        return Coloring.from_array([])
    return Coloring.from_array(_greedy_kernel(g.row_offsets, g.col_indices, pm.order(), g.max_degree))


def _check_pm(g: CsrGraph, pm: PriorityMap) -> None:
    if len(pm) != g.n:
        raise ValueError(f"priority map has {len(pm)} entries, graph has {g.n} vertices")


@numba.njit(parallel=True, cache=True)
def _jp_kernel(offsets, cols, p, nchunks, maxdeg):
    n = len(offsets) - 1
    color = np.full(n, -1, np.int64)
    count = np.empty(n, np.int64)
    mark = np.zeros((nchunks, maxdeg + 2), np.int64)
    frontier = np.empty(n, np.int64)
    scratch = np.empty(max(offsets[n], n), np.int64)
    region = np.zeros(nchunks + 1, np.int64)
    filled = np.zeros(nchunks, np.int64)

    # count predecessors; sources go into per-chunk slices of scratch
    vb = chunk_bounds(n, nchunks)
    for c in numba.prange(nchunks):
        t = vb[c]
        for u in range(vb[c], vb[c + 1]):
            k = 0
            for e in range(offsets[u], offsets[u + 1]):
                if _before(p, cols[e], u):
                    k += 1
            count[u] = k
            if k == 0:
                scratch[t] = u
                t += 1
        filled[c] = t - vb[c]
    size = _gather(scratch, vb, filled, frontier, nchunks)

    while size > 0:
        fb = chunk_bounds(size, nchunks)
        for c in numba.prange(nchunks):
            s = 0
            for i in range(fb[c], fb[c + 1]):
                u = frontier[i]
                s += offsets[u + 1] - offsets[u]
            region[c + 1] = s
        for c in range(nchunks):
            region[c + 1] += region[c]
        for c in numba.prange(nchunks):
            t = region[c]
            row = mark[c]
            for i in range(fb[c], fb[c + 1]):
                u = frontier[i]
                stamp = u + 1
                # all predecessors are colored by now; successors are still -1
                for e in range(offsets[u], offsets[u + 1]):
                    cv = color[cols[e]]
                    if cv >= 0:
                        row[cv] = stamp
                cu = 0
                while row[cu] == stamp:
                    cu += 1
                color[u] = cu
            for i in range(fb[c], fb[c + 1]):
                u = frontier[i]
                for e in range(offsets[u], offsets[u + 1]):
                    v = cols[e]
                    if _before(p, u, v):
                        if atomic_fetch_sub(count, v, 1) == 1:
                            scratch[t] = v
                            t += 1
            filled[c] = t - region[c]
        size = _gather(scratch, region, filled, frontier, nchunks)
    return color


@numba.njit(parallel=True, cache=True)
def _gather(src, starts, filled, dst, nchunks):
    """Concatenate ``src[starts[c] : starts[c] + filled[c]]`` over chunks into ``dst``."""
    out = np.zeros(nchunks + 1, np.int64)
    for c in range(nchunks):
        out[c + 1] = out[c] + filled[c]
    for c in numba.prange(nchunks):
        for i in range(filled[c]):
            dst[out[c] + i] = src[starts[c] + i]
    return out[nchunks]


def jp_color(g: CsrGraph, pm: PriorityMap, workers: int = 1) -> Coloring:
    """Jones-Plassmann parallel coloring.

    Each round colors the vertices whose higher-priority neighbors are all
    colored, then releases successors through atomic counter decrements.
    The result matches :func:`greedy_color` exactly for any worker count.
    """
    _check_pm(g, pm)
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if g.n == 0:
        return Coloring.from_array([])
    with use_workers(workers):
        c = _jp_kernel(g.row_offsets, g.col_indices, pm.p, workers, g.max_degree)
    return Coloring.from_array(c)


def culberson_recolor(g: CsrGraph, prev: Coloring) -> Coloring:
    """Recolor with each vertex's previous color as its priority.

    Whole color classes stay together, so the color count cannot increase.
    """
    if not validate(g, prev):
        raise ValueError("culberson_recolor needs a proper, contiguous coloring")
    return greedy_color(g, PriorityMap(prev.c.astype(np.float64)))


def validate(g: CsrGraph, col: Coloring) -> bool:
    """Proper (no monochromatic edge) and contiguous (colors 0..k-1 all used)."""
    c = np.asarray(col.c)
    if len(c) != g.n:
        return False
    if g.n == 0:
        return True
    if c.min() < 0:
        return False
    src, dst = g.directed_edges()
    if np.any(c[src] == c[dst]):
        return False
    used = np.bincount(c)
    return bool(np.all(used > 0))
