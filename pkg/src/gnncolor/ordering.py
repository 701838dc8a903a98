"""Vertex ordering heuristics that feed greedy and Jones-Plassmann coloring.

Every heuristic returns a :class:`PriorityMap`.  Higher priority is colored
earlier; equal priorities fall back to the lower vertex id.
"""
from __future__ import annotations

import heapq
from pathlib import Path

import numba
import numpy as np

from ._atomic import atomic_cas, atomic_fetch_sub
from ._parallel import chunk_bounds, use_workers
from .graph import CsrGraph

__all__ = [
    "PriorityMap",
    "precedes",
    "order_ff",
    "order_lf",
    "order_sl",
    "order_id",
    "order_sd",
    "sd_rounds",
    "HEURISTICS",
    "compute_order",
]


class PriorityMap:
    """One finite real priority per vertex, ordered with the id tie-break."""

    __slots__ = ("p",)

    def __init__(self, p):
        p = np.array(p, dtype=np.float64)
        if p.ndim != 1:
            raise ValueError("priorities must be one-dimensional")
        if not np.all(np.isfinite(p)):
            raise ValueError("priorities must be finite")
        p.setflags(write=False)
        self.p = p

    def __len__(self):
        return len(self.p)

    def __repr__(self):
        return f"PriorityMap(n={len(self.p)})"

    def __eq__(self, other):
        if not isinstance(other, PriorityMap):
            return NotImplemented
        return np.array_equal(self.p, other.p)

    def precedes(self, u: int, v: int) -> bool:
        pu, pv = self.p[u], self.p[v]
        return bool(pu > pv or (pu == pv and u < v))

    def order(self) -> np.ndarray:
        """Vertices sorted so that each one precedes all later ones."""
        n = len(self.p)
        return np.lexsort((np.arange(n), -self.p))

    def dump(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            fh.write(f"# priorities {len(self.p)}\n")
            fh.writelines(f"{x!r}\n" for x in self.p.tolist())

    @classmethod
    def load(cls, path: str | Path) -> "PriorityMap":
        with open(path) as fh:
            head = fh.readline().split()
            if head[:2] != ["#", "priorities"] or len(head) != 3:
                raise ValueError("missing '# priorities <n>' header")
            vals = [float(line) for line in fh if line.strip()]
        if len(vals) != int(head[2]):
            raise ValueError(f"header says {head[2]} priorities, found {len(vals)}")
        return cls(vals)


def precedes(pm: PriorityMap, u: int, v: int) -> bool:
    return pm.precedes(u, v)


def order_ff(g: CsrGraph, workers: int = 1) -> PriorityMap:
    return PriorityMap(np.arange(g.n, 0, -1, dtype=np.float64))


def order_lf(g: CsrGraph, workers: int = 1) -> PriorityMap:
    return PriorityMap(_lf_kernel(g.row_offsets, max(1, workers)))


@numba.njit(parallel=True, cache=True)
def _lf_kernel(offsets, nchunks):
    n = len(offsets) - 1
    p = np.empty(n, np.float64)
    bounds = chunk_bounds(n, nchunks)
    for c in numba.prange(nchunks):
        for u in range(bounds[c], bounds[c + 1]):
            p[u] = offsets[u + 1] - offsets[u]
    return p


# ---------------------------------------------------------------------------
# smallest degree last, round based
#
# Lazy bucket queue: every time a residual degree changes the vertex is pushed
# onto the list of its new degree; stale entries are skipped on pop.  Entries
# are bounded by n + 2m, and the minimum pointer only moves down by the number
# of decrements, so the whole peel is O(n + m).


@numba.njit(cache=True)
def _bucket_push(head, nxt, ent_v, top, d, v):
    ent_v[top] = v
    nxt[top] = head[d]
    head[d] = top
    return top + 1


@numba.njit(cache=True)
def _sl_init(offsets):
    n = len(offsets) - 1
    deg = np.empty(n, np.int64)
    maxdeg = 0
    for u in range(n):
        deg[u] = offsets[u + 1] - offsets[u]
        if deg[u] > maxdeg:
            maxdeg = deg[u]
    cap = n + offsets[n] + 1
    head = np.full(maxdeg + 1, -1, np.int64)
    nxt = np.empty(cap, np.int64)
    ent_v = np.empty(cap, np.int64)
    top = 0
    for u in range(n - 1, -1, -1):
        top = _bucket_push(head, nxt, ent_v, top, deg[u], u)
    return deg, head, nxt, ent_v, top


@numba.njit(cache=True)
def _sl_pop_round(deg, prio, head, nxt, ent_v, d, r, out):
    """Move every live vertex of residual degree ``d`` into ``out``; returns count."""
    k = 0
    e = head[d]
    head[d] = -1
    while e != -1:
        v = ent_v[e]
        if prio[v] < 0 and deg[v] == d:
            prio[v] = r
            out[k] = v
            k += 1
        e = nxt[e]
    return k


@numba.njit(cache=True)
def _sl_sequential(offsets, cols):
    n = len(offsets) - 1
    deg, head, nxt, ent_v, top = _sl_init(offsets)
    prio = np.full(n, -1, np.int64)
    members = np.empty(n, np.int64)
    removed = 0
    d = 0
    r = 0
    while removed < n:
        while head[d] == -1:
            d += 1
        k = _sl_pop_round(deg, prio, head, nxt, ent_v, d, r, members)
        if k == 0:
            continue
        removed += k
        low = d
        for i in range(k):
            u = members[i]
            for e in range(offsets[u], offsets[u + 1]):
                v = cols[e]
                if prio[v] < 0:
                    deg[v] -= 1
                    top = _bucket_push(head, nxt, ent_v, top, deg[v], v)
                    if deg[v] < low:
                        low = deg[v]
        d = low
        r += 1
    return prio


@numba.njit(parallel=True, cache=True)
def _sl_parallel(offsets, cols, nchunks):
    n = len(offsets) - 1
    deg, head, nxt, ent_v, top = _sl_init(offsets)
    prio = np.full(n, -1, np.int64)
    stamp = np.full(n, -1, np.int64)
    members = np.empty(n, np.int64)
    touched = np.empty(max(offsets[n], 1), np.int64)
    region = np.zeros(nchunks + 1, np.int64)
    filled = np.zeros(nchunks, np.int64)
    removed = 0
    d = 0
    r = 0
    while removed < n:
        while head[d] == -1:
            d += 1
        k = _sl_pop_round(deg, prio, head, nxt, ent_v, d, r, members)
        if k == 0:
            continue
        removed += k
        bounds = chunk_bounds(k, nchunks)
        # each chunk writes touched vertices into a private slice sized by its degree sum
        for c in numba.prange(nchunks):
            s = 0
            for i in range(bounds[c], bounds[c + 1]):
                u = members[i]
                s += offsets[u + 1] - offsets[u]
            region[c + 1] = s
        for c in range(nchunks):
            region[c + 1] += region[c]
        for c in numba.prange(nchunks):
            t = region[c]
            for i in range(bounds[c], bounds[c + 1]):
                u = members[i]
                for e in range(offsets[u], offsets[u + 1]):
                    v = cols[e]
                    if prio[v] < 0:
                        atomic_fetch_sub(deg, v, 1)
                        if _claim(stamp, v, r):
                            touched[t] = v
                            t += 1
            filled[c] = t - region[c]
        low = d
        for c in range(nchunks):
            for t in range(region[c], region[c] + filled[c]):
                v = touched[t]
                top = _bucket_push(head, nxt, ent_v, top, deg[v], v)
                if deg[v] < low:
                    low = deg[v]
        d = low
        r += 1
    return prio


@numba.njit(cache=True)
def _claim(stamp, v, r):
    """True for exactly one caller per (v, round)."""
    old = stamp[v]
    while old != r:
        seen = atomic_cas(stamp, v, old, r)
        if seen == old:
            return True
        old = seen
    return False


def order_sl(g: CsrGraph, workers: int = 1) -> PriorityMap:
    """Round-based smallest-degree-last.

    Each round removes every vertex whose residual degree equals the current
    minimum; they all receive the round index as priority.
    """
    if g.n == 0:
        return PriorityMap([])
    if workers <= 1:
        prio = _sl_sequential(g.row_offsets, g.col_indices)
    else:
        with use_workers(workers):
            prio = _sl_parallel(g.row_offsets, g.col_indices, workers)
    return PriorityMap(prio.astype(np.float64))


# ---------------------------------------------------------------------------
# incidence degree and saturation degree (sequential only)


@numba.njit(cache=True)
def _id_kernel(offsets, cols):
    n = len(offsets) - 1
    inc = np.zeros(n, np.int64)
    done = np.zeros(n, np.bool_)
    p = np.empty(n, np.float64)
    heap = [(np.int64(0), np.int64(0), np.int64(0))]
    heap.pop()
    for u in range(n):
        heap.append((np.int64(0), -(offsets[u + 1] - offsets[u]), np.int64(u)))
    heapq.heapify(heap)
    pos = 0
    while heap:
        ninc, ndeg, u = heapq.heappop(heap)
        if done[u] or -ninc != inc[u]:
            continue
        done[u] = True
        p[u] = n - pos
        pos += 1
        for e in range(offsets[u], offsets[u + 1]):
            v = cols[e]
            if not done[v]:
                inc[v] += 1
                heapq.heappush(heap, (-inc[v], -(offsets[v + 1] - offsets[v]), np.int64(v)))
    return p


def order_id(g: CsrGraph, workers: int = 1) -> PriorityMap:
    """Incidence degree: most already-selected neighbors first, then degree, then id."""
    if g.n == 0:
        return PriorityMap([])
    return PriorityMap(_id_kernel(g.row_offsets, g.col_indices))


@numba.njit(cache=True)
def _first_free(offsets, cols, color, u, mark):
    """Smallest color not used by an already colored neighbor of ``u``."""
    stamp = u + 1
    for e in range(offsets[u], offsets[u + 1]):
        c = color[cols[e]]
        if c >= 0 and c < len(mark):
            mark[c] = stamp
    c = 0
    while mark[c] == stamp:
        c += 1
    return c


@numba.njit(cache=True)
def _sd_kernel(offsets, cols, maxdeg):
    n = len(offsets) - 1
    color = np.full(n, -1, np.int64)
    sat = np.zeros(n, np.int64)
    mark = np.zeros(maxdeg + 2, np.int64)
    seen = numba.typed.Dict.empty(numba.types.int64, numba.types.boolean)
    stride = maxdeg + 1
    p = np.empty(n, np.float64)
    heap = [(np.int64(0), np.int64(0), np.int64(0))]
    heap.pop()
    for u in range(n):
        heap.append((np.int64(0), -(offsets[u + 1] - offsets[u]), np.int64(u)))
    heapq.heapify(heap)
    pos = 0
    while heap:
        nsat, ndeg, u = heapq.heappop(heap)
        if color[u] >= 0 or -nsat != sat[u]:
            continue
        c = _first_free(offsets, cols, color, u, mark)
        color[u] = c
        p[u] = n - pos
        pos += 1
        for e in range(offsets[u], offsets[u + 1]):
            v = cols[e]
            if color[v] < 0:
                key = v * stride + c
                if key not in seen:
                    seen[key] = True
                    sat[v] += 1
                    heapq.heappush(heap, (-sat[v], -(offsets[v + 1] - offsets[v]), np.int64(v)))
    return p, color


def order_sd(g: CsrGraph, workers: int = 1) -> PriorityMap:
    """Saturation degree (DSATUR) order; ties by degree, then lowest id."""
    return PriorityMap(_sd_simulation(g)[0])


def _sd_simulation(g: CsrGraph):
    if g.n == 0:
        return np.empty(0), np.empty(0, np.int64)
    return _sd_kernel(g.row_offsets, g.col_indices, g.max_degree)


@numba.njit(cache=True)
def _sd_round_kernel(offsets, cols, maxdeg):
    n = len(offsets) - 1
    color = np.full(n, -1, np.int64)
    sat = np.zeros(n, np.int64)
    rnd = np.full(n, -1, np.int64)
    mark = np.zeros(maxdeg + 2, np.int64)
    seen = numba.typed.Dict.empty(numba.types.int64, numba.types.boolean)
    stride = maxdeg + 1
    members = np.empty(n, np.int64)
    heap = [(np.int64(0), np.int64(0), np.int64(0))]
    heap.pop()
    for u in range(n):
        heap.append((np.int64(0), -(offsets[u + 1] - offsets[u]), np.int64(u)))
    heapq.heapify(heap)
    r = 0
    while heap:
        ksat = heap[0][0]
        kdeg = heap[0][1]
        k = 0
        # every live vertex sharing the best (saturation, degree) key joins this round
        while heap and heap[0][0] == ksat and heap[0][1] == kdeg:
            nsat, ndeg, u = heapq.heappop(heap)
            if rnd[u] < 0 and -nsat == sat[u]:
                rnd[u] = r
                members[k] = u
                k += 1
        if k == 0:
            continue
        # heap order already yields ascending ids within a key
        for i in range(k):
            u = members[i]
            c = _first_free(offsets, cols, color, u, mark)
            color[u] = c
            for e in range(offsets[u], offsets[u + 1]):
                v = cols[e]
                if color[v] < 0:
                    key = v * stride + c
                    if key not in seen:
                        seen[key] = True
                        sat[v] += 1
                        if rnd[v] < 0:
                            heapq.heappush(heap, (-sat[v], -(offsets[v + 1] - offsets[v]), np.int64(v)))
        r += 1
    return rnd, r


def sd_rounds(g: CsrGraph) -> PriorityMap:
    """Saturation degree with shared priorities per round.

    Each step takes all uncolored vertices that tie on the best (saturation,
    degree) key, gives them one common priority, then colors them in ascending
    id order.  Earlier rounds get higher priority.
    """
    if g.n == 0:
        return PriorityMap([])
    rnd, total = _sd_round_kernel(g.row_offsets, g.col_indices, g.max_degree)
    return PriorityMap((total - 1 - rnd).astype(np.float64))


HEURISTICS = {
    "ff": order_ff,
    "lf": order_lf,
    "sl": order_sl,
    "id": order_id,
    "sd": order_sd,
}


def compute_order(g: CsrGraph, name: str, workers: int = 1) -> PriorityMap:
    try:
        fn = HEURISTICS[name]
    except KeyError:
        raise ValueError(f"unknown heuristic {name!r}; choose from {sorted(HEURISTICS)}") from None
    return fn(g, workers=workers)
