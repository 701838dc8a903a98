"""Undirected simple graphs in compressed sparse row form, plus loaders."""
from __future__ import annotations

import io
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

__all__ = [
    "CsrGraph",
    "GraphFormatError",
    "from_edges",
    "load_edge_list",
    "load_dimacs_col",
    "load_graph",
    "write_edge_list",
    "save_binary",
    "load_binary",
    "degree",
    "erdos_renyi",
]

_INT32_MAX = np.iinfo(np.int32).max


class GraphFormatError(ValueError):
    """Raised for malformed graph input; carries the 1-based line number."""

    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


@dataclass(frozen=True, eq=False)
class CsrGraph:
    """Immutable undirected simple graph.

    ``row_offsets`` is int64 of length ``n + 1``; ``col_indices`` holds both
    directions of every edge, sorted ascending inside each row.  Vertex ids are
    stored as int32 whenever they fit.
    """

    n: int
    m: int
    row_offsets: np.ndarray
    col_indices: np.ndarray

    def __post_init__(self):
        self.row_offsets.setflags(write=False)
        self.col_indices.setflags(write=False)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.row_offsets)

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.n else 0

    def neighbors(self, u: int) -> np.ndarray:
        _check_vertex(self, u)
        return self.col_indices[self.row_offsets[u] : self.row_offsets[u + 1]]

    def edges(self) -> np.ndarray:
        """Undirected edges as an ``(m, 2)`` array with ``u < v``, lexicographic."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        keep = src < self.col_indices
        return np.column_stack([src[keep], self.col_indices[keep].astype(np.int64)])

    def directed_edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Source and target of every stored (directed) edge, in CSR order."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        return src, self.col_indices.astype(np.int64)

    def __eq__(self, other):
        if not isinstance(other, CsrGraph):
            return NotImplemented
        return (
            self.n == other.n
            and self.m == other.m
            and self.col_indices.dtype == other.col_indices.dtype
            and np.array_equal(self.row_offsets, other.row_offsets)
            and np.array_equal(self.col_indices, other.col_indices)
        )

    def __repr__(self):
        return f"CsrGraph(n={self.n}, m={self.m})"

    def check(self) -> None:
        """Full O(n + m) scan of the structural invariants; raises AssertionError."""
        ro, ci = self.row_offsets, self.col_indices
        assert len(ro) == self.n + 1 and ro[0] == 0 and ro[-1] == 2 * self.m
        assert np.all(np.diff(ro) >= 0)
        src, dst = self.directed_edges()
        assert not np.any(src == dst), "self-loop"
        if len(dst):
            assert dst.min() >= 0 and dst.max() < self.n
            # strictly ascending within each row, so no duplicates either
            same_row = src[1:] == src[:-1]
            assert np.all(dst[1:][same_row] > dst[:-1][same_row])
        fwd = np.sort(src * self.n + dst)
        rev = np.sort(dst * self.n + src)
        assert np.array_equal(fwd, rev), "asymmetric adjacency"


def _check_vertex(g: CsrGraph, u: int) -> None:
    if not 0 <= u < g.n:
        raise IndexError(f"vertex {u} out of range for n={g.n}")


def degree(g: CsrGraph, u: int) -> int:
    _check_vertex(g, u)
    return int(g.row_offsets[u + 1] - g.row_offsets[u])


def from_edges(n: int, edges) -> CsrGraph:
    """Build a normalized graph on vertices ``0..n-1`` from an edge array.

    Self-loops are dropped, duplicates and reverse duplicates merged.
    """
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if len(e) and (e.min() < 0 or e.max() >= n):
        raise ValueError("edge endpoint out of range")
    e = e[e[:, 0] != e[:, 1]]
    src = np.concatenate([e[:, 0], e[:, 1]])
    dst = np.concatenate([e[:, 1], e[:, 0]])
    keys = np.unique(src * n + dst) if n else np.empty(0, np.int64)
    src, dst = np.divmod(keys, n) if n else (keys, keys)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=offsets[1:])
    col_dtype = np.int32 if n <= _INT32_MAX else np.int64
    return CsrGraph(n, len(keys) // 2, offsets, dst.astype(col_dtype))


def _lines(stream) -> Iterable[str]:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    return stream


def load_edge_list(stream: TextIO | str) -> CsrGraph:
    """Parse a SNAP-style whitespace separated edge list.

    Vertex ids are compacted to ``0..n-1`` by ascending numeric value, so ids
    that never occur in an edge are not represented.
    """
    us: list[int] = []
    vs: list[int] = []
    for lineno, line in enumerate(_lines(stream), 1):
        s = line.strip()
        if not s or s.startswith("#") or s.startswith("%"):
            continue
        tok = s.split()
        if len(tok) != 2:
            raise GraphFormatError(f"expected two vertex ids, got {len(tok)} tokens", lineno)
        try:
            u, v = int(tok[0]), int(tok[1])
        except ValueError:
            raise GraphFormatError(f"malformed vertex id in {s!r}", lineno) from None
        if u < 0 or v < 0:
            raise GraphFormatError("negative vertex id", lineno)
        us.append(u)
        vs.append(v)
    raw = np.array([us, vs], dtype=np.int64).T
    ids, compact = np.unique(raw, return_inverse=True)
    return from_edges(len(ids), compact.reshape(-1, 2))


def load_dimacs_col(stream: TextIO | str) -> CsrGraph:
    """Parse the DIMACS ``.col`` format (1-based ids, declared vertex count)."""
    n = None
    edges: list[tuple[int, int]] = []
    for lineno, line in enumerate(_lines(stream), 1):
        tok = line.split()
        if not tok or tok[0] == "c":
            continue
        kind = tok[0]
        if kind == "p":
            if n is not None:
                raise GraphFormatError("duplicate problem line", lineno)
            if len(tok) < 4:
                raise GraphFormatError("problem line needs 'p edge <n> <m>'", lineno)
            try:
                n = int(tok[2])
            except ValueError:
                raise GraphFormatError(f"bad vertex count {tok[2]!r}", lineno) from None
            if n < 0:
                raise GraphFormatError("negative vertex count", lineno)
        elif kind == "e":
            if n is None:
                raise GraphFormatError("edge line before problem line", lineno)
            if len(tok) != 3:
                raise GraphFormatError("edge line needs 'e <u> <v>'", lineno)
            try:
                u, v = int(tok[1]), int(tok[2])
            except ValueError:
                raise GraphFormatError(f"malformed vertex id in {line.strip()!r}", lineno) from None
            if not (1 <= u <= n and 1 <= v <= n):
                raise GraphFormatError(f"vertex id out of range [1, {n}]", lineno)
            edges.append((u - 1, v - 1))
        elif kind == "n":
            continue
        else:
            raise GraphFormatError(f"unknown line type {kind!r}", lineno)
    if n is None:
        raise GraphFormatError("missing problem line")
    return from_edges(n, edges)


def load_graph(path: str | Path) -> CsrGraph:
    """Load by extension: ``.col`` is DIMACS, ``.csrg`` the binary cache, else an edge list."""
    path = Path(path)
    if path.suffix == ".csrg":
        return load_binary(path)
    with open(path) as fh:
        if path.suffix == ".col":
            return load_dimacs_col(fh)
        return load_edge_list(fh)


def write_edge_list(g: CsrGraph, stream: TextIO) -> None:
    stream.write(f"# n={g.n} m={g.m}\n")
    np.savetxt(stream, g.edges(), fmt="%d")


_MAGIC = b"CSRG"
_VERSION = 1


def save_binary(g: CsrGraph, path: str | Path) -> None:
    with open(path, "wb") as fh:
        fh.write(_MAGIC + struct.pack("<Bqq", _VERSION, g.n, g.m))
        fh.write(g.row_offsets.astype("<i8").tobytes())
        fh.write(g.col_indices.astype("<i8").tobytes())


def load_binary(path: str | Path) -> CsrGraph:
    raw = Path(path).read_bytes()
    if raw[:4] != _MAGIC:
        raise GraphFormatError("not a CSRG file")
    version, n, m = struct.unpack_from("<Bqq", raw, 4)
    if version != _VERSION:
        raise GraphFormatError(f"unsupported CSRG version {version}")
    pos = 4 + struct.calcsize("<Bqq")
    offsets = np.frombuffer(raw, "<i8", n + 1, pos).astype(np.int64)
    cols = np.frombuffer(raw, "<i8", 2 * m, pos + 8 * (n + 1))
    col_dtype = np.int32 if n <= _INT32_MAX else np.int64
    return CsrGraph(n, m, offsets, cols.astype(col_dtype))


def erdos_renyi(n: int, m: int, seed=None) -> CsrGraph:
    """Random graph with ``n`` vertices and (close to) ``m`` distinct edges.

    Samples endpoint pairs uniformly and deduplicates, topping up until ``m``
    edges exist or the graph is complete.  Scales to ~1e7 edges.
    """
    rng = np.random.default_rng(seed)
    m = min(m, n * (n - 1) // 2)
    keys = np.empty(0, np.int64)
    while len(keys) < m:
        need = m - len(keys)
        k = int(need * 1.05) + 16
        u = rng.integers(0, n, k)
        v = rng.integers(0, n, k)
        ok = u != v
        lo, hi = np.minimum(u[ok], v[ok]), np.maximum(u[ok], v[ok])
        keys = np.union1d(keys, lo * n + hi)
    if len(keys) > m:
        keys = rng.choice(keys, m, replace=False)
    return from_edges(n, np.column_stack(np.divmod(keys, n)))
