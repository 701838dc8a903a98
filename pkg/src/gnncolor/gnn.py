"""GraphSAGE forward pass over a CsrGraph, producing vertex priorities.

Each layer maps ``H`` to ``act(concat(H_u, mean_{v in N(u)} H_v) @ W + b)``.
All layers but the last use ReLU; the last is linear so priorities can be
negative.  Parameters and activations are float32.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np

from ._parallel import chunk_bounds, use_workers
from .graph import CsrGraph
from .ordering import PriorityMap

__all__ = [
    "HIDDEN",
    "IN_FEATURES",
    "GnnModel",
    "initial_features",
    "sage_layer",
    "sage_layer_reference",
    "forward",
    "forward_reference",
    "infer_priorities",
    "save_model",
    "load_model",
]

HIDDEN = 16
IN_FEATURES = 2


@dataclass(eq=False)
class GnnModel:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    feature_scheme: int = field(default=0)

    def __post_init__(self):
        self.weights = [np.ascontiguousarray(w, dtype=np.float32) for w in self.weights]
        self.biases = [np.ascontiguousarray(b, dtype=np.float32) for b in self.biases]
        if not 2 <= len(self.weights) <= 4 or len(self.weights) != len(self.biases):
            raise ValueError("a model has 2 to 4 layers, each with a weight and a bias")
        d = IN_FEATURES
        for w, b in zip(self.weights, self.biases):
            if w.shape != (2 * d, HIDDEN) or b.shape != (HIDDEN,):
                raise ValueError(f"layer shapes {w.shape}, {b.shape} break the dimension chain")
            d = HIDDEN
        if not all(np.all(np.isfinite(a)) for a in self.weights + self.biases):
            raise ValueError("non-finite parameter")

    @property
    def num_layers(self) -> int:
        return len(self.weights)

    @property
    def layers(self):
        return list(zip(self.weights, self.biases))

    @classmethod
    def zeros(cls, num_layers: int) -> "GnnModel":
        dims = [IN_FEATURES] + [HIDDEN] * num_layers
        return cls(
            [np.zeros((2 * dims[i], dims[i + 1]), np.float32) for i in range(num_layers)],
            [np.zeros(dims[i + 1], np.float32) for i in range(num_layers)],
        )

    def copy(self) -> "GnnModel":
        return GnnModel([w.copy() for w in self.weights], [b.copy() for b in self.biases], self.feature_scheme)

    def parameters(self) -> list[np.ndarray]:
        """Parameter arrays in file order: W0, b0, W1, b1, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.parameters()])

    def num_parameters(self) -> int:
        return sum(a.size for a in self.parameters())

    def __eq__(self, other):
        if not isinstance(other, GnnModel):
            return NotImplemented
        return self.num_layers == other.num_layers and all(
            np.array_equal(a, b) for a, b in zip(self.parameters(), other.parameters())
        )


def initial_features(g: CsrGraph) -> np.ndarray:
    """Per-vertex (degree / max degree, id / (n - 1)), both in [0, 1]."""
    deg = g.degrees.astype(np.float64)
    h = np.empty((g.n, IN_FEATURES), np.float64)
    h[:, 0] = deg / max(1, g.max_degree)
    h[:, 1] = np.arange(g.n) / max(1, g.n - 1)
    return h.astype(np.float32)


@numba.njit(nogil=True, cache=True)
def _sage_rows(offsets, cols, H, W, b, relu, out, lo, hi):
    d = H.shape[1]
    dout = W.shape[1]
    buf = np.empty(2 * d, np.float32)
    zero = np.float32(0.0)
    for u in range(lo, hi):
        for j in range(d):
            buf[j] = H[u, j]
            buf[d + j] = zero
        deg = offsets[u + 1] - offsets[u]
        for e in range(offsets[u], offsets[u + 1]):
            v = cols[e]
            for j in range(d):
                buf[d + j] += H[v, j]
        if deg > 0:
            inv = np.float32(deg)
            for j in range(d):
                buf[d + j] = buf[d + j] / inv
        for k in range(dout):
            acc = b[k]
            for j in range(2 * d):
                acc += buf[j] * W[j, k]
            if relu and acc < zero:
                acc = zero
            out[u, k] = acc


@numba.njit(nogil=True, cache=True)
def _layer_serial(offsets, cols, H, W, b, relu):
    n = len(offsets) - 1
    out = np.empty((n, W.shape[1]), np.float32)
    _sage_rows(offsets, cols, H, W, b, relu, out, 0, n)
    return out


@numba.njit(parallel=True, cache=True)
def _layer_parallel(offsets, cols, H, W, b, relu, nchunks):
    n = len(offsets) - 1
    out = np.empty((n, W.shape[1]), np.float32)
    bounds = chunk_bounds(n, nchunks)
    for c in numba.prange(nchunks):
        _sage_rows(offsets, cols, H, W, b, relu, out, bounds[c], bounds[c + 1])
    return out


def sage_layer(g: CsrGraph, H: np.ndarray, layer, apply_activation: bool, workers: int = 1) -> np.ndarray:
    """One GraphSAGE layer; ``layer`` is a ``(W, b)`` pair."""
    W, b = (np.ascontiguousarray(a, dtype=np.float32) for a in layer)
    H = np.ascontiguousarray(H, dtype=np.float32)
    if H.shape != (g.n, W.shape[0] // 2) or W.shape[0] % 2 or b.shape != (W.shape[1],):
        raise ValueError(f"shape mismatch: H {H.shape}, W {W.shape}, b {b.shape}")
    if workers <= 1:
        return _layer_serial(g.row_offsets, g.col_indices, H, W, b, bool(apply_activation))
    with use_workers(workers):
        return _layer_parallel(g.row_offsets, g.col_indices, H, W, b, bool(apply_activation), workers)


def forward(g: CsrGraph, model: GnnModel, workers: int = 1) -> np.ndarray:
    """Final-layer embeddings, shape ``(n, 16)``."""
    H = initial_features(g)
    last = model.num_layers - 1
    for i, layer in enumerate(model.layers):
        H = sage_layer(g, H, layer, i != last, workers)
    return H


def infer_priorities(g: CsrGraph, model: GnnModel, workers: int = 1) -> PriorityMap:
    """Priority of each vertex is the sum of its final embedding."""
    if g.n == 0:
        return PriorityMap([])
    return PriorityMap(forward(g, model, workers).sum(axis=1, dtype=np.float32))


def sage_layer_reference(g: CsrGraph, H, layer, apply_activation: bool) -> np.ndarray:
    """Dense float64 evaluation of one layer; slow, only for checking."""
    W, b = (np.asarray(a, dtype=np.float64) for a in layer)
    H = np.asarray(H, dtype=np.float64)
    A = np.zeros((g.n, g.n))
    src, dst = g.directed_edges()
    A[src, dst] = 1.0
    deg = A.sum(axis=1, keepdims=True)
    T = np.divide(A @ H, deg, out=np.zeros_like(H), where=deg > 0)
    out = np.hstack([H, T]) @ W + b
    return np.maximum(out, 0.0) if apply_activation else out


def forward_reference(g: CsrGraph, model: GnnModel) -> np.ndarray:
    H = initial_features(g).astype(np.float64)
    last = model.num_layers - 1
    for i, layer in enumerate(model.layers):
        H = sage_layer_reference(g, H, layer, i != last)
    return H


_MAGIC = b"GSGC"
_VERSION = 1


def save_model(model: GnnModel, path: str | Path) -> None:
    with open(path, "wb") as fh:
        fh.write(_MAGIC + struct.pack("<BBB", _VERSION, model.feature_scheme, model.num_layers))
        for w, b in zip(model.weights, model.biases):
            fh.write(struct.pack("<II", *w.shape))
            fh.write(w.astype("<f4").tobytes())
            fh.write(b.astype("<f4").tobytes())


def load_model(path: str | Path) -> GnnModel:
    raw = Path(path).read_bytes()
    if raw[:4] != _MAGIC:
        raise ValueError(f"{path}: not a GSGC weight file")
    if len(raw) < 7:
        raise ValueError(f"{path}: truncated header")
    version, scheme, nl = struct.unpack_from("<BBB", raw, 4)
    if version != _VERSION:
        raise ValueError(f"{path}: unsupported weight file version {version}")
    if scheme != 0:
        raise ValueError(f"{path}: unknown feature scheme {scheme}")
    if nl not in (2, 3, 4):
        raise ValueError(f"{path}: layer count {nl} outside 2..4")
    pos = 7
    weights, biases = [], []
    expect_in = 2 * IN_FEATURES
    for _ in range(nl):
        if pos + 8 > len(raw):
            raise ValueError(f"{path}: truncated layer header")
        rows, cols = struct.unpack_from("<II", raw, pos)
        pos += 8
        if rows != expect_in or cols != HIDDEN:
            raise ValueError(f"{path}: inconsistent dimensions {rows}x{cols}")
        need = 4 * (rows * cols + cols)
        if pos + need > len(raw):
            raise ValueError(f"{path}: truncated parameters")
        weights.append(np.frombuffer(raw, "<f4", rows * cols, pos).reshape(rows, cols).astype(np.float32))
        pos += 4 * rows * cols
        biases.append(np.frombuffer(raw, "<f4", cols, pos).astype(np.float32))
        pos += 4 * cols
        expect_in = 2 * HIDDEN
    if pos != len(raw):
        raise ValueError(f"{path}: trailing bytes")
    return GnnModel(weights, biases, scheme)
