"""Supervised training of the GraphSAGE ordering model on edge labels.

Every undirected edge is seen in both directions.  An edge ``(u, v)`` is
labelled 1 when the teacher heuristic puts ``u`` strictly before ``v`` and the
model predicts ``sigmoid(P(u) - P(v))`` with ``P(u)`` the sum of the final
embedding of ``u``.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from .coloring import greedy_color
from .gnn import HIDDEN, IN_FEATURES, GnnModel, infer_priorities, initial_features
from .graph import CsrGraph
from .ordering import PriorityMap, order_ff, order_lf, order_sl, sd_rounds

__all__ = [
    "LABEL_SOURCES",
    "EdgeLabelSet",
    "TrainConfig",
    "EpochRecord",
    "Adam",
    "make_labels",
    "predict_edge",
    "bce_loss",
    "f1_score",
    "parameter_init",
    "GraphBatch",
    "loss_and_grad",
    "reference_priorities",
    "train_supervised",
    "write_history",
]

log = logging.getLogger(__name__)

BCE_EPS = 1e-7

# SL and SD are the teachers used for real models; LF and FF are sanity teachers
LABEL_SOURCES = {"sl": order_sl, "sd": sd_rounds, "lf": order_lf, "ff": order_ff}


@dataclass(frozen=True, eq=False)
class EdgeLabelSet:
    """One bit per stored directed edge, aligned with the graph's CSR order."""

    src: np.ndarray
    dst: np.ndarray
    labels: np.ndarray

    def __len__(self):
        return len(self.labels)

    def label(self, g: CsrGraph, u: int, v: int) -> int:
        row = g.neighbors(u)
        i = int(np.searchsorted(row, v))
        if i == len(row) or row[i] != v:
            raise KeyError(f"({u}, {v}) is not an edge")
        return int(self.labels[g.row_offsets[u] + i])


def _priorities_for(g: CsrGraph, source) -> PriorityMap:
    if isinstance(source, PriorityMap):
        return source
    try:
        return LABEL_SOURCES[str(source).lower()](g)
    except KeyError:
        raise ValueError(f"unknown label source {source!r}; choose from {sorted(LABEL_SOURCES)}") from None


def make_labels(g: CsrGraph, source="sl") -> EdgeLabelSet:
    """Label each directed edge 1 iff the teacher priority of its tail is strictly higher."""
    p = _priorities_for(g, source).p
    src, dst = g.directed_edges()
    return EdgeLabelSet(src, dst, (p[src] > p[dst]).astype(np.uint8))


def predict_edge(model: GnnModel, g: CsrGraph, u: int, v: int) -> float:
    if v not in g.neighbors(u):
        raise ValueError(f"{u} and {v} are not adjacent")
    p = infer_priorities(g, model).p
    return float(expit(p[u] - p[v]))


def bce_loss(predictions, labels) -> float:
    yhat = np.clip(np.asarray(predictions, dtype=np.float64), BCE_EPS, 1 - BCE_EPS)
    y = np.asarray(labels, dtype=np.float64)
    if yhat.shape != y.shape:
        raise ValueError("predictions and labels differ in length")
    return float(-np.mean(y * np.log(yhat) + (1 - y) * np.log1p(-yhat)))


def f1_score(predictions, labels) -> float:
    """F1 of the positive class; a prediction of exactly 0.5 counts as negative."""
    pred = np.asarray(predictions) > 0.5
    y = np.asarray(labels).astype(bool)
    if pred.shape != y.shape or pred.size == 0:
        raise ValueError("need equal-length, nonempty inputs")
    return _f1(int(np.sum(pred & y)), int(np.sum(pred & ~y)), int(np.sum(~pred & y)))


def _f1(tp: int, fp: int, fn: int) -> float:
    return 0.0 if tp == 0 else 2 * tp / (2 * tp + fp + fn)


@dataclass
class TrainConfig:
    epochs: int = 200
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    labels: str = "sl"
    layers: int = 2

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError("learning rate must be positive")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("Adam betas must lie in (0, 1)")
        if self.layers not in (2, 3, 4):
            raise ValueError("layer count must be 2, 3 or 4")
        if self.epochs < 0:
            raise ValueError("epochs must be nonnegative")
        if self.labels.lower() not in LABEL_SOURCES:
            raise ValueError(f"unknown label source {self.labels!r}")


def parameter_init(cfg: TrainConfig) -> GnnModel:
    """Glorot-uniform weights, zero biases."""
    rng = np.random.default_rng(cfg.seed)
    dims = [IN_FEATURES] + [HIDDEN] * cfg.layers
    weights, biases = [], []
    for i in range(cfg.layers):
        fan_in, fan_out = 2 * dims[i], dims[i + 1]
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, (fan_in, fan_out)).astype(np.float32))
        biases.append(np.zeros(fan_out, np.float32))
    return GnnModel(weights, biases)


class Adam:
    def __init__(self, params: list[np.ndarray], lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        """Update ``params`` in place."""
        self.t += 1
        bc1 = 1 - self.beta1**self.t
        bc2 = 1 - self.beta2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * (g * g)
            p -= (self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)).astype(p.dtype)


class GraphBatch:
    """Everything the training loop needs about one graph, precomputed once."""

    def __init__(self, g: CsrGraph, labels: EdgeLabelSet | None = None, dtype=np.float32):
        self.g = g
        self.dtype = dtype
        deg = g.degrees.astype(np.float64)
        inv = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
        src, dst = g.directed_edges()
        self.src, self.dst = src, dst
        self.mean = sp.csr_matrix((inv[src], (src, dst)), shape=(g.n, g.n)).astype(dtype)
        self.mean_t = self.mean.T.tocsr()
        self.h0 = initial_features(g).astype(dtype)
        self.labels = labels
        self.y = None if labels is None else labels.labels.astype(dtype)

    def astype(self, dtype) -> "GraphBatch":
        return GraphBatch(self.g, self.labels, dtype)


def _forward(params, batch: GraphBatch):
    H = batch.h0
    cache = []
    nl = len(params) // 2
    for i in range(nl):
        W, b = params[2 * i], params[2 * i + 1]
        X = np.hstack([H, batch.mean @ H])
        Z = X @ W + b
        cache.append((X, Z))
        H = Z if i == nl - 1 else np.maximum(Z, 0)
    return H, cache


def reference_priorities(model: GnnModel, g: CsrGraph, dtype=np.float32) -> np.ndarray:
    """Priorities from the training-side (sparse matrix) forward pass."""
    batch = GraphBatch(g, dtype=dtype)
    H, _ = _forward([a.astype(dtype) for a in model.parameters()], batch)
    return H.sum(axis=1)


def loss_and_grad(params: Sequence[np.ndarray], batch: GraphBatch):
    """Mean edge BCE of one graph and its gradient for every parameter array."""
    dt = batch.dtype
    params = [np.asarray(p, dtype=dt) for p in params]
    H, cache = _forward(params, batch)
    E = len(batch.src)
    if E == 0:
        return 0.0, [np.zeros_like(p) for p in params]
    p = H.sum(axis=1)
    s = p[batch.src] - p[batch.dst]
    yhat = expit(s)
    y = batch.y
    clipped = np.clip(yhat, BCE_EPS, 1 - BCE_EPS)
    loss = float(-np.mean(y * np.log(clipped) + (1 - y) * np.log1p(-clipped)))

    # d/ds of the clamped BCE is (yhat - y) inside the clamp range, zero outside
    inside = (yhat > BCE_EPS) & (yhat < 1 - BCE_EPS)
    gs = np.where(inside, (yhat - y) / E, 0).astype(dt)
    n = batch.g.n
    gp = (np.bincount(batch.src, gs, n) - np.bincount(batch.dst, gs, n)).astype(dt)
    gH = np.repeat(gp[:, None], H.shape[1], axis=1)

    grads = [None] * len(params)
    nl = len(params) // 2
    for i in range(nl - 1, -1, -1):
        X, Z = cache[i]
        W = params[2 * i]
        gZ = gH if i == nl - 1 else gH * (Z > 0)
        grads[2 * i] = X.T @ gZ
        grads[2 * i + 1] = gZ.sum(axis=0)
        if i:
            gX = gZ @ W.T
            d = W.shape[0] // 2
            gH = gX[:, :d] + batch.mean_t @ gX[:, d:]
    return loss, grads


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    f1: float
    holdout_colors: int


def _evaluate(model: GnnModel, batches: Sequence[GraphBatch]) -> tuple[float, int]:
    tp = fp = fn = 0
    colors = 0
    for b in batches:
        pm = infer_priorities(b.g, model)
        colors += greedy_color(b.g, pm).num_colors
        pred = expit(pm.p[b.src] - pm.p[b.dst]) > 0.5
        y = b.labels.labels.astype(bool)
        tp += int(np.sum(pred & y))
        fp += int(np.sum(pred & ~y))
        fn += int(np.sum(~pred & y))
    return _f1(tp, fp, fn), colors


def train_supervised(
    graphs: Sequence[CsrGraph],
    cfg: TrainConfig,
    holdout: Sequence[CsrGraph] | None = None,
    init: GnnModel | None = None,
) -> tuple[GnnModel, list[EpochRecord]]:
    """One Adam step per graph per epoch, graphs visited in a seeded shuffle.

    F1 and greedy color totals are measured on ``holdout`` after every epoch
    (on the training graphs when no holdout is given).
    """
    if not graphs:
        raise ValueError("need at least one training graph")
    model = init.copy() if init is not None else parameter_init(cfg)
    if model.num_layers != cfg.layers:
        raise ValueError("initial model layer count differs from the config")
    train = [GraphBatch(g, make_labels(g, cfg.labels)) for g in graphs]
    held = train if not holdout else [GraphBatch(g, make_labels(g, cfg.labels)) for g in holdout]
    params = model.parameters()
    opt = Adam(params, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps)
    rng = np.random.default_rng([cfg.seed, 1])
    history = []
    for epoch in range(1, cfg.epochs + 1):
        total = 0.0
        for gi in rng.permutation(len(train)):
            loss, grads = loss_and_grad(params, train[gi])
            if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads):
                raise FloatingPointError(
                    f"non-finite loss (seed={cfg.seed}, epoch={epoch}, graph index={gi})"
                )
            opt.step(params, grads)
            total += loss
        f1, colors = _evaluate(model, held)
        rec = EpochRecord(epoch, total / len(train), f1, colors)
        history.append(rec)
        log.debug("epoch %d loss %.5f f1 %.4f colors %d", epoch, rec.loss, rec.f1, rec.holdout_colors)
    return model, history


def write_history(history: Sequence[EpochRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f.name for f in fields(EpochRecord)])
        for r in history:
            w.writerow([r.epoch, repr(r.loss), repr(r.f1), r.holdout_colors])
