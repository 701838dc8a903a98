"""Neuroevolution of trained ordering models against the color count.

Fitness is lexicographic ``(total colors, total size of the top color class)``
over a fixed graph set, lower is better.  Each generation keeps the champion
unchanged and refills the population from the top ``T`` individuals using
Gaussian mutation, single-node mutation, or significant-parameter crossover.
"""
from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .coloring import greedy_color
from .gnn import GnnModel, infer_priorities, save_model
from .graph import CsrGraph

__all__ = [
    "Individual",
    "EvolveConfig",
    "GenerationRecord",
    "fitness",
    "mutate_gaussian",
    "mutate_node",
    "crossover_significant",
    "initial_population",
    "evolve",
    "write_fitness_history",
]

log = logging.getLogger(__name__)

CROSSOVER_FILL = 0.1


def fitness(model: GnnModel, graphs: Sequence[CsrGraph]) -> tuple[int, int]:
    if not graphs:
        raise ValueError("fitness needs at least one graph")
    colors = tie = 0
    for g in graphs:
        col = greedy_color(g, infer_priorities(g, model))
        colors += col.num_colors
        tie += col.max_color_multiplicity
    return colors, tie


@dataclass
class Individual:
    model: GnnModel
    fitness: tuple[int, int]


@dataclass
class EvolveConfig:
    population: int = 100
    truncation: int = 20
    generations: int = 500
    seed: int = 0
    # relative weights of gaussian, node and crossover operators
    operator_weights: tuple[float, float, float] = (0.4, 0.3, 0.3)
    sigma: float = 0.01
    workers: int = 1

    def __post_init__(self):
        if not 1 <= self.truncation <= self.population:
            raise ValueError("need 1 <= truncation <= population")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        w = np.asarray(self.operator_weights, dtype=float)
        if w.shape != (3,) or np.any(w < 0) or w.sum() <= 0:
            raise ValueError("operator_weights must be three nonnegative numbers, not all zero")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


def _map_params(model: GnnModel, fn) -> GnnModel:
    child = model.copy()
    for a in child.parameters():
        a[...] = fn(a)
    return child


def mutate_gaussian(model: GnnModel, sigma: float, rng: np.random.Generator) -> GnnModel:
    return _map_params(model, lambda a: a + rng.normal(0.0, sigma, a.shape).astype(np.float32))


def mutate_node(model: GnnModel, sigma: float, rng: np.random.Generator) -> GnnModel:
    """Perturb one hidden unit: its incoming weight column and its bias."""
    child = model.copy()
    layer = int(rng.integers(child.num_layers))
    j = int(rng.integers(child.weights[layer].shape[1]))
    W, b = child.weights[layer], child.biases[layer]
    W[:, j] += rng.normal(0.0, sigma, W.shape[0]).astype(np.float32)
    b[j] += np.float32(rng.normal(0.0, sigma))
    return child


def crossover_significant(a: GnnModel, b: GnnModel, rng: np.random.Generator) -> GnnModel:
    """Keep the larger-magnitude parent value where it ranks in the top half of its layer.

    Ranking is by ``max(|a_i|, |b_i|)`` over all weights and biases of a layer;
    ties go to the earlier position, and equal magnitudes copy from ``a``.  The
    remaining positions are refilled uniformly from ``[-0.1, 0.1]``.
    """
    if a.num_layers != b.num_layers:
        raise ValueError("parents differ in layer count")
    child = a.copy()
    for i in range(a.num_layers):
        pa = np.concatenate([a.weights[i].ravel(), a.biases[i]])
        pb = np.concatenate([b.weights[i].ravel(), b.biases[i]])
        mag_a, mag_b = np.abs(pa), np.abs(pb)
        strength = np.maximum(mag_a, mag_b)
        keep = np.zeros(len(pa), bool)
        keep[np.argsort(-strength, kind="stable")[: (len(pa) + 1) // 2]] = True
        out = rng.uniform(-CROSSOVER_FILL, CROSSOVER_FILL, len(pa)).astype(np.float32)
        out[keep] = np.where(mag_b[keep] > mag_a[keep], pb[keep], pa[keep])
        nw = a.weights[i].size
        child.weights[i][...] = out[:nw].reshape(a.weights[i].shape)
        child.biases[i][...] = out[nw:]
    return child


def initial_population(models: Sequence[GnnModel], size: int, sigma: float, seed=0) -> list[GnnModel]:
    """Seed models first, then jittered copies of them (round robin) up to ``size``."""
    if not models:
        raise ValueError("need at least one seed model")
    if len({m.num_layers for m in models}) != 1:
        raise ValueError("models with different numbers of layers cannot be mixed")
    rng = np.random.default_rng([seed, 2])
    pop = [m.copy() for m in models[:size]]
    i = 0
    while len(pop) < size:
        pop.append(mutate_gaussian(models[i % len(models)], sigma, rng))
        i += 1
    return pop


@dataclass
class GenerationRecord:
    generation: int
    best_colors: int
    best_tiebreak: int


def _score(models, graphs, workers) -> list[tuple[int, int]]:
    if workers <= 1 or len(models) == 1:
        return [fitness(m, graphs) for m in models]
    # kernels called here are serial and release the GIL
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(lambda m: fitness(m, graphs), models))


def evolve(
    population: Sequence[GnnModel],
    graphs: Sequence[CsrGraph],
    cfg: EvolveConfig,
    on_generation: Callable[[int, Individual], None] | None = None,
) -> tuple[Individual, list[GenerationRecord]]:
    """Truncation selection with elitism.

    Returns the best individual ever seen and one history record per
    generation (generation 0 is the scored initial population).
    """
    if len(population) != cfg.population:
        raise ValueError(f"population has {len(population)} models, config expects {cfg.population}")
    if len({m.num_layers for m in population}) != 1:
        raise ValueError("models with different numbers of layers cannot be mixed")
    rng = np.random.default_rng(cfg.seed)
    weights = np.asarray(cfg.operator_weights, dtype=float)
    weights = weights / weights.sum()

    pop = [Individual(m.copy(), f) for m, f in zip(population, _score(population, graphs, cfg.workers))]
    pop.sort(key=lambda ind: ind.fitness)
    best = pop[0]
    history = [GenerationRecord(0, *best.fitness)]
    for gen in range(1, cfg.generations + 1):
        parents = pop[: cfg.truncation]
        children = []
        for _ in range(cfg.population - 1):
            op = rng.choice(3, p=weights)
            a = parents[int(rng.integers(len(parents)))].model
            if op == 0:
                children.append(mutate_gaussian(a, cfg.sigma, rng))
            elif op == 1:
                children.append(mutate_node(a, cfg.sigma, rng))
            else:
                b = parents[int(rng.integers(len(parents)))].model
                children.append(crossover_significant(a, b, rng))
        scored = [Individual(m, f) for m, f in zip(children, _score(children, graphs, cfg.workers))]
        # champion goes first so it wins every fitness tie
        pop = sorted([pop[0]] + scored, key=lambda ind: ind.fitness)
        if pop[0].fitness < best.fitness:
            best = pop[0]
        history.append(GenerationRecord(gen, *best.fitness))
        log.debug("generation %d best %s", gen, best.fitness)
        if on_generation is not None:
            on_generation(gen, best)
    return best, history


def write_fitness_history(history: Sequence[GenerationRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["generation", "best_colors", "best_tiebreak"])
        for r in history:
            w.writerow([r.generation, r.best_colors, r.best_tiebreak])


def checkpoint_every(k: int, directory: str | Path) -> Callable[[int, Individual], None]:
    """Callback for :func:`evolve` that writes the champion every ``k`` generations."""
    directory = Path(directory)

    def cb(gen: int, best: Individual) -> None:
        if k > 0 and gen % k == 0:
            save_model(best.model, directory / f"champion-gen{gen:04d}.gsgc")

    return cb
