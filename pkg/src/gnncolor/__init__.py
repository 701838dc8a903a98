"""Greedy graph coloring with classic and learned vertex orderings."""
__version__ = "0.1.0"

from .graph import CsrGraph, GraphFormatError, from_edges, load_binary, load_graph, load_edge_list, load_dimacs_col, save_binary
from .ordering import PriorityMap, order_ff, order_lf, order_sl, order_id, order_sd, compute_order
from .coloring import Coloring, greedy_color, jp_color, culberson_recolor, validate
from .gnn import GnnModel, forward, infer_priorities, load_model, save_model
from .training import TrainConfig, make_labels, train_supervised
from .genetic import EvolveConfig, evolve, fitness, initial_population

__all__ = [
    "CsrGraph", "GraphFormatError", "from_edges", "load_graph", "load_edge_list", "load_dimacs_col",
    "load_binary", "save_binary",
    "PriorityMap", "order_ff", "order_lf", "order_sl", "order_id", "order_sd", "compute_order",
    "Coloring", "greedy_color", "jp_color", "culberson_recolor", "validate",
    "GnnModel", "forward", "infer_priorities", "load_model", "save_model",
    "TrainConfig", "make_labels", "train_supervised",
    "EvolveConfig", "evolve", "fitness", "initial_population",
]
