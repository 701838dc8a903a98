"""Train a 2-layer GraphSAGE ordering on SL labels, then refine it genetically.

Run: python3 demos/02_train_and_evolve.py   (a few minutes on one core)
"""
from gnncolor.coloring import greedy_color
from gnncolor.corpus import desk_corpus
from gnncolor.genetic import EvolveConfig, evolve, initial_population
from gnncolor.gnn import infer_priorities, save_model
from gnncolor.ordering import order_lf, order_sl
from gnncolor.training import TrainConfig, train_supervised

sp = desk_corpus()
train = [g for _, g in sp["train"]]
test = [g for _, g in sp["test"]]


def total(graphs, order):
    return sum(greedy_color(g, order(g)).num_colors for g in graphs)


model, history = train_supervised(train, TrainConfig(epochs=200, labels="sl", seed=0), holdout=test)
for rec in history[::40] + history[-1:]:
    print(f"epoch {rec.epoch:3d}  loss {rec.loss:.4f}  test F1 {rec.f1:.3f}  test colors {rec.holdout_colors}")

print("test colors  LF", total(test, order_lf), " SL", total(test, order_sl),
      " GNN-2", total(test, lambda g: infer_priorities(g, model)))

cfg = EvolveConfig(population=20, truncation=5, generations=20, seed=0)
best, hist = evolve(initial_population([model], cfg.population, cfg.sigma), train, cfg)
print("training colors through evolution:", [r.best_colors for r in hist[::5]] + [hist[-1].best_colors])
print("test colors after evolution:", total(test, lambda g: infer_priorities(g, best.model)))
save_model(best.model, "gnn2.gsgc")
print("saved gnn2.gsgc; try: gnncolor color <graph> --heuristic gnn:gnn2.gsgc")
