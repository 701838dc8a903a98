"""Colors used by each classic ordering across the built-in corpus.

Run: python3 demos/01_heuristics_on_corpus.py
"""
from gnncolor.coloring import culberson_recolor, greedy_color
from gnncolor.corpus import desk_corpus
from gnncolor.ordering import HEURISTICS

splits = desk_corpus()
graphs = [item for items in splits.values() for item in items]
print(f"{len(graphs)} graphs")

totals = dict.fromkeys(HEURISTICS, 0)
for name, g in graphs:
    row = []
    for h, fn in HEURISTICS.items():
        k = greedy_color(g, fn(g)).num_colors
        totals[h] += k
        row.append(f"{h}={k:3d}")
    print(f"{name:28s} n={g.n:5d} m={g.m:6d}  " + " ".join(row))

print("totals:", totals)

# recoloring by previous color classes never adds colors
name, g = graphs[-1]
col = greedy_color(g, HEURISTICS["ff"](g))
chain = [col.num_colors]
for _ in range(5):
    col = culberson_recolor(g, col)
    chain.append(col.num_colors)
print(f"Culberson on {name} starting from FF:", chain)
