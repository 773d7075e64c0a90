"""Recursive balanced-cut decomposition of a chain of cliques.

Run with ``python demos/decomposition.py``.
"""

import numpy as np

from balcut.driver import RunConfig, crossing_weight, decompose
from balcut.graph import Graph
from balcut.reference import complete_graph


def chain_of_cliques(k, count):
    base = complete_graph(k)
    tails = [base.tails + i * k for i in range(count)]
    heads = [base.heads + i * k for i in range(count)]
    # one edge between consecutive cliques
    tails.append(np.arange(count - 1) * k + k - 1)
    heads.append(np.arange(1, count) * k)
    return Graph(k * count, np.concatenate(tails), np.concatenate(heads))


def main():
    g = chain_of_cliques(6, 4)
    leaves = decompose(g, 0.2, RunConfig(b=0.4, gamma=0.2), min_size=7)
    for leaf in leaves:
        print(f"depth {leaf.depth}: vertices {leaf.vertices.tolist()}")
    print(f"crossing weight {crossing_weight(g, leaves):.0f} of {g.total_weight:.0f}")


if __name__ == "__main__":
    main()
