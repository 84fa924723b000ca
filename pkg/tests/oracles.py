"""Independent reference implementations used to pin expected values.

These stay deliberately naive and separate from the library's code
paths: a double-loop MQ, a fine-grid centroid integrator, and plain
random graph/labeling generators.
"""

from __future__ import annotations

import numpy as np

from mdgcluster.mdg import ModuleGraph


def naive_mq(graph: ModuleGraph, labels) -> float:
    """Double-loop MQ: for every cluster, scan the whole edge list."""
    total = 0.0
    for k in sorted(set(labels)):
        intra = 0.0
        inter = 0.0
        for source, target, weight in graph.edges:
            source_in = labels[source] == k
            target_in = labels[target] == k
            if source_in and target_in:
                intra += weight
            elif source_in or target_in:
                inter += weight
        if intra > 0:
            total += intra / (intra + inter / 2.0)
    return total


def fine_grid_cog(clipped_shapes, step: float = 0.001) -> float | None:
    """Centroid of max-aggregated clipped trapezoids on a fine midpoint grid.

    ``clipped_shapes`` is a list of ((a, b, c, d), activation) pairs.
    """
    n = int(round(100.0 / step))
    ys = (np.arange(n) + 0.5) * step
    aggregate = np.zeros_like(ys)
    for (a, b, c, d), activation in clipped_shapes:
        membership = np.zeros_like(ys)
        inside = (ys >= a) & (ys <= d)
        membership[inside & (ys >= b) & (ys <= c)] = 1.0
        if b > a:
            rising = inside & (ys < b)
            membership[rising] = (ys[rising] - a) / (b - a)
        if d > c:
            falling = inside & (ys > c)
            membership[falling] = (d - ys[falling]) / (d - c)
        aggregate = np.maximum(aggregate, np.minimum(activation, membership))
    area = aggregate.sum()
    if area == 0.0:
        return None
    return float((ys * aggregate).sum() / area)


def random_graph(rng: np.random.Generator, module_count: int, edge_prob: float = 0.5) -> ModuleGraph:
    """Random MDG with two-way integer-weight relationships, at least one edge."""
    names = tuple(f"m{i}" for i in range(module_count))
    edges = []
    for i in range(module_count):
        for j in range(i + 1, module_count):
            if rng.random() < edge_prob:
                weight = float(rng.integers(1, 4))
                edges.append((i, j, weight))
                edges.append((j, i, weight))
    if not edges:
        edges = [(0, 1, 1.0), (1, 0, 1.0)]
    return ModuleGraph(modules=names, edges=tuple(edges))


def random_labels(rng: np.random.Generator, module_count: int) -> list[int]:
    return [int(v) for v in rng.integers(1, module_count + 1, size=module_count)]
