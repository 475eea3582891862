#!/usr/bin/env python3
"""Collapse a regular tree onto a line with a step coefficient.

Averaging a tree state over siblings and rectifying the even extension with
piecewise-linear maps produces a function on the line that evolves under
i w_t + (sigma w_x)_x = 0 with sigma determined by the branching degrees.
The folding commutes with time evolution; we check the diagram at t = 0.3.
"""
import numpy as np

from graphlse import (
    EvolutionConfig,
    GraphState,
    averaged_sums,
    build_regular_tree,
    evolve_graph,
    evolve_line_sigma,
    fold_to_line,
    reduction_map,
)

graph, grid = build_regular_tree([1.0], [2, 2], 30.0, 0.02)
rmap = reduction_map(graph)
print("fold intervals (slope, sigma):")
for k, (mu, sg) in enumerate(zip(rmap.slopes, rmap.sigma)):
    print(f"  k={k}:  slope {mu:5.2f}   sigma {sg:5.2f}")

rng = np.random.default_rng(8)
amps = rng.normal(size=graph.n_edges) + 1j * rng.normal(size=graph.n_edges)
fns = [
    (lambda x, a=a: a * (x * (1 - x)) ** 2 * 16.0)
    if not e.infinite
    else (lambda x, a=a: a * np.exp(-((x - 3.0) ** 2)) * x**2 / (1 + x**2))
    for e, a in zip(graph.edges, amps)
]
state = GraphState.sample(graph, grid, fns)

cfg = EvolutionConfig(dt=5e-4)
folded0 = fold_to_line(averaged_sums(state), rmap)
line = evolve_line_sigma(folded0.values, folded0.cell_sigma, folded0.nodes, 0.3, cfg)
folded1 = fold_to_line(averaged_sums(evolve_graph(state, 0.3, cfg)), rmap)
err = np.sqrt(
    np.trapezoid(np.abs(folded1.values - line) ** 2, folded0.nodes)
    / np.trapezoid(np.abs(folded1.values) ** 2, folded0.nodes)
)
print(f"\nfold(evolve(u)) vs evolve(fold(u)) at t=0.3: rel L2 = {err:.2e}")
print("(the two pipelines share no assembly: one runs on the tree, one on the line)")
