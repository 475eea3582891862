#!/usr/bin/env python3
"""Gaussian two-time decay thresholds and the families that saturate them.

A free solution decaying like exp(-alpha x^2) at t=0 and exp(-beta x^2) at
t=1 with alpha*beta > 1/16 must vanish.  The chirped Gaussian family lands
exactly on the boundary: we evolve it numerically, fit both rates and
classify the product.
"""
import numpy as np

from graphlse import (
    EvolutionConfig,
    GraphState,
    build_star,
    classify_threshold,
    evolve_graph,
    fit_gaussian_decay,
    sharp_example_star,
    sharp_example_two_step,
)
from graphlse.uncertainty import magnitude_window

for alpha in (0.125, 0.25, 0.5):
    ex = sharp_example_star(alpha, 3)
    graph, grid = build_star(3, 40.0, 0.02)
    state = GraphState.sample(graph, grid, ex.u0)
    out = evolve_graph(state, 1.0, EvolutionConfig(dt=1e-3))
    x = grid.x(0)
    a_hat = fit_gaussian_decay(x, state.values[0], "+inf", magnitude_window(x, state.values[0])).rate
    b_hat = fit_gaussian_decay(x, out.values[0], "+inf", magnitude_window(x, out.values[0])).rate
    v = classify_threshold(a_hat, b_hat, "star-free")
    print(
        f"star alpha={alpha:5.3f}: fitted ({a_hat:.4f}, {b_hat:.4f}), "
        f"product {v.product:.5f} vs threshold {v.threshold:.5f} -> {v.regime}"
    )

ex = sharp_example_two_step(1.0, 2.0)
print(
    f"\ntwo-layer family a=(1,2): alpha={ex.alpha}, beta={ex.beta}, "
    f"product {ex.alpha * ex.beta:.5f} = min(a1^2,a2^2)^2/16"
)
v = classify_threshold(ex.alpha, ex.beta, "line-sigma-i", sigma=ex.sigma)
print(f"one-sided threshold 1/(16 sigma_-^2) = {v.threshold:.5f} -> {v.regime}")
