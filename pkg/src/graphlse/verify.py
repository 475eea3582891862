"""Fast invariant checks runnable from the command line (--verify).

Each check exercises one structural invariant of a module touched by the
requested experiment kind and runs in well under a second; they are smoke
tests, not the full pytest suite.
"""
from __future__ import annotations

import numpy as np

from .carleman import alpha_vectors, membership_residual, sample_zcomp
from .evolution import EvolutionConfig, evolve_graph
from .exppoly import chain_lower_entries, chain_product, determinant_product, invert_E, layer_params
from .graphs import GraphState, build_regular_tree, build_star, weighted_l2_norm
from .kernels import free_kernel, kernel_h
from .reduction import reduction_map
from .uncertainty import appell_transform, fit_gaussian_decay


def check_unitarity() -> bool:
    graph, grid = build_star(3, 20.0, 0.1)
    st = GraphState.sample(graph, grid, lambda x: np.exp(-(x**2)))
    out = evolve_graph(st, 0.1, EvolutionConfig(dt=1e-3))
    return abs(weighted_l2_norm(out) - weighted_l2_norm(st)) < 1e-10 * weighted_l2_norm(st)


def check_chain_identities() -> bool:
    rng = np.random.default_rng(7)
    for _ in range(20):
        n = int(rng.integers(2, 6))
        p = layer_params(rng.uniform(0.3, 3.0, size=n), 0.7)
        xi = float(rng.uniform(-5, 5))
        for k in range(1, n):
            for j in range(k, n):
                M = chain_product(j, k, xi, p)
                b, abar = chain_lower_entries(j, k, xi, p)
                if abs(M[1, 0] - b) > 1e-11 or abs(M[1, 1] - abar) > 1e-11:
                    return False
                det = abs(M[0, 0]) ** 2 - abs(M[1, 0]) ** 2
                if abs(det - determinant_product(j, k, p)) > 1e-11:
                    return False
    return True


def check_wiener() -> bool:
    p = layer_params((1.0, 2.0, 1.0), 1.0)
    s = invert_E(p, 20)
    grid = np.linspace(-8, 8, 512)
    return s.residual_on(grid) <= max(s.tail_bound, 1e-10)


def check_kernel_free_limit() -> bool:
    p = layer_params((1.0, 2.0), 1.0)
    s = invert_E(p, 4)
    x = np.linspace(-3, 3, 11)
    return float(np.max(np.abs(kernel_h(0.7, x, s) - free_kernel(0.7, x)))) < 1e-14


def check_reduction_sigma() -> bool:
    graph, _ = build_regular_tree([1.0], [2, 2], 8.0, 0.125)
    rmap = reduction_map(graph)
    return rmap.sigma == (1.0, 0.25, 0.25, 1.0)


def check_decay_fit() -> bool:
    x = np.linspace(0, 10, 400)
    fit = fit_gaussian_decay(x, 3.0 * np.exp(-2.0 * x**2), side="+inf", window=(1.0, 3.0))
    return abs(fit.rate - 2.0) < 1e-8


def check_appell_roundtrip() -> bool:
    fam = lambda s, y: np.exp(-(0.4 + 0.2j * s) * np.asarray(y) ** 2)
    x = np.linspace(0, 8, 200)
    back = appell_transform(appell_transform(fam, 0.3, 0.9), 0.3, 0.9, direction="inverse")
    return float(np.max(np.abs(back(0.4, x) - fam(0.4, x)))) < 1e-12


def check_alpha_vectors() -> bool:
    for n in range(2, 9):
        alpha_vectors(n)  # raises on violation
    cont, flux = membership_residual(sample_zcomp(4, 1))
    return cont < 1e-12 and flux < 1e-12


_CHECKS = {
    "simulate": [check_unitarity],
    "kernel-compare": [check_chain_identities, check_wiener, check_kernel_free_limit],
    "sharpness": [check_unitarity, check_decay_fit],
    "reduce-tree": [check_unitarity, check_reduction_sigma],
    "carleman": [check_alpha_vectors],
    "appell": [check_appell_roundtrip],
    "threshold-sweep": [check_decay_fit],
}


def run_checks(kind: str) -> bool:
    ok = True
    for fn in _CHECKS.get(kind, []):
        passed = False
        try:
            passed = bool(fn())
        except Exception as exc:  # a check crashing is a failure, not an error
            print(f"FAIL {fn.__name__}: {exc}")
            ok = False
            continue
        print(("PASS" if passed else "FAIL") + f" {fn.__name__}")
        ok = ok and passed
    return ok
