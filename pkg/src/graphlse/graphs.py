"""Metric graphs, grids, sampled states, norms and Kirchhoff diagnostics.

A metric graph is a set of vertices joined by edges that are real intervals;
every edge carries its own coordinate starting at 0 at the initial vertex.
Infinite edges (rays) are truncated at a finite length ``L`` for numerical
work, with a homogeneous Dirichlet condition at the truncation point.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Edge",
    "MetricGraph",
    "GraphGrid",
    "GraphState",
    "KirchhoffResidual",
    "NormOverflowError",
    "build_star",
    "build_regular_tree",
    "kirchhoff_residual",
    "weighted_l2_norm",
    "edge_derivative_at_start",
    "edge_derivative_at_end",
    "parse_graph_spec",
    "serialize_graph_spec",
]


class NormOverflowError(ArithmeticError):
    """Weighted norm would overflow, or is dominated by the truncation boundary."""


@dataclass(frozen=True)
class Edge:
    """One edge: interval [0, length] from ``initial`` towards ``terminal``.

    ``terminal`` is None exactly when the edge is an infinite ray.  Trees
    additionally record the generation (1-based) and the multi-index of the
    edge within its tree.
    """

    initial: int
    terminal: int | None
    length: float
    generation: int = 0
    index: tuple[int, ...] = ()

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError(f"edge length must be positive, got {self.length}")
        if math.isinf(self.length) != (self.terminal is None):
            raise ValueError("infinite edges must have no terminal vertex, finite edges must have one")

    @property
    def infinite(self) -> bool:
        return self.terminal is None


@dataclass(frozen=True)
class MetricGraph:
    vertices: tuple[int, ...]
    edges: tuple[Edge, ...]
    generation_lengths: tuple[float, ...] = ()  # l_1..l_n for regular trees
    branching: tuple[int, ...] = ()  # d_1..d_{n+1} for regular trees

    def __post_init__(self):
        vset = set(self.vertices)
        if len(vset) != len(self.vertices):
            raise ValueError("duplicate vertex ids")
        if not self.edges:
            raise ValueError("graph needs at least one edge")
        for e in self.edges:
            if e.initial not in vset:
                raise ValueError(f"edge initial vertex {e.initial} not in vertex set")
            if e.terminal is not None and e.terminal not in vset:
                raise ValueError(f"edge terminal vertex {e.terminal} not in vertex set")
        # connectivity over the finite skeleton
        adj = {v: set() for v in self.vertices}
        for e in self.edges:
            if e.terminal is not None:
                adj[e.initial].add(e.terminal)
                adj[e.terminal].add(e.initial)
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if seen != vset:
            raise ValueError("graph is not connected")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def incident(self, v: int) -> list[tuple[int, str]]:
        """Edges touching vertex ``v`` as (edge_id, 'initial'|'terminal') pairs."""
        out = []
        for i, e in enumerate(self.edges):
            if e.initial == v:
                out.append((i, "initial"))
            if e.terminal == v:
                out.append((i, "terminal"))
        return out

    @property
    def is_star(self) -> bool:
        return len(self.vertices) == 1 and all(e.infinite for e in self.edges)


@dataclass(frozen=True)
class GraphGrid:
    """Per-edge uniform sampling; infinite edges truncated at ``lengths[e]``."""

    spacings: tuple[float, ...]
    lengths: tuple[float, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        for h, L, n in zip(self.spacings, self.lengths, self.counts):
            if h <= 0 or L <= 0 or n < 2:
                raise ValueError("grid needs h > 0, L > 0 and at least two samples per edge")
            if abs((n - 1) * h - L) > 1e-9 * max(1.0, L):
                raise ValueError("sample count inconsistent with spacing and length")

    def x(self, edge_id: int) -> np.ndarray:
        return np.linspace(0.0, self.lengths[edge_id], self.counts[edge_id])


def _uniform_count(L: float, h: float) -> int:
    n = round(L / h)
    if n < 1 or abs(n * h - L) > 1e-8 * max(1.0, L):
        raise ValueError(f"length {L} is not an integer multiple of spacing {h}")
    return int(n) + 1


def build_star(n_edges: int, L: float, h: float) -> tuple[MetricGraph, GraphGrid]:
    """Star graph: ``n_edges`` infinite rays joined at vertex 0, truncated at L.

    L should exceed ten times the width of the data under study so the
    Dirichlet truncation error stays at the exp(-c L^2) level.
    """
    if n_edges < 2:
        raise ValueError("a star needs at least 2 edges")
    if L <= 0 or h <= 0:
        raise ValueError("L and h must be positive")
    if L / h < 16:
        raise ValueError("grid too coarse: require L/h >= 16")
    edges = tuple(Edge(0, None, math.inf, generation=1, index=(k,)) for k in range(1, n_edges + 1))
    graph = MetricGraph(vertices=(0,), edges=edges, generation_lengths=(), branching=(n_edges,))
    n = _uniform_count(L, h)
    grid = GraphGrid(spacings=(h,) * n_edges, lengths=(L,) * n_edges, counts=(n,) * n_edges)
    return graph, grid


def build_regular_tree(
    lengths: Sequence[float],
    degrees: Sequence[int],
    L: float,
    h: float,
) -> tuple[MetricGraph, GraphGrid]:
    """Regular tree: generation k has edges of length ``lengths[k-1]`` and every
    generation-k vertex has ``degrees[k]`` children; the last generation is
    infinite rays truncated at L.

    ``degrees`` has one more entry than ``lengths``; ``degrees[0]`` is the root
    degree.  Edge multi-indices follow the nesting of the tree, so the edges of
    generation k number ``degrees[0]*...*degrees[k-1]``.
    """
    if not degrees:
        raise ValueError("need at least one branching degree")
    if len(degrees) != len(lengths) + 1:
        raise ValueError("need exactly one more degree than generation lengths")
    if any(d < 1 for d in degrees):
        raise ValueError("branching degrees must be >= 1")
    if any(l <= 0 for l in lengths):
        raise ValueError("generation lengths must be positive")
    if L <= 0 or h <= 0:
        raise ValueError("L and h must be positive")
    for l in lengths:
        _uniform_count(l, h)  # breakpoints must land on the grid
    n_gen = len(degrees)

    vertex_of: dict[tuple[int, ...], int] = {(): 0}
    edges: list[Edge] = []
    frontier: list[tuple[int, ...]] = [()]
    next_vertex = 1
    for gen in range(1, n_gen + 1):
        new_frontier = []
        for parent in frontier:
            for child in range(1, degrees[gen - 1] + 1):
                idx = parent + (child,)
                if gen < n_gen:
                    vertex_of[idx] = next_vertex
                    next_vertex += 1
                    edges.append(Edge(vertex_of[parent], vertex_of[idx], lengths[gen - 1], gen, idx))
                else:
                    edges.append(Edge(vertex_of[parent], None, math.inf, gen, idx))
                new_frontier.append(idx)
        frontier = new_frontier

    graph = MetricGraph(
        vertices=tuple(range(next_vertex)),
        edges=tuple(edges),
        generation_lengths=tuple(float(l) for l in lengths),
        branching=tuple(int(d) for d in degrees),
    )
    spacings, lens, counts = [], [], []
    for e in graph.edges:
        Le = L if e.infinite else e.length
        spacings.append(h)
        lens.append(Le)
        counts.append(_uniform_count(Le, h))
    grid = GraphGrid(tuple(spacings), tuple(lens), tuple(counts))
    return graph, grid


@dataclass(frozen=True)
class GraphState:
    """Complex samples of a function on the graph at one time, one array per edge."""

    graph: MetricGraph
    grid: GraphGrid
    values: tuple[np.ndarray, ...]
    time: float = 0.0

    def __post_init__(self):
        if len(self.values) != self.graph.n_edges:
            raise ValueError("one value array per edge required")
        vals = tuple(np.asarray(v, dtype=complex) for v in self.values)
        object.__setattr__(self, "values", vals)
        for v, n in zip(vals, self.grid.counts):
            if v.shape != (n,):
                raise ValueError("value array length does not match grid")
            if not np.all(np.isfinite(v.view(float))):
                raise ValueError("state contains non-finite values")

    @classmethod
    def sample(
        cls,
        graph: MetricGraph,
        grid: GraphGrid,
        fn: Callable[[np.ndarray], np.ndarray] | Sequence[Callable[[np.ndarray], np.ndarray]],
        time: float = 0.0,
    ) -> "GraphState":
        fns = list(fn) if isinstance(fn, (list, tuple)) else [fn] * graph.n_edges
        if len(fns) != graph.n_edges:
            raise ValueError("need one sampling function per edge")
        values = tuple(np.asarray(f(grid.x(e)), dtype=complex) for e, f in enumerate(fns))
        return cls(graph, grid, values, time)

    def vertex_values(self, v: int) -> list[complex]:
        out = []
        for eid, end in self.graph.incident(v):
            out.append(self.values[eid][0] if end == "initial" else self.values[eid][-1])
        return out


@dataclass(frozen=True)
class KirchhoffResidual:
    continuity: float
    flux: float


_D5 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0  # one-sided 4th order


def edge_derivative_at_start(values: np.ndarray, h: float) -> complex:
    if len(values) < 5:
        raise ValueError("need at least 5 samples for the one-sided stencil")
    return complex(np.dot(_D5, values[:5]) / h)


def edge_derivative_at_end(values: np.ndarray, h: float) -> complex:
    if len(values) < 5:
        raise ValueError("need at least 5 samples for the one-sided stencil")
    return complex(-np.dot(_D5, values[-1:-6:-1]) / h)


def kirchhoff_residual(state: GraphState) -> KirchhoffResidual:
    """Continuity and flux defects of the Kirchhoff vertex conditions.

    Continuity is the worst pairwise mismatch of edge samples at a vertex.
    Flux is |sum of derivatives into the vertex - sum of derivatives out of
    it|, with derivatives estimated by one-sided 4th-order stencils so that
    the residual of a second-order solver state is resolvable.
    """
    cont = 0.0
    flux = 0.0
    for v in state.graph.vertices:
        inc = state.graph.incident(v)
        if not inc:
            continue
        vals = state.vertex_values(v)
        for i in range(len(vals)):
            for j in range(i + 1, len(vals)):
                cont = max(cont, abs(vals[i] - vals[j]))
        total = 0.0 + 0.0j
        for eid, end in inc:
            if end == "terminal":
                total += edge_derivative_at_end(state.values[eid], state.grid.spacings[eid])
            else:
                total -= edge_derivative_at_start(state.values[eid], state.grid.spacings[eid])
        flux = max(flux, abs(total))
    return KirchhoffResidual(continuity=cont, flux=flux)


_EXP_LIMIT = 700.0  # exp argument ceiling for float64


def weighted_l2_norm(state: GraphState, gamma: float = 0.0) -> float:
    """sqrt of sum over edges of the trapezoid integral of exp(2*gamma*x^2)|u|^2.

    gamma = 0 is the plain L2 norm.  For gamma > 0 the call fails loudly when
    exp(2 gamma x^2) exceeds the float range or when the weighted integrand is
    not decaying at the truncation boundary (the truncated integral would then
    say nothing about the true one).
    """
    total = 0.0
    for e in range(state.graph.n_edges):
        x = state.grid.x(e)
        mag = np.abs(state.values[e])
        # assemble the integrand exp(2 gamma x^2) |u|^2 in log space so the
        # weight alone cannot overflow when the product still decays
        logw = np.full(x.shape, -np.inf)
        pos = mag > 0.0
        logw[pos] = 2.0 * gamma * x[pos] ** 2 + 2.0 * np.log(mag[pos])
        if gamma > 0.0 and float(np.max(logw, initial=-np.inf)) > _EXP_LIMIT:
            raise NormOverflowError(
                f"weighted integrand reaches exp({float(np.max(logw)):.3g}), beyond the float range"
            )
        w = np.where(pos, np.exp(logw), 0.0)
        if gamma > 0.0:
            peak = float(np.max(w))
            outer = w[x > 0.5 * x[-1]]
            if peak > 0.0 and outer.size and float(np.max(outer)) > 1e-10 * peak:
                raise NormOverflowError(
                    "weighted integrand is not decaying towards the truncation boundary"
                )
        total += float(np.trapezoid(w, x))
    return math.sqrt(total)


# ---------------------------------------------------------------------------
# graph spec (de)serialization
#
# JSON documents with these exact schemas (no extra keys):
#   {"type": "star", "N": int >= 2, "L": float, "h": float}
#   {"type": "regular_tree", "lengths": [float...], "degrees": [int...],
#    "L": float, "h": float}
#   {"type": "line_sigma", "values": [float...], "l": float, "L": float,
#    "h": float}
# ---------------------------------------------------------------------------

_SPEC_SCHEMAS: dict[str, dict[str, type | tuple]] = {
    "star": {"N": int, "L": (int, float), "h": (int, float)},
    "regular_tree": {"lengths": list, "degrees": list, "L": (int, float), "h": (int, float)},
    "line_sigma": {"values": list, "l": (int, float), "L": (int, float), "h": (int, float)},
}


def _validate_spec(spec: dict) -> dict:
    if not isinstance(spec, dict):
        raise ValueError("graph spec must be a JSON object")
    kind = spec.get("type")
    if kind not in _SPEC_SCHEMAS:
        raise ValueError(f"unknown graph spec type {kind!r}")
    schema = _SPEC_SCHEMAS[kind]
    unknown = set(spec) - set(schema) - {"type"}
    if unknown:
        raise ValueError(f"unknown keys in graph spec: {sorted(unknown)}")
    missing = set(schema) - set(spec)
    if missing:
        raise ValueError(f"missing keys in graph spec: {sorted(missing)}")
    for key, typ in schema.items():
        if not isinstance(spec[key], typ) or isinstance(spec[key], bool):
            raise ValueError(f"graph spec key {key!r} has wrong type")
    out = {"type": kind}
    for key in schema:
        val = spec[key]
        if isinstance(val, list):
            out[key] = [int(v) if key == "degrees" else float(v) for v in val]
        elif key == "N":
            out[key] = int(val)
        else:
            out[key] = float(val)
    return out


def parse_graph_spec(text: str) -> dict:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"graph spec is not valid JSON: {exc}") from exc
    return _validate_spec(raw)


def serialize_graph_spec(spec: dict) -> str:
    return json.dumps(_validate_spec(spec), sort_keys=True, separators=(", ", ": "))
