"""Finite interference graphs: construction, sampling, relabeling, summaries."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .kernels import Kernel, StepKernel

__all__ = [
    "ExposureGraph",
    "Permutation",
    "GraphConditionReport",
    "half_graph",
    "sparsify",
    "sample_graphon_graph",
    "permute_graph",
    "graph_to_step_kernel",
    "check_graph_conditions",
    "write_edge_list",
    "read_edge_list",
]


class ExposureGraph:
    """Undirected simple graph stored as a dense symmetric adjacency matrix."""

    def __init__(self, adjacency) -> None:
        adj = np.asarray(adjacency, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency must be a square matrix")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diagonal(adj)):
            raise ValueError("adjacency must have an empty diagonal (no self-loops)")
        adj = adj.copy()
        adj.setflags(write=False)
        self.adjacency = adj
        self._true_degrees: np.ndarray | None = None
        self._adj_f32: np.ndarray | None = None

    @classmethod
    def from_edges(cls, n: int, edges, one_based: bool = False) -> "ExposureGraph":
        n = int(n)
        if n < 1:
            raise ValueError("n must be a positive integer")
        adj = np.zeros((n, n), dtype=bool)
        off = 1 if one_based else 0
        for i, j in edges:
            a, b = int(i) - off, int(j) - off
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
            if a == b:
                raise ValueError(f"edge ({i}, {j}) is a self-loop")
            adj[a, b] = True
            adj[b, a] = True
        return cls(adj)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def true_degrees(self) -> np.ndarray:
        if self._true_degrees is None:
            self._true_degrees = self.adjacency.sum(axis=1).astype(np.int64)
        return self._true_degrees

    @property
    def clamped_degrees(self) -> np.ndarray:
        """Degrees with isolated vertices clamped up to 1."""
        return np.maximum(self.true_degrees, 1)

    @property
    def edge_count(self) -> int:
        return int(self.true_degrees.sum()) // 2

    @property
    def adjacency_f32(self) -> np.ndarray:
        """Float32 view of the adjacency used for exact treated-neighbor counts."""
        if self._adj_f32 is None:
            a = self.adjacency.astype(np.float32)
            a.setflags(write=False)
            self._adj_f32 = a
        return self._adj_f32

    def edges(self) -> list[tuple[int, int]]:
        """Edges as 0-based (i, j) pairs with i < j, in lexicographic order."""
        iu = np.triu_indices(self.n, k=1)
        mask = self.adjacency[iu]
        return list(zip(iu[0][mask].tolist(), iu[1][mask].tolist()))

    def __getstate__(self):
        return {"adjacency": np.asarray(self.adjacency)}

    def __setstate__(self, state):
        self.__init__(state["adjacency"])

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"ExposureGraph(n={self.n}, edges={self.edge_count})"


@dataclass(frozen=True)
class Permutation:
    """A relabeling of [0, n): position i of the new order holds old index mapping[i]."""

    mapping: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.mapping, dtype=np.int64)
        if m.ndim != 1:
            raise ValueError("permutation mapping must be one-dimensional")
        n = m.shape[0]
        if not np.array_equal(np.sort(m), np.arange(n)):
            raise ValueError("permutation mapping must be a bijection of 0..n-1")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "mapping", m)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(int(n), dtype=np.int64))

    @property
    def size(self) -> int:
        return self.mapping.shape[0]

    def apply(self, values) -> np.ndarray:
        """Reindex a per-vertex array: result[i] = values[mapping[i]]."""
        arr = np.asarray(values)
        if arr.shape[0] != self.size:
            raise ValueError("array length does not match permutation size")
        return arr[self.mapping]


@dataclass(frozen=True)
class GraphConditionReport:
    """Degree and co-neighbor summaries of a realized graph.

    ``sum_d``, ``sum_d2`` and ``sum_d4`` are moments of the clamped degrees,
    ``delta_n`` is the minimum true degree, ``gamma_sum`` counts common
    neighbors over all ordered vertex pairs (including i = j), and
    ``remainder_bound`` is ``c_bound * (1/sqrt(n*delta) + sqrt(gamma_sum) /
    (n * delta**1.5))``, infinite when the graph has an isolated vertex.
    """

    n: int
    rho: float
    min_clamped_degree: int
    ratio_3a: float
    ratio_3b: float
    sum_d: int
    sum_d2: int
    sum_d4: int
    gamma_sum: int
    delta_n: int
    remainder_bound: float
    c_bound: float


def half_graph(n: int) -> ExposureGraph:
    """The graph on [n] joining distinct i, j (1-based) exactly when i + j > n."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be a positive integer")
    idx = np.arange(1, n + 1)
    adj = (idx[:, None] + idx[None, :]) > n
    np.fill_diagonal(adj, False)
    return ExposureGraph(adj)


def sparsify(graph: ExposureGraph, rho: float, rng: np.random.Generator) -> ExposureGraph:
    """Keep each edge independently with probability rho.

    Edges are visited in lexicographic (i < j) order with one uniform draw
    each, so the result is reproducible for a given generator state.
    """
    rho = float(rho)
    if not 0.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [0, 1]")
    n = graph.n
    iu = np.triu_indices(n, k=1)
    present = graph.adjacency[iu]
    draws = rng.random(int(present.sum()))
    kept = np.zeros(present.shape, dtype=bool)
    kept[present] = draws < rho
    adj = np.zeros((n, n), dtype=bool)
    adj[iu] = kept
    adj |= adj.T
    return ExposureGraph(adj)


def sample_graphon_graph(
    kernel: Kernel, latents, rho: float, rng: np.random.Generator
) -> ExposureGraph:
    """Sample a graph with edge probabilities min(1, rho * L(U_i, U_j)).

    ``latents`` are the per-vertex U values, shared with whatever outcome
    sampling accompanies the graph.  Unordered pairs (i < j) are visited in
    lexicographic order with one uniform draw each.
    """
    u = np.asarray(latents, dtype=float)
    if u.ndim != 1 or u.shape[0] < 1:
        raise ValueError("latents must be a non-empty one-dimensional array")
    if np.any(u < 0.0) or np.any(u > 1.0):
        raise ValueError("latents must lie in [0, 1]")
    rho = float(rho)
    if not 0.0 < rho <= 1.0:
        raise ValueError("rho must lie in (0, 1]")
    n = u.shape[0]
    iu = np.triu_indices(n, k=1)
    probs = np.minimum(1.0, rho * np.asarray(kernel.eval_array(u[iu[0]], u[iu[1]]), dtype=float))
    draws = rng.random(probs.shape[0])
    adj = np.zeros((n, n), dtype=bool)
    adj[iu] = draws < probs
    adj |= adj.T
    return ExposureGraph(adj)


def permute_graph(graph: ExposureGraph, perm: Permutation) -> ExposureGraph:
    """Relabel the graph: new adjacency (i, j) = old adjacency (mapping[i], mapping[j])."""
    if perm.size != graph.n:
        raise ValueError("permutation size does not match graph order")
    p = perm.mapping
    return ExposureGraph(graph.adjacency[np.ix_(p, p)])


def graph_to_step_kernel(graph: ExposureGraph, rho: float) -> StepKernel:
    """Embed the graph as a step kernel with entries edge_indicator / rho."""
    rho = float(rho)
    if not 0.0 < rho <= 1.0:
        raise ValueError("rho must lie in (0, 1]")
    return StepKernel(graph.adjacency.astype(float) / rho)


def check_graph_conditions(
    graph: ExposureGraph, rho: float, c_bound: float = 1.0
) -> GraphConditionReport:
    """Degree-moment and co-neighbor summaries used by the coupling bounds.

    ``gamma_sum`` is computed by triple counting over adjacency rows: for
    every ordered pair (i, j), including i = j, it adds the number of
    vertices outside {i, j} adjacent to both.
    """
    rho = float(rho)
    if not 0.0 < rho <= 1.0:
        raise ValueError("rho must lie in (0, 1]")
    n = graph.n
    deg = graph.true_degrees
    d = graph.clamped_degrees.astype(np.int64)
    adj = graph.adjacency.astype(float)
    # entries of adj @ adj are exact small integers, so the total is exact
    gamma_sum = int(round(float((adj @ adj).sum())))
    sum_d = int(d.sum())
    sum_d2 = int((d * d).sum())
    sum_d4 = int((d**4).sum())
    delta = int(deg.min())
    if delta == 0:
        remainder = math.inf
    else:
        remainder = float(c_bound) * (
            1.0 / math.sqrt(n * delta) + math.sqrt(gamma_sum) / (n * delta**1.5)
        )
    return GraphConditionReport(
        n=n,
        rho=rho,
        min_clamped_degree=int(d.min()),
        ratio_3a=sum_d4 / (float(n) ** 5 * rho**4),
        ratio_3b=float(d.min()) / (n * rho),
        sum_d=sum_d,
        sum_d2=sum_d2,
        sum_d4=sum_d4,
        gamma_sum=gamma_sum,
        delta_n=delta,
        remainder_bound=remainder,
        c_bound=float(c_bound),
    )


def write_edge_list(graph: ExposureGraph, path) -> None:
    """Write the graph as text, one '<i> <j>' pair per line, 1-based, i < j."""
    lines = [f"{i + 1} {j + 1}" for i, j in graph.edges()]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def read_edge_list(path, n: int | None = None) -> ExposureGraph:
    """Read a 1-based 'i j' edge list; n defaults to the largest vertex seen."""
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'i j', got {raw!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: expected integers, got {raw!r}") from exc
        if not 1 <= i < j:
            raise ValueError(f"line {lineno}: require 1 <= i < j, got {raw!r}")
        edges.append((i, j))
    if n is None:
        n = max((j for _, j in edges), default=1)
    return ExposureGraph.from_edges(n, edges, one_based=True)
