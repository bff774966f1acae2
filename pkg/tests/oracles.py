"""Brute-force reference implementations used across the test modules.

Everything here trades speed for obviousness: exhaustive enumeration,
textbook finite differences, and generic quadrature.  The library must
agree with these on small instances.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy import integrate, stats

from graphlim import ExposureGraph, OutcomeVector, TreatmentVector, eval_kernel, ht_estimate
from graphlim.kernels import Kernel


def cut_norm_brute(matrix: np.ndarray) -> float:
    """Max over all (row subset, column subset) pairs of |block sum| / n^2."""
    a = np.asarray(matrix, dtype=float)
    n = a.shape[0]
    masks = np.array(
        [[(p >> i) & 1 for i in range(n)] for p in range(2**n)], dtype=float
    )
    block_sums = masks @ a @ masks.T
    return float(np.abs(block_sums).max()) / n**2


def exposure_fraction_brute(graph: ExposureGraph, w: np.ndarray, i: int) -> float:
    """Treated-neighbor fraction of unit i, one edge at a time."""
    neighbors = [j for j in range(graph.n) if graph.adjacency[i, j]]
    if not neighbors:
        return 0.0
    return sum(int(w[j]) for j in neighbors) / len(neighbors)


def ht_brute(graph: ExposureGraph, outcomes: OutcomeVector, w: np.ndarray, pi: float) -> float:
    """Inverse-probability-weighted mean, unit by unit."""
    total = 0.0
    for i in range(graph.n):
        r = exposure_fraction_brute(graph, w, i)
        y = outcomes.unit(i).eval(float(w[i]), r)
        weight = 1.0 / pi if w[i] else -1.0 / (1.0 - pi)
        total += weight * y
    return total / graph.n


def ade_enum_neighbors(graph: ExposureGraph, outcomes: OutcomeVector, pi: float) -> float:
    """Average direct effect by enumerating every treated-neighbor subset."""
    total = 0.0
    for i in range(graph.n):
        neighbors = [j for j in range(graph.n) if graph.adjacency[i, j]]
        d = len(neighbors)
        clamped = max(d, 1)
        fn = outcomes.unit(i)
        contrast = 0.0
        for treated in itertools.product((0, 1), repeat=d):
            k = sum(treated)
            prob = pi**k * (1.0 - pi) ** (d - k)
            r = k / clamped
            contrast += prob * (fn.eval(1.0, r) - fn.eval(0.0, r))
        total += contrast
    return total / graph.n


def ade_enum_binomial(graph: ExposureGraph, outcomes: OutcomeVector, pi: float) -> float:
    """Average direct effect via the binomial exposure distribution."""
    total = 0.0
    for i in range(graph.n):
        d = int(graph.true_degrees[i])
        clamped = max(d, 1)
        fn = outcomes.unit(i)
        contrast = 0.0
        for k in range(d + 1):
            prob = stats.binom.pmf(k, d, pi)
            r = k / clamped
            contrast += prob * (fn.eval(1.0, r) - fn.eval(0.0, r))
        total += contrast
    return total / graph.n


def ht_expectation_exhaustive(
    graph: ExposureGraph, outcomes: OutcomeVector, pi: float
) -> float:
    """E[tau_hat] by summing over all 2^n treatment vectors."""
    n = graph.n
    total = 0.0
    for bits in itertools.product((False, True), repeat=n):
        w = np.array(bits, dtype=bool)
        k = int(w.sum())
        prob = pi**k * (1.0 - pi) ** (n - k)
        total += prob * ht_estimate(graph, outcomes, TreatmentVector(w=w, pi=pi))
    return total


def mean_over_treatments(fn, n: int, pi: float) -> float:
    """E[fn(w)] over all 2^n treatment vectors with Bernoulli(pi) weights."""
    total = 0.0
    for bits in itertools.product((False, True), repeat=n):
        w = np.array(bits, dtype=bool)
        k = int(w.sum())
        total += pi**k * (1.0 - pi) ** (n - k) * fn(w)
    return total


_STENCILS = {
    1: ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)),
    2: ((-2, -1.0), (-1, 16.0), (0, -30.0), (1, 16.0), (2, -1.0)),
    3: ((-2, -1.0), (-1, 2.0), (1, -2.0), (2, 1.0)),
}
_STENCIL_SCALE = {1: 12.0, 2: 12.0, 3: 2.0}


def fd_partial_x(evaluate, x: float, order: int, h: float = 0.05) -> float:
    """Five-point central finite difference in x, exact for quartics."""
    acc = math.fsum(c * evaluate(x + k * h) for k, c in _STENCILS[order])
    return acc / (_STENCIL_SCALE[order] * h**order)


def block_average_brute(kernel: Kernel, n: int, subsamples: int = 64) -> np.ndarray:
    """Per-block midpoint averages computed cell by cell."""
    out = np.empty((n, n))
    offsets = (np.arange(subsamples) + 0.5) / (subsamples * n)
    for i in range(n):
        for j in range(n):
            xs = i / n + offsets
            ys = j / n + offsets
            out[i, j] = np.mean(
                [eval_kernel(kernel, x, y) for x in xs for y in ys]
            )
    return out


def random_instance(rng, n: int, p_edge: float = 0.4):
    """A random (graph, outcomes) pair with polynomial outcome functions."""
    from graphlim import OutcomeFunction

    adj = rng.random((n, n)) < p_edge
    adj = np.triu(adj, k=1)
    graph = ExposureGraph(adj | adj.T)
    functions = []
    for _ in range(n):
        terms = [
            (float(rng.normal(scale=2.0)), int(rng.integers(0, 2)), int(rng.integers(0, 5)))
            for _ in range(int(rng.integers(1, 6)))
        ]
        functions.append(OutcomeFunction.from_terms(terms))
    return graph, OutcomeVector.from_functions(functions)


def q_term_quad(kernel: Kernel, profile, pi: float, u: float, breaks=()) -> float:
    """Adaptive quadrature of the neighborhood-term integrand."""

    def integrand(t: float) -> float:
        k = eval_kernel(kernel, u, t)
        if k == 0.0:
            return 0.0
        marginal = float(kernel.marginal_array(np.array([t]))[0])
        gap = profile.eval_batch(t, 1.0, pi, 1) - profile.eval_batch(t, 0.0, pi, 1)
        return k * float(gap) / marginal

    value, _ = integrate.quad(integrand, 0.0, 1.0, points=list(breaks), limit=200)
    return value
