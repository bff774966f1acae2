"""Design-based estimation under neighborhood interference.

Treatments are independent Bernoulli(pi); unit i responds through its own
assignment and the fraction of treated neighbors.  This module provides the
inverse-probability (Horvitz-Thompson) contrast of realized outcomes, the
exact average direct effect of the realized experiment, and the linear
main term whose residual the asymptotic theory controls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import ExposureGraph
from .outcomes import OutcomeVector

__all__ = [
    "TreatmentVector",
    "EstimateRecord",
    "sample_treatments",
    "exposure_fractions",
    "ht_estimate",
    "ade_exact",
    "influence_vector",
    "linearized_main_term",
    "estimate_record",
]


@dataclass(frozen=True)
class TreatmentVector:
    """A realized Bernoulli(pi) assignment for n units."""

    w: np.ndarray
    pi: float

    def __post_init__(self) -> None:
        w = np.asarray(self.w, dtype=bool)
        if w.ndim != 1 or w.shape[0] < 1:
            raise ValueError("treatment vector must be a non-empty 1-d array")
        pi = float(self.pi)
        if not 0.0 < pi < 1.0:
            raise ValueError(f"pi must lie strictly inside (0, 1), got {self.pi!r}")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "pi", pi)

    @property
    def n(self) -> int:
        return self.w.shape[0]


@dataclass(frozen=True)
class EstimateRecord:
    """One replication's estimator decomposition.

    ``stat = sqrt(n) * (tau_hat - tau_bar)`` and
    ``remainder = tau_hat - tau_bar - main_term`` hold by construction.
    """

    tau_hat: float
    tau_bar: float
    stat: float
    main_term: float
    remainder: float


def sample_treatments(n: int, pi: float, rng: np.random.Generator) -> TreatmentVector:
    """Draw n independent Bernoulli(pi) assignments in index order."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be a positive integer")
    pi = float(pi)
    if not 0.0 < pi < 1.0:
        raise ValueError(f"pi must lie strictly inside (0, 1), got {pi!r}")
    return TreatmentVector(w=rng.random(n) < pi, pi=pi)


def exposure_fractions(graph: ExposureGraph, w: TreatmentVector) -> np.ndarray:
    """Fraction of treated neighbors, with isolated units assigned 0.

    Computed as (treated neighbor count) / max(degree, 1); the counts are
    exact integers so the result is reproducible regardless of how the
    underlying matrix product is scheduled.
    """
    if w.n != graph.n:
        raise ValueError("treatment vector length does not match graph order")
    counts = graph.adjacency_f32 @ w.w.astype(np.float32)
    return counts.astype(np.float64) / graph.clamped_degrees


def ht_estimate(graph: ExposureGraph, outcomes: OutcomeVector, w: TreatmentVector) -> float:
    """Inverse-probability contrast of realized outcomes.

    (1/n) sum_i (W_i / pi - (1 - W_i) / (1 - pi)) * f_i(W_i, R_i) with R_i
    the treated-neighbor fraction.  The sum is accumulated exactly, so the
    estimate is invariant under relabeling the experiment.
    """
    if len(outcomes) != graph.n:
        raise ValueError("outcome vector length does not match graph order")
    r = exposure_fractions(graph, w)
    wf = w.w.astype(np.float64)
    y = outcomes.eval_units(wf, r)
    weights = wf / w.pi - (1.0 - wf) / (1.0 - w.pi)
    return math.fsum((weights * y).tolist()) / graph.n

# Exact binomial moments E[B^p] for B ~ Binomial(m, pi), p <= 4, written with
# Stirling numbers of the second kind and falling factorials of m.
_STIRLING2 = {
    1: (1.0,),
    2: (1.0, 1.0),
    3: (1.0, 3.0, 1.0),
    4: (1.0, 7.0, 6.0, 1.0),
}


def _exposure_moments(graph: ExposureGraph, pi: float) -> list[np.ndarray]:
    """E[R_i^p] for p = 0..4, exact for each unit's binomial neighbor count."""
    m = graph.true_degrees.astype(np.float64)
    d = graph.clamped_degrees.astype(np.float64)
    falling = [np.ones_like(m)]
    for r in range(4):
        falling.append(falling[-1] * (m - r))
    moments = [np.ones_like(m)]
    for p in range(1, 5):
        raw = np.zeros_like(m)
        for r, s2 in enumerate(_STIRLING2[p], start=1):
            raw += s2 * falling[r] * pi**r
        moments.append(raw / d**p)
    return moments


def ade_exact(graph: ExposureGraph, outcomes: OutcomeVector, pi: float) -> float:
    """Average direct effect of the realized experiment, computed exactly.

    Per unit this is E[f_i(1, R_i) - f_i(0, R_i)] where the number of
    treated neighbors is Binomial(degree, pi).  Because f_i is polynomial
    in the exposure fraction, the expectation reduces to exact binomial
    moments; no Monte Carlo is involved.
    """
    if len(outcomes) != graph.n:
        raise ValueError("outcome vector length does not match graph order")
    pi = float(pi)
    if not 0.0 < pi < 1.0:
        raise ValueError(f"pi must lie strictly inside (0, 1), got {pi!r}")
    moments = _exposure_moments(graph, pi)
    contrast = outcomes.coeffs[:, 1, :]  # f(1, x) - f(0, x) coefficient row
    per_unit = np.zeros(graph.n, dtype=np.float64)
    for p in range(contrast.shape[1]):
        per_unit = per_unit + contrast[:, p] * moments[p]
    return math.fsum(per_unit.tolist()) / graph.n


def influence_vector(graph: ExposureGraph, outcomes: OutcomeVector, pi: float) -> np.ndarray:
    """Per-unit coefficient of (W_i - pi) in the linear main term.

    g_i = f_i(1, pi)/pi + f_i(0, pi)/(1 - pi)
          + sum_j (A_ij / d_j) (f_j'(1, pi) - f_j'(0, pi)),

    with derivatives in the exposure argument and d_j the clamped degree.
    """
    if len(outcomes) != graph.n:
        raise ValueError("outcome vector length does not match graph order")
    pi = float(pi)
    if not 0.0 < pi < 1.0:
        raise ValueError(f"pi must lie strictly inside (0, 1), got {pi!r}")
    own = outcomes.eval_units(1.0, pi) / pi + outcomes.eval_units(0.0, pi) / (1.0 - pi)
    slope_gap = outcomes.eval_units(1.0, pi, 1) - outcomes.eval_units(0.0, pi, 1)
    spill = graph.adjacency.astype(np.float64) @ (slope_gap / graph.clamped_degrees)
    return own + spill


def linearized_main_term(
    graph: ExposureGraph,
    outcomes: OutcomeVector,
    w: TreatmentVector,
    influence: np.ndarray | None = None,
) -> float:
    """The linear-in-(W - pi) main term of the estimation error.

    ``influence`` lets callers reuse a precomputed influence vector; it is
    treatment-independent, so replication loops only need it once.
    """
    if influence is None:
        influence = influence_vector(graph, outcomes, w.pi)
    centered = w.w.astype(np.float64) - w.pi
    return math.fsum((influence * centered).tolist()) / graph.n


def estimate_record(
    graph: ExposureGraph,
    outcomes: OutcomeVector,
    w: TreatmentVector,
    tau_bar: float | None = None,
    influence: np.ndarray | None = None,
) -> EstimateRecord:
    """Estimator, target, scaled statistic, main term and exact remainder.

    ``tau_bar`` and ``influence`` accept precomputed values (both depend
    only on the experiment, not on the treatment draw); when omitted they
    are recomputed, yielding bit-identical numbers.
    """
    tau_hat = ht_estimate(graph, outcomes, w)
    if tau_bar is None:
        tau_bar = ade_exact(graph, outcomes, w.pi)
    main = linearized_main_term(graph, outcomes, w, influence=influence)
    return EstimateRecord(
        tau_hat=tau_hat,
        tau_bar=tau_bar,
        stat=math.sqrt(graph.n) * (tau_hat - tau_bar),
        main_term=main,
        remainder=tau_hat - tau_bar - main,
    )
