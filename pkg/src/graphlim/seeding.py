"""Deterministic substream derivation for replicated experiments.

Every random draw in a run comes from a generator derived as a strong hash
of (master_seed, purpose, replication), so results are byte-identical no
matter how replications are batched or distributed across workers.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "PURPOSE_SPARSIFY",
    "PURPOSE_LATENTS",
    "PURPOSE_GRAPH",
    "PURPOSE_TREATMENT",
    "PURPOSE_VARIANCE",
    "PURPOSE_CUTNORM",
    "substream",
]

PURPOSE_SPARSIFY = 1
PURPOSE_LATENTS = 2
PURPOSE_GRAPH = 3
PURPOSE_TREATMENT = 4
PURPOSE_VARIANCE = 5
PURPOSE_CUTNORM = 6


def substream(master_seed: int, purpose: int, replication: int = 0) -> np.random.Generator:
    """Generator for one (purpose, replication) slot under a master seed."""
    master = int(master_seed)
    if master < 0:
        raise ValueError("master_seed must be a nonnegative integer")
    rep = int(replication)
    if rep < 0:
        raise ValueError("replication must be a nonnegative integer")
    return np.random.default_rng(np.random.SeedSequence([master, int(purpose), rep]))
