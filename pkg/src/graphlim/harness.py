"""Replication engine for randomized-experiment simulations on exposure
graphs, with deterministic parallel RNG and file-format helpers."""

from __future__ import annotations

import csv
import enum
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .asymptotics import (
    CouplingDiagnostics,
    NormalityReport,
    closed_form_limiting_variance,
    coupling_discrepancies,
    normality_report,
)
from .estimation import (
    EstimateRecord,
    ade_exact,
    estimate_record,
    influence_vector,
    sample_treatments,
)
from .graphs import ExposureGraph, Permutation, half_graph, sample_graphon_graph, sparsify
from .kernels import HalfGraphKernel, Kernel, ScaleSequence
from .outcomes import OutcomeProfile, OutcomeVector, discretize_profile, sample_profile
from .seeding import (
    PURPOSE_GRAPH,
    PURPOSE_LATENTS,
    PURPOSE_SPARSIFY,
    PURPOSE_TREATMENT,
    substream,
)

__all__ = [
    "ExperimentDesign",
    "ExperimentConfig",
    "RunResult",
    "CouplingRunResult",
    "build_experiment",
    "run_replications",
    "run_coupling_replications",
    "write_records_csv",
    "read_records_csv",
    "write_couplings_csv",
    "summary_dict",
    "couple_summary_dict",
    "write_json",
]

RECORD_COLUMNS = ("rep", "tau_hat", "tau_bar", "stat", "main_term", "remainder")
COUPLING_COLUMNS = ("rep", "d1", "d2")


class ExperimentDesign(enum.Enum):
    """How much of the experiment is redrawn across replications.

    DETERMINISTIC fixes the graph and outcomes by a construction rule,
    FIXED_SAMPLE draws them once from the kernel/profile pair and holds
    them, SUPERPOPULATION redraws them every replication.  The first two
    compute the target effect once; the last recomputes it per draw.
    """

    DETERMINISTIC = "deterministic"
    FIXED_SAMPLE = "fixed_sample"
    SUPERPOPULATION = "superpopulation"


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of a replication run."""

    n: int
    pi: float
    scale: ScaleSequence
    kernel: Kernel
    profile: OutcomeProfile
    design: ExperimentDesign
    replications: int
    master_seed: int
    parallelism: int = 1

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not 0.0 < float(self.pi) < 1.0:
            raise ValueError(f"pi must lie strictly inside (0, 1), got {self.pi!r}")
        if not isinstance(self.replications, int) or self.replications < 1:
            raise ValueError(f"replications must be a positive integer, got {self.replications!r}")
        if not isinstance(self.master_seed, int) or not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be an integer in [0, 2**64)")
        if not isinstance(self.parallelism, int) or self.parallelism < 1:
            raise ValueError(f"parallelism must be a positive integer, got {self.parallelism!r}")
        if not isinstance(self.kernel, Kernel):
            raise ValueError("kernel must be a Kernel instance")
        if not isinstance(self.scale, ScaleSequence):
            raise ValueError("scale must be a ScaleSequence")
        if not isinstance(self.profile, OutcomeProfile):
            raise ValueError("profile must be an OutcomeProfile")
        if not isinstance(self.design, ExperimentDesign):
            raise ValueError("design must be an ExperimentDesign")
        if self.design is ExperimentDesign.DETERMINISTIC and not isinstance(
            self.kernel, HalfGraphKernel
        ):
            raise ValueError(
                "the deterministic design uses the half-graph construction rule; "
                "its kernel must be the half-graph kernel"
            )

    @property
    def rho(self) -> float:
        return self.scale.rho(self.n)


@dataclass(frozen=True)
class RunResult:
    """Records from one replication run plus a normality report on the
    scaled statistics (None when too few replications or degenerate)."""

    records: tuple[EstimateRecord, ...]
    report: NormalityReport | None
    config: ExperimentConfig
    wall_time: float


@dataclass(frozen=True)
class CouplingRunResult:
    """Per-replication coupling discrepancies plus aggregate diagnostics."""

    records: tuple[tuple[float, float], ...]
    diagnostics: CouplingDiagnostics
    config: ExperimentConfig
    wall_time: float


def build_experiment(
    config: ExperimentConfig, replication: int = 0
) -> tuple[ExposureGraph, OutcomeVector, float]:
    """Construct (graph, outcomes, target effect) for one replication.

    The deterministic design builds the half graph — sparsified exactly
    once per run when the scale sequence decays, so every replication
    shares one realized sparse graph — and places outcome functions at the
    grid positions i/n.  The sampled designs draw latent positions and
    build both the graph and outcomes from them; fixed-sample callers use
    replication 0, superpopulation callers pass the replication index.
    """
    rho = config.rho
    if config.design is ExperimentDesign.DETERMINISTIC:
        graph = half_graph(config.n)
        if rho < 1.0:
            graph = sparsify(graph, rho, substream(config.master_seed, PURPOSE_SPARSIFY))
        outcomes = discretize_profile(config.profile, config.n)
    else:
        latents = substream(config.master_seed, PURPOSE_LATENTS, replication).random(config.n)
        graph = sample_graphon_graph(
            config.kernel, latents, rho, substream(config.master_seed, PURPOSE_GRAPH, replication)
        )
        outcomes = sample_profile(config.profile, latents)
    tau_bar = ade_exact(graph, outcomes, config.pi)
    return graph, outcomes, tau_bar


def _replicate_range(
    config: ExperimentConfig,
    start: int,
    stop: int,
    prebuilt: tuple[ExposureGraph, OutcomeVector, float] | None,
) -> list[EstimateRecord]:
    records: list[EstimateRecord] = []
    if prebuilt is not None:
        graph, outcomes, tau_bar = prebuilt
        influence = influence_vector(graph, outcomes, config.pi)
    for rep in range(start, stop):
        try:
            if prebuilt is None:
                graph, outcomes, tau_bar = build_experiment(config, replication=rep)
                influence = influence_vector(graph, outcomes, config.pi)
            w = sample_treatments(
                config.n, config.pi, substream(config.master_seed, PURPOSE_TREATMENT, rep)
            )
            records.append(
                estimate_record(graph, outcomes, w, tau_bar=tau_bar, influence=influence)
            )
        except Exception as exc:
            raise RuntimeError(f"replication {rep} failed: {exc}") from exc
    return records


def _range_bounds(total: int, workers: int) -> list[tuple[int, int]]:
    bounds = [total * k // workers for k in range(workers + 1)]
    return [(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]


def run_replications(config: ExperimentConfig, bins: int = 60) -> RunResult:
    """Run all replications and report on the scaled statistics.

    Replication r derives every random draw from counter-based substreams
    of (master_seed, purpose, r), so the records are identical bytes for
    identical configs no matter how many workers execute them.  Workers
    process contiguous replication ranges; the fixed designs build the
    experiment once in the parent and share it.
    """
    t0 = time.perf_counter()
    prebuilt = None
    if config.design is not ExperimentDesign.SUPERPOPULATION:
        prebuilt = build_experiment(config)
    workers = min(config.parallelism, config.replications)
    if workers <= 1:
        records = _replicate_range(config, 0, config.replications, prebuilt)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_replicate_range, config, lo, hi, prebuilt)
                for lo, hi in _range_bounds(config.replications, workers)
            ]
            records = [rec for fut in futures for rec in fut.result()]
    stats = np.array([r.stat for r in records], dtype=float)
    try:
        report = normality_report(stats, bins=bins)
    except ValueError:
        report = None
    return RunResult(
        records=tuple(records),
        report=report,
        config=config,
        wall_time=time.perf_counter() - t0,
    )


def _build_deterministic_pair(
    config: ExperimentConfig,
) -> tuple[ExposureGraph, OutcomeVector, Permutation]:
    graph = half_graph(config.n)
    if config.rho < 1.0:
        graph = sparsify(graph, config.rho, substream(config.master_seed, PURPOSE_SPARSIFY))
    return graph, discretize_profile(config.profile, config.n), Permutation.identity(config.n)


def _build_sampled_pair(
    config: ExperimentConfig, rep: int
) -> tuple[ExposureGraph, OutcomeVector, np.ndarray]:
    latents = substream(config.master_seed, PURPOSE_LATENTS, rep).random(config.n)
    graph = sample_graphon_graph(
        config.kernel, latents, config.rho, substream(config.master_seed, PURPOSE_GRAPH, rep)
    )
    return graph, sample_profile(config.profile, latents), latents


def _couple_range(
    config: ExperimentConfig,
    start: int,
    stop: int,
    det: tuple[ExposureGraph, OutcomeVector, Permutation],
) -> list[tuple[float, float]]:
    det_graph, det_outcomes, det_perm = det
    out: list[tuple[float, float]] = []
    for rep in range(start, stop):
        try:
            graph, outcomes, latents = _build_sampled_pair(config, rep)
            w = sample_treatments(
                config.n, config.pi, substream(config.master_seed, PURPOSE_TREATMENT, rep)
            )
            diag = coupling_discrepancies(
                det_graph,
                det_outcomes,
                det_perm,
                graph,
                outcomes,
                latents,
                w,
                rho=config.rho,
                compute_gaps=False,
            )
            out.append((diag.d1, diag.d2))
        except Exception as exc:
            raise RuntimeError(f"replication {rep} failed: {exc}") from exc
    return out


def run_coupling_replications(
    config: ExperimentConfig,
    compute_gaps: bool = True,
    restarts: int = 64,
    max_exact_n: int = 20,
) -> CouplingRunResult:
    """Couple the deterministic construction with repeated sampled draws.

    Each replication jointly redraws latents, graph, outcomes, and
    treatments, then evaluates the two discrepancy terms against the fixed
    half-graph experiment.  Aggregate diagnostics carry n times the sample
    variance of each term (None with a single replication) and, when
    ``compute_gaps`` is set, the alignment gaps of replication 0.
    """
    if not isinstance(config.kernel, HalfGraphKernel):
        raise ValueError(
            "coupling runs pair the half-graph deterministic construction with "
            "samples from the same kernel; configure the half-graph kernel"
        )
    t0 = time.perf_counter()
    det = _build_deterministic_pair(config)
    workers = min(config.parallelism, config.replications)
    if workers <= 1:
        pairs = _couple_range(config, 0, config.replications, det)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_couple_range, config, lo, hi, det)
                for lo, hi in _range_bounds(config.replications, workers)
            ]
            pairs = [pair for fut in futures for pair in fut.result()]
    d1s = np.array([p[0] for p in pairs], dtype=float)
    d2s = np.array([p[1] for p in pairs], dtype=float)
    nv1 = float(config.n * d1s.var(ddof=1)) if len(pairs) > 1 else None
    nv2 = float(config.n * d2s.var(ddof=1)) if len(pairs) > 1 else None
    if compute_gaps:
        graph0, outcomes0, latents0 = _build_sampled_pair(config, 0)
        w0 = sample_treatments(
            config.n, config.pi, substream(config.master_seed, PURPOSE_TREATMENT, 0)
        )
        gaps = coupling_discrepancies(
            det[0],
            det[1],
            det[2],
            graph0,
            outcomes0,
            latents0,
            w0,
            rho=config.rho,
            compute_gaps=True,
            restarts=restarts,
            max_exact_n=max_exact_n,
        )
    else:
        gaps = CouplingDiagnostics(d1=pairs[0][0], d2=pairs[0][1])
    diagnostics = CouplingDiagnostics(
        d1=gaps.d1,
        d2=gaps.d2,
        n_times_var_d1=nv1,
        n_times_var_d2=nv2,
        l1_outcome_gap=gaps.l1_outcome_gap,
        l1_derivative_gap=gaps.l1_derivative_gap,
        cut_gap=gaps.cut_gap,
    )
    return CouplingRunResult(
        records=tuple(pairs),
        diagnostics=diagnostics,
        config=config,
        wall_time=time.perf_counter() - t0,
    )


def write_records_csv(records, path) -> None:
    """Write estimate records with round-trippable float formatting."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RECORD_COLUMNS)
        for rep, r in enumerate(records):
            writer.writerow(
                [rep, repr(r.tau_hat), repr(r.tau_bar), repr(r.stat), repr(r.main_term), repr(r.remainder)]
            )


def read_records_csv(path) -> list[EstimateRecord]:
    """Read back a records CSV written by :func:`write_records_csv`."""
    records: list[EstimateRecord] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(RECORD_COLUMNS):
            raise ValueError(f"unexpected header {header!r} in {path}")
        for row in reader:
            if len(row) != len(RECORD_COLUMNS):
                raise ValueError(f"malformed row {row!r} in {path}")
            if int(row[0]) != len(records):
                raise ValueError(f"replication indices out of order in {path}")
            records.append(
                EstimateRecord(
                    tau_hat=float(row[1]),
                    tau_bar=float(row[2]),
                    stat=float(row[3]),
                    main_term=float(row[4]),
                    remainder=float(row[5]),
                )
            )
    return records


def write_couplings_csv(records, path) -> None:
    """Write per-replication coupling discrepancy pairs."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COUPLING_COLUMNS)
        for rep, (d1, d2) in enumerate(records):
            writer.writerow([rep, repr(d1), repr(d2)])


def summary_dict(result: RunResult, sigma2_mc: float | None = None) -> dict:
    """Assemble the run summary in its stable key order.

    ``sigma2_theory`` is the closed-form limiting variance when one is
    known for the configured (kernel, profile, pi); ``sigma2_mc`` is the
    caller's Monte Carlo estimate of the same quantity.
    """
    cfg = result.config
    rep = result.report
    return {
        "n": cfg.n,
        "pi": cfg.pi,
        "rho": cfg.rho,
        "design": cfg.design.value,
        "sample_mean": None if rep is None else rep.sample_mean,
        "sample_var": None if rep is None else rep.sample_var,
        "qq_r2": None if rep is None else rep.qq_r2,
        "sigma2_theory": closed_form_limiting_variance(cfg.kernel, cfg.profile, cfg.pi),
        "sigma2_mc": sigma2_mc,
        "histogram": None if rep is None else [list(b) for b in rep.histogram],
    }


def couple_summary_dict(result: CouplingRunResult) -> dict:
    """Assemble the coupling-run summary in its stable key order."""
    cfg = result.config
    d = result.diagnostics
    return {
        "n": cfg.n,
        "pi": cfg.pi,
        "rho": cfg.rho,
        "replications": cfg.replications,
        "n_times_var_d1": d.n_times_var_d1,
        "n_times_var_d2": d.n_times_var_d2,
        "l1_outcome_gap": d.l1_outcome_gap,
        "l1_derivative_gap": d.l1_derivative_gap,
        "cut_gap": d.cut_gap,
    }


def write_json(payload: dict, path) -> None:
    """Write a summary dictionary as stable, human-readable JSON."""
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
