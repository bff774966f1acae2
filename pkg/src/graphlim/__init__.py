"""graphlim: simulation and diagnostics for randomized experiments under
anonymous network interference with a limiting kernel.

The package simulates Bernoulli randomized experiments on large interference
graphs, computes Horvitz-Thompson effect estimates against their exact
design-based targets, measures how close a finite graph sits to its limiting
kernel in cut norm, and estimates the variance of the Gaussian limit of the
scaled estimation error.
"""

from .asymptotics import (
    CouplingDiagnostics,
    NormalityReport,
    VarianceEstimate,
    closed_form_limiting_variance,
    coupling_discrepancies,
    limiting_variance_mc,
    normality_report,
    q_term,
    q_term_batch,
)
from .config import (
    PRESETS,
    ConfigError,
    experiment_config,
    load_config_file,
    preset_config,
)
from .cutnorm import (
    CutNormResult,
    cut_norm_exact,
    cut_norm_heuristic,
    graph_kernel_distance,
    sort_by_latents,
)
from .estimation import (
    EstimateRecord,
    TreatmentVector,
    ade_exact,
    estimate_record,
    exposure_fractions,
    ht_estimate,
    influence_vector,
    linearized_main_term,
    sample_treatments,
)
from .graphs import (
    ExposureGraph,
    GraphConditionReport,
    Permutation,
    check_graph_conditions,
    graph_to_step_kernel,
    half_graph,
    permute_graph,
    read_edge_list,
    sample_graphon_graph,
    sparsify,
    write_edge_list,
)
from .harness import (
    CouplingRunResult,
    ExperimentConfig,
    ExperimentDesign,
    RunResult,
    build_experiment,
    run_coupling_replications,
    run_replications,
)
from .kernels import (
    HalfGraphKernel,
    Kernel,
    KernelConditionReport,
    ScaleSequence,
    StepKernel,
    block_average,
    check_kernel_conditions,
    eval_kernel,
    kernel_marginal,
    sample_on_grid,
)
from .outcomes import (
    PROFILE_PRESETS,
    OutcomeFunction,
    OutcomeProfile,
    OutcomeVector,
    class_f_bound,
    discretize_profile,
    eval_outcome,
    outcome_l1_distance,
    profile_at,
    sample_profile,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "CouplingDiagnostics",
    "CouplingRunResult",
    "CutNormResult",
    "EstimateRecord",
    "ExperimentConfig",
    "ExperimentDesign",
    "ExposureGraph",
    "GraphConditionReport",
    "HalfGraphKernel",
    "Kernel",
    "KernelConditionReport",
    "NormalityReport",
    "OutcomeFunction",
    "OutcomeProfile",
    "OutcomeVector",
    "PRESETS",
    "PROFILE_PRESETS",
    "Permutation",
    "RunResult",
    "ScaleSequence",
    "StepKernel",
    "TreatmentVector",
    "VarianceEstimate",
    "ade_exact",
    "block_average",
    "build_experiment",
    "check_graph_conditions",
    "check_kernel_conditions",
    "class_f_bound",
    "closed_form_limiting_variance",
    "coupling_discrepancies",
    "cut_norm_exact",
    "cut_norm_heuristic",
    "discretize_profile",
    "estimate_record",
    "eval_kernel",
    "eval_outcome",
    "experiment_config",
    "exposure_fractions",
    "graph_kernel_distance",
    "graph_to_step_kernel",
    "half_graph",
    "ht_estimate",
    "influence_vector",
    "kernel_marginal",
    "limiting_variance_mc",
    "linearized_main_term",
    "load_config_file",
    "normality_report",
    "outcome_l1_distance",
    "permute_graph",
    "preset_config",
    "profile_at",
    "q_term",
    "q_term_batch",
    "read_edge_list",
    "run_coupling_replications",
    "run_replications",
    "sample_graphon_graph",
    "sample_on_grid",
    "sample_profile",
    "sample_treatments",
    "sort_by_latents",
    "sparsify",
    "write_edge_list",
    "__version__",
]
