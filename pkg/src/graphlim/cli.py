"""Command-line interface.

Five subcommands wire configs to the library: ``simulate`` runs a
replication study and writes CSV/JSON (plus rendered figures), ``variance``
estimates the limiting variance, ``cutnorm`` measures the graph-kernel
distance, ``check`` evaluates the regularity conditions, and ``couple``
runs coupling-discrepancy replications.

Exit codes: 0 success, 1 usage or config error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from .config import (
    ConfigError,
    PRESETS,
    experiment_config,
    load_config_file,
    preset_config,
)
from .cutnorm import graph_kernel_distance, sort_by_latents
from .graphs import check_graph_conditions, half_graph, sample_graphon_graph, sparsify
from .harness import (
    ExperimentConfig,
    ExperimentDesign,
    couple_summary_dict,
    run_coupling_replications,
    run_replications,
    summary_dict,
    write_couplings_csv,
    write_json,
    write_records_csv,
)
from .asymptotics import limiting_variance_mc
from .kernels import check_kernel_conditions
from .seeding import (
    PURPOSE_CUTNORM,
    PURPOSE_GRAPH,
    PURPOSE_LATENTS,
    PURPOSE_SPARSIFY,
    PURPOSE_VARIANCE,
    substream,
)

__all__ = ["main", "build_parser"]


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits with code 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_config_arguments(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--config", metavar="PATH", help="JSON config file")
    source.add_argument(
        "--preset",
        choices=sorted(PRESETS),
        help="named built-in config",
    )
    parser.add_argument("--n", type=int, help="override the population size")
    parser.add_argument("--pi", type=float, help="override the treatment probability")
    parser.add_argument(
        "--seed", type=int, dest="master_seed", help="override the master seed"
    )
    parser.add_argument("--replications", type=int, help="override the replication count")
    parser.add_argument("--parallelism", type=int, help="override the worker count")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="graphlim",
        description="Simulation and diagnostics for randomized experiments "
        "under network interference with a limiting kernel.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run replications; write CSV, JSON and figures")
    _add_config_arguments(p)
    p.add_argument("--out-dir", default=".", help="output directory (default: .)")
    p.add_argument("--bins", type=int, default=60, help="histogram bin count (default: 60)")
    p.add_argument(
        "--mc-samples",
        type=int,
        default=100_000,
        help="Monte Carlo draws for the limiting-variance estimate (default: 100000)",
    )
    p.add_argument(
        "--quadrature-points",
        type=int,
        default=4096,
        help="quadrature nodes for the neighborhood term (default: 4096)",
    )
    p.add_argument(
        "--no-figures", action="store_true", help="skip rendering histogram/QQ PNGs"
    )
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("variance", help="estimate the limiting variance")
    _add_config_arguments(p)
    p.add_argument("--mc-samples", type=int, default=100_000)
    p.add_argument("--quadrature-points", type=int, default=4096)
    p.add_argument("--out", metavar="PATH", help="write JSON here instead of stdout")
    p.set_defaults(handler=_cmd_variance)

    p = sub.add_parser("cutnorm", help="graph-kernel distance in cut norm")
    _add_config_arguments(p)
    p.add_argument("--method", choices=("auto", "exact", "heuristic"), default="auto")
    p.add_argument("--restarts", type=int, default=64, help="heuristic restarts (default: 64)")
    p.add_argument(
        "--max-exact-n",
        type=int,
        default=20,
        help="largest n solved exactly under --method auto (default: 20)",
    )
    p.add_argument("--out", metavar="PATH", help="write JSON here instead of stdout")
    p.set_defaults(handler=_cmd_cutnorm)

    p = sub.add_parser("check", help="evaluate kernel/graph regularity conditions")
    _add_config_arguments(p)
    p.add_argument(
        "--grid-points", type=int, default=256, help="kernel check grid size (default: 256)"
    )
    p.add_argument("--out", metavar="PATH", help="write JSON here instead of stdout")
    p.set_defaults(handler=_cmd_check)

    p = sub.add_parser("couple", help="coupling discrepancies over replications")
    _add_config_arguments(p)
    p.add_argument("--out-dir", default=".", help="output directory (default: .)")
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--max-exact-n", type=int, default=20)
    p.add_argument(
        "--no-gaps", action="store_true", help="skip the alignment-gap computations"
    )
    p.set_defaults(handler=_cmd_couple)

    return parser


def _resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.preset:
        data = preset_config(args.preset)
    elif args.config:
        data = load_config_file(args.config)
    else:
        data = None
    overrides = {
        "n": args.n,
        "pi": args.pi,
        "master_seed": args.master_seed,
        "replications": args.replications,
        "parallelism": args.parallelism,
    }
    return experiment_config(data, overrides)


def _emit_json(payload: dict, out: str | None) -> None:
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        write_json(payload, path)
    else:
        print(json.dumps(payload, indent=2))


def _replication_zero_graph(config: ExperimentConfig):
    """The replication-0 graph and its latent-sorting permutation."""
    if config.design is ExperimentDesign.DETERMINISTIC:
        graph = half_graph(config.n)
        if config.rho < 1.0:
            graph = sparsify(graph, config.rho, substream(config.master_seed, PURPOSE_SPARSIFY))
        return graph, None
    latents = substream(config.master_seed, PURPOSE_LATENTS, 0).random(config.n)
    graph = sample_graphon_graph(
        config.kernel, latents, config.rho, substream(config.master_seed, PURPOSE_GRAPH, 0)
    )
    return graph, sort_by_latents(latents)


def _cmd_simulate(args: argparse.Namespace, config: ExperimentConfig) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = run_replications(config, bins=args.bins)
    estimate = limiting_variance_mc(
        config.kernel,
        config.profile,
        config.pi,
        mc_samples=args.mc_samples,
        quadrature_points=args.quadrature_points,
        rng=substream(config.master_seed, PURPOSE_VARIANCE),
    )
    summary = summary_dict(result, sigma2_mc=estimate.sigma2)
    write_records_csv(result.records, out_dir / "results.csv")
    write_json(summary, out_dir / "summary.json")
    written = ["results.csv", "summary.json"]
    if not args.no_figures and result.report is not None:
        from .figures import save_histogram, save_qq_plot

        overlay = summary["sigma2_theory"]
        title = f"n={config.n}, {config.design.value}, rho={config.rho:.4g}"
        save_histogram(
            result.report,
            out_dir / "histogram.png",
            sigma2=estimate.sigma2 if overlay is None else overlay,
            title=title,
        )
        save_qq_plot([r.stat for r in result.records], out_dir / "qq.png", title=title)
        written += ["histogram.png", "qq.png"]
    print(
        f"wrote {', '.join(written)} to {out_dir} "
        f"({config.replications} replications in {result.wall_time:.1f}s)"
    )
    return 0


def _cmd_variance(args: argparse.Namespace, config: ExperimentConfig) -> int:
    estimate = limiting_variance_mc(
        config.kernel,
        config.profile,
        config.pi,
        mc_samples=args.mc_samples,
        quadrature_points=args.quadrature_points,
        rng=substream(config.master_seed, PURPOSE_VARIANCE),
    )
    payload = {
        "sigma2": estimate.sigma2,
        "se": estimate.se,
        "sigma2_over_n": estimate.sigma2 / config.n,
    }
    _emit_json(payload, args.out)
    return 0


def _cmd_cutnorm(args: argparse.Namespace, config: ExperimentConfig) -> int:
    graph, perm = _replication_zero_graph(config)
    if args.method == "exact" or (args.method == "auto" and config.n <= args.max_exact_n):
        method = "exact"
    else:
        method = "heuristic"
    value = graph_kernel_distance(
        graph,
        config.rho,
        config.kernel,
        perm=perm,
        method=method,
        restarts=args.restarts,
        rng=substream(config.master_seed, PURPOSE_CUTNORM),
        max_n=max(config.n, args.max_exact_n),
    )
    payload = {"n": config.n, "rho": config.rho, "method": method, "value": value}
    _emit_json(payload, args.out)
    return 0


def _cmd_check(args: argparse.Namespace, config: ExperimentConfig) -> int:
    kernel_report = check_kernel_conditions(config.kernel, grid_points=args.grid_points)
    graph, _ = _replication_zero_graph(config)
    graph_report = check_graph_conditions(graph, config.rho)
    payload = {
        "kernel": asdict(kernel_report),
        "graph": asdict(graph_report),
        "scale": {
            "kind": config.scale.kind,
            "beta": config.scale.beta,
            "satisfies_growth_condition": config.scale.satisfies_growth_condition(),
        },
    }
    _emit_json(payload, args.out)
    return 0


def _cmd_couple(args: argparse.Namespace, config: ExperimentConfig) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = run_coupling_replications(
        config,
        compute_gaps=not args.no_gaps,
        restarts=args.restarts,
        max_exact_n=args.max_exact_n,
    )
    write_couplings_csv(result.records, out_dir / "couplings.csv")
    write_json(couple_summary_dict(result), out_dir / "couple_summary.json")
    print(
        f"wrote couplings.csv, couple_summary.json to {out_dir} "
        f"({config.replications} replications in {result.wall_time:.1f}s)"
    )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _resolve_config(args)
    except ConfigError as exc:
        print(f"graphlim: error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.handler(args, config)
    except Exception as exc:
        print(f"graphlim: failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
