"""Command-line interface: cluster, bench, oracle, fuzzy-eval."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .bench import load_experiment_config, run_experiment
from .fuzzy import default_system, load_fis_config
from .mdg import ModuleGraph, brute_force_optimum, parse_mdg
from .optimizer import SearchConfig, run


def _read_graph(path: str) -> ModuleGraph:
    file = Path(path)
    if not file.is_file():
        raise FileNotFoundError(f"MDG file not found: {file}")
    return parse_mdg(file.read_text("utf-8"))


def _read_fis(path: str | None):
    if path is None:
        return default_system()
    file = Path(path)
    if not file.is_file():
        raise FileNotFoundError(f"FIS config not found: {file}")
    return load_fis_config(file.read_text("utf-8"))


def _print_clusters(graph: ModuleGraph, labels: Sequence[int]) -> None:
    for k in sorted(set(labels)):
        members = [module for module, label in zip(graph.modules, labels) if label == k]
        print(f"cluster {k}: {' '.join(members)}")


def _cmd_cluster(args: argparse.Namespace) -> int:
    graph = _read_graph(args.mdg)
    fis = _read_fis(args.fis) if args.algorithm == "atlbo" else None
    config = SearchConfig(
        pop_size=args.pop_size,
        max_evals=args.max_evals,
        seed=args.seed,
        algorithm=args.algorithm,
        fis=fis,
    )
    result = run(graph, config)
    print(f"algorithm: {args.algorithm}")
    print(f"seed: {args.seed}")
    print(f"evaluations: {result.evals_used}")
    print(f"best MQ: {result.best_mq:.6f}")
    _print_clusters(graph, result.best_labels)
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    graph = _read_graph(args.mdg)
    labels, value = brute_force_optimum(graph)
    print(f"optimal MQ: {value:.6f}")
    _print_clusters(graph, labels)
    return 0


def _cmd_fuzzy_eval(args: argparse.Namespace) -> int:
    system = _read_fis(args.fis)
    value = system.infer(args.qm, args.im, args.dm)
    print("undefined" if value is None else f"{value:.6f}")
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    config = load_experiment_config(args.config)

    def progress(case: str, algorithm: str, stats) -> None:
        print(
            f"{case} / {algorithm}: best={stats.best:.6f} mean={stats.mean:.6f} "
            f"std={stats.std:.6f} over {stats.runs} runs",
            file=sys.stderr,
        )

    report = run_experiment(config, progress=progress)
    header = f"{'case':<20} {'algorithm':<10} {'best':>10} {'std':>10} {'mean':>10}"
    print(header)
    for case in config.cases:
        for algorithm in config.algorithms:
            stats = report.summaries[(case.name, algorithm)]
            print(
                f"{case.name:<20} {algorithm:<10} {stats.best:>10.6f} "
                f"{stats.std:>10.6f} {stats.mean:>10.6f}"
            )
    print(f"per-run CSV: {report.runs_csv}")
    print(f"summary CSV: {report.summary_csv}")
    for case_name, path in report.best_json.items():
        print(f"best partition ({case_name}): {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdgcluster",
        description="Cluster software module dependency graphs by maximizing MQ "
        "with TLBO or fuzzy-adaptive ATLBO.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    cluster = sub.add_parser("cluster", help="single optimization run on one MDG file")
    cluster.add_argument("mdg", help="path to the MDG file")
    cluster.add_argument("--algorithm", choices=("tlbo", "atlbo"), default="atlbo")
    cluster.add_argument("--pop-size", type=int, default=40)
    cluster.add_argument("--max-evals", type=int, default=5000)
    cluster.add_argument("--seed", type=int, default=0)
    cluster.add_argument("--fis", default=None, help="FIS config (default: shipped controller)")
    cluster.set_defaults(func=_cmd_cluster)

    bench = sub.add_parser("bench", help="run a full benchmark experiment")
    bench.add_argument("--config", required=True, help="experiment config file")
    bench.set_defaults(func=_cmd_bench)

    oracle = sub.add_parser("oracle", help="exhaustive optimum for a small MDG (<= 12 modules)")
    oracle.add_argument("mdg", help="path to the MDG file")
    oracle.set_defaults(func=_cmd_oracle)

    fuzzy_eval = sub.add_parser("fuzzy-eval", help="evaluate the phase-selection controller once")
    fuzzy_eval.add_argument("--fis", default=None, help="FIS config (default: shipped controller)")
    fuzzy_eval.add_argument("--qm", type=float, required=True, help="quality measure in [0, 100]")
    fuzzy_eval.add_argument("--im", type=float, required=True, help="intensification measure")
    fuzzy_eval.add_argument("--dm", type=float, required=True, help="diversification measure")
    fuzzy_eval.set_defaults(func=_cmd_fuzzy_eval)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
