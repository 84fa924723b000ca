"""Experiment runner: repeated seeded runs, summary statistics, report files.

An experiment crosses case graphs with algorithms, runs each pair
``runs`` times with seeds ``base_seed + run``, and writes three kinds of
artifact under ``output_dir``: a per-run CSV, a summary CSV (best, std,
mean per case/algorithm), and one best-partition JSON per case.  Only
the wall-time column is non-deterministic, and it sits last in the
per-run CSV so the rest can be compared byte for byte.
"""

from __future__ import annotations

import csv
import json
import statistics
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

from .fuzzy import FuzzySystem, default_system, load_fis_config
from .mdg import ModuleGraph, parse_mdg
from .optimizer import RunResult, SearchConfig, run

__all__ = [
    "ExperimentConfigError",
    "ExperimentCase",
    "ExperimentConfig",
    "SummaryStats",
    "RunRecord",
    "ExperimentReport",
    "BUILTIN_CASES",
    "load_graph_source",
    "load_experiment_config",
    "summarize",
    "run_experiment",
]

BUILTIN_CASES = ("printer_manager", "iot_controller", "layer_monitor")

RUNS_CSV_COLUMNS = ["case", "algorithm", "run", "seed", "best_mq", "evals_used", "iterations", "wall_ms"]
SUMMARY_CSV_COLUMNS = ["case", "algorithm", "best", "std", "mean"]


class ExperimentConfigError(ValueError):
    """Raised when an experiment config file is malformed."""


@dataclass
class ExperimentCase:
    """One benchmark graph, with optional per-case search overrides."""

    name: str
    source: str  # filesystem path or "builtin:<name>"
    pop_size: int | None = None
    max_evals: int | None = None
    fis_source: str | None = None


@dataclass
class ExperimentConfig:
    cases: list[ExperimentCase]
    algorithms: list[str] = field(default_factory=lambda: ["tlbo", "atlbo"])
    runs: int = 20
    base_seed: int = 0
    pop_size: int = 40
    max_evals: int = 5000
    fis_source: str | None = None
    output_dir: Path = Path("results")
    base_dir: Path = Path(".")  # anchor for relative case/fis paths

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not self.cases:
            raise ValueError("experiment needs at least one case")
        if not self.algorithms:
            raise ValueError("experiment needs at least one algorithm")
        for algorithm in self.algorithms:
            if algorithm not in ("tlbo", "atlbo"):
                raise ValueError(f"unknown algorithm {algorithm!r}")
        names = [case.name for case in self.cases]
        if len(set(names)) != len(names):
            raise ValueError("case names must be unique")


@dataclass(frozen=True)
class SummaryStats:
    """Best / mean / sample std (n-1) of the per-run best MQ values."""

    best: float
    mean: float
    std: float
    runs: int


@dataclass(frozen=True)
class RunRecord:
    case: str
    algorithm: str
    run: int
    seed: int
    result: RunResult


@dataclass
class ExperimentReport:
    records: list[RunRecord]
    summaries: dict[tuple[str, str], SummaryStats]
    runs_csv: Path
    summary_csv: Path
    best_json: dict[str, Path]
    graphs: dict[str, ModuleGraph]


def load_graph_source(source: str, base_dir: Path = Path(".")) -> ModuleGraph:
    """Load an MDG from a path, or from package data via ``builtin:<name>``."""
    if source.startswith("builtin:"):
        name = source.split(":", 1)[1]
        if name not in BUILTIN_CASES:
            raise ExperimentConfigError(
                f"unknown builtin case {name!r}; available: {', '.join(BUILTIN_CASES)}"
            )
        text = resources.files("mdgcluster").joinpath(f"data/cases/{name}.mdg").read_text("utf-8")
        return parse_mdg(text)
    path = Path(base_dir) / source
    if not path.is_file():
        raise FileNotFoundError(f"case file not found: {path}")
    return parse_mdg(path.read_text("utf-8"))


def _load_fis_source(source: str | None, base_dir: Path) -> FuzzySystem:
    if source is None:
        return default_system()
    path = Path(base_dir) / source
    if not path.is_file():
        raise FileNotFoundError(f"FIS config not found: {path}")
    return load_fis_config(path.read_text("utf-8"))


_CASE_OVERRIDE_KEYS = ("pop_size", "max_evals", "fis")


def _parse_case_line(tokens: list[str], lineno: int) -> ExperimentCase:
    if len(tokens) < 2:
        raise ExperimentConfigError(f"line {lineno}: case needs 'case NAME PATH [key=value ...]'")
    case = ExperimentCase(name=tokens[0], source=tokens[1])
    for token in tokens[2:]:
        key, eq, value = token.partition("=")
        if not eq or key not in _CASE_OVERRIDE_KEYS:
            raise ExperimentConfigError(
                f"line {lineno}: bad case override {token!r} (allowed: {', '.join(_CASE_OVERRIDE_KEYS)})"
            )
        if key == "fis":
            case.fis_source = value
        else:
            try:
                setattr(case, key, int(value))
            except ValueError:
                raise ExperimentConfigError(f"line {lineno}: {key} must be an integer") from None
    return case


def load_experiment_config(path: str | Path) -> ExperimentConfig:
    """Parse the plain-text experiment config format.

    ``key = value`` lines set experiment-wide fields (runs, base_seed,
    algorithms, pop_size, max_evals, fis, output_dir); ``case NAME PATH``
    lines add benchmark graphs, optionally with trailing per-case
    ``pop_size=`` / ``max_evals=`` / ``fis=`` overrides.  ``#`` starts a
    comment line.  Case and FIS paths resolve relative to the config
    file; output_dir resolves relative to the working directory.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    base_dir = path.parent

    cases: list[ExperimentCase] = []
    settings: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text("utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if tokens[0] == "case":
            cases.append(_parse_case_line(tokens[1:], lineno))
            continue
        key, eq, value = (part.strip() for part in line.partition("="))
        if not eq or not key or not value:
            raise ExperimentConfigError(f"line {lineno}: expected 'key = value' or 'case ...'")
        if key not in ("runs", "base_seed", "algorithms", "pop_size", "max_evals", "fis", "output_dir"):
            raise ExperimentConfigError(f"line {lineno}: unknown key {key!r}")
        if key in settings:
            raise ExperimentConfigError(f"line {lineno}: key {key!r} set twice")
        settings[key] = value

    kwargs: dict = {"cases": cases, "base_dir": base_dir}
    for key in ("runs", "base_seed", "pop_size", "max_evals"):
        if key in settings:
            try:
                kwargs[key] = int(settings[key])
            except ValueError:
                raise ExperimentConfigError(f"{key} must be an integer, got {settings[key]!r}") from None
    if "algorithms" in settings:
        kwargs["algorithms"] = settings["algorithms"].replace(",", " ").split()
    if "fis" in settings:
        kwargs["fis_source"] = settings["fis"]
    if "output_dir" in settings:
        kwargs["output_dir"] = Path(settings["output_dir"])
    try:
        return ExperimentConfig(**kwargs)
    except ValueError as exc:
        raise ExperimentConfigError(str(exc)) from None


def summarize(results: Sequence[RunResult]) -> SummaryStats:
    """Best / mean / sample std over the runs' best MQ (std 0.0 for a single run)."""
    if not results:
        raise ValueError("cannot summarize zero runs")
    values = [result.best_mq for result in results]
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    return SummaryStats(best=max(values), mean=statistics.fmean(values), std=std, runs=len(values))


def _mq6(value: float) -> str:
    return f"{value:.6f}"


def run_experiment(
    config: ExperimentConfig,
    progress: Callable[[str, str, SummaryStats], None] | None = None,
) -> ExperimentReport:
    """Execute the full (case x algorithm x run) grid and write reports.

    All inputs are validated and loaded before the first run starts, so
    a bad case file or FIS config fails the whole experiment up front.
    Rows are produced in (case, algorithm, run) order with seeds
    ``base_seed + run``, which makes re-runs byte-reproducible.
    """
    graphs = {case.name: load_graph_source(case.source, config.base_dir) for case in config.cases}
    systems: dict[str, FuzzySystem] = {}
    if "atlbo" in config.algorithms:
        for case in config.cases:
            source = case.fis_source if case.fis_source is not None else config.fis_source
            systems[case.name] = _load_fis_source(source, config.base_dir)
    search_settings = {
        case.name: (
            case.pop_size if case.pop_size is not None else config.pop_size,
            case.max_evals if case.max_evals is not None else config.max_evals,
        )
        for case in config.cases
    }
    # Validate every (case, algorithm) SearchConfig before spending any compute.
    for case in config.cases:
        pop_size, max_evals = search_settings[case.name]
        for algorithm in config.algorithms:
            SearchConfig(
                pop_size=pop_size,
                max_evals=max_evals,
                seed=config.base_seed,
                algorithm=algorithm,
                fis=systems.get(case.name),
            )

    records: list[RunRecord] = []
    summaries: dict[tuple[str, str], SummaryStats] = {}
    for case in config.cases:
        pop_size, max_evals = search_settings[case.name]
        for algorithm in config.algorithms:
            block: list[RunResult] = []
            for run_index in range(config.runs):
                seed = config.base_seed + run_index
                search = SearchConfig(
                    pop_size=pop_size,
                    max_evals=max_evals,
                    seed=seed,
                    algorithm=algorithm,
                    fis=systems.get(case.name),
                )
                result = run(graphs[case.name], search)
                block.append(result)
                records.append(
                    RunRecord(case=case.name, algorithm=algorithm, run=run_index, seed=seed, result=result)
                )
            summaries[(case.name, algorithm)] = summarize(block)
            if progress is not None:
                progress(case.name, algorithm, summaries[(case.name, algorithm)])

    output_dir = Path(config.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)

    runs_csv = output_dir / "runs.csv"
    with runs_csv.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(RUNS_CSV_COLUMNS)
        for record in records:
            writer.writerow(
                [
                    record.case,
                    record.algorithm,
                    record.run,
                    record.seed,
                    _mq6(record.result.best_mq),
                    record.result.evals_used,
                    record.result.iterations,
                    f"{record.result.wall_time * 1000.0:.3f}",
                ]
            )

    summary_csv = output_dir / "summary.csv"
    with summary_csv.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(SUMMARY_CSV_COLUMNS)
        for case in config.cases:
            for algorithm in config.algorithms:
                stats = summaries[(case.name, algorithm)]
                writer.writerow(
                    [case.name, algorithm, _mq6(stats.best), _mq6(stats.std), _mq6(stats.mean)]
                )

    best_json: dict[str, Path] = {}
    for case in config.cases:
        case_records = [r for r in records if r.case == case.name]
        winner = max(case_records, key=lambda r: r.result.best_mq)  # first max wins ties
        graph = graphs[case.name]
        payload = {
            "case": case.name,
            "algorithm": winner.algorithm,
            "run": winner.run,
            "seed": winner.seed,
            "mq": winner.result.best_mq,
            "clusters": {
                module: int(label)
                for module, label in zip(graph.modules, winner.result.best_labels)
            },
        }
        path = output_dir / f"{case.name}_best.json"
        path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        best_json[case.name] = path

    return ExperimentReport(
        records=records,
        summaries=summaries,
        runs_csv=runs_csv,
        summary_csv=summary_csv,
        best_json=best_json,
        graphs=graphs,
    )
