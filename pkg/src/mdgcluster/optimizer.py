"""Population search over clusterings: TLBO and its fuzzy-adaptive variant.

Individuals are continuous position vectors in [1, N]^D (N = D = module
count) decoded to cluster labels by round-half-up with clamping.  TLBO
runs the teacher (global) and learner (local) phases serially for every
individual; ATLBO asks a Mamdani controller which single phase to run,
spending half the evaluations per sweep.  Every fitness call is counted
against a strict budget, including the initial population.

Randomness comes from numpy's PCG64 via ``numpy.random.Generator``:
seeded, named, and reproducible for a fixed numpy version.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fuzzy import FuzzySystem, default_system
from .mdg import MQEvaluator, ModuleGraph, canonicalize

__all__ = [
    "SearchConfig",
    "RunResult",
    "MeasureSample",
    "Budget",
    "Population",
    "make_rng",
    "decode",
    "initialize_population",
    "teacher_phase_update",
    "learner_phase_update",
    "choose_peer",
    "greedy_accept",
    "quality_measure",
    "intensification_measure",
    "diversification_measure",
    "run_tlbo",
    "run_atlbo",
    "run",
]

ALGORITHMS = ("tlbo", "atlbo")

# Crisp controller outputs below this run the teacher phase, others the learner phase.
SELECTION_THRESHOLD = 50.0


@dataclass
class SearchConfig:
    """Knobs for one search run."""

    pop_size: int = 40
    max_evals: int = 5000
    seed: int = 0
    algorithm: str = "atlbo"
    fis: FuzzySystem | None = None  # atlbo only; None picks the shipped default
    collect_measures: bool = False  # record controller inputs per step (atlbo only)

    def __post_init__(self) -> None:
        if self.pop_size < 2:
            raise ValueError("pop_size must be >= 2")
        if self.max_evals < self.pop_size:
            raise ValueError("max_evals must cover at least the initial population")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")


@dataclass(frozen=True)
class MeasureSample:
    """Controller inputs observed for one individual update."""

    sweep: int
    index: int
    quality: float
    intensification: float
    diversification: float
    selection: float | None
    fitness: float
    min_fitness: float
    max_fitness: float


@dataclass
class RunResult:
    """Outcome of a single seeded run."""

    best_labels: tuple[int, ...]
    best_mq: float
    evals_used: int
    iterations: int
    phase_trace: list[str]
    wall_time: float  # seconds; excluded from determinism guarantees
    measure_trace: list[MeasureSample] | None = None


class Budget:
    """Strict fitness-evaluation counter."""

    def __init__(self, max_evals: int):
        self.max_evals = max_evals
        self.used = 0

    @property
    def exhausted(self) -> bool:
        return self.used >= self.max_evals

    def spend(self) -> None:
        if self.exhausted:
            raise RuntimeError("evaluation budget exhausted")
        self.used += 1


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def decode(position: np.ndarray, n_max: int) -> np.ndarray:
    """Positions to labels: round half up, then clamp to [1, n_max]."""
    # int-cast truncation equals floor on the half-up shifted values wherever
    # the result survives the lower clamp (anything below 1 clamps to 1).
    labels = (np.asarray(position) + 0.5).astype(np.int64)
    np.maximum(labels, 1, out=labels)
    np.minimum(labels, n_max, out=labels)
    return labels


class Population:
    """Mutable run state: positions, decoded labels, fitness, incumbent best.

    Canonical labels are cached per individual so the Hamming-based
    measures do not re-canonicalize the whole population every step.
    """

    def __init__(self, graph: ModuleGraph, positions: np.ndarray, budget: Budget):
        self.n_max = graph.module_count
        self._evaluate = MQEvaluator(graph)
        self.positions = positions
        size = positions.shape[0]
        self.labels = np.empty_like(positions, dtype=np.int64)
        self.canonical = np.empty_like(self.labels)
        self.fitness: list[float] = [0.0] * size
        for i in range(size):
            budget.spend()
            row = decode(positions[i], self.n_max)
            self.labels[i] = row
            label_list = row.tolist()
            self.canonical[i] = canonicalize(label_list)
            self.fitness[i] = self._evaluate(label_list)
        self.best_index = self._argbest()

    def _argbest(self) -> int:
        # max() keeps the first maximum, so fitness ties resolve to the lowest index
        return max(range(len(self.fitness)), key=lambda i: (self.fitness[i], -i))

    @property
    def size(self) -> int:
        return len(self.fitness)

    @property
    def mean_position(self) -> np.ndarray:
        return self.positions.mean(axis=0)

    def fitness_of(self, labels: np.ndarray) -> float:
        return self._evaluate(labels.tolist())

    def replace(self, index: int, position: np.ndarray, labels: np.ndarray, fitness: float) -> None:
        self.positions[index] = position
        self.labels[index] = labels
        self.canonical[index] = canonicalize(labels.tolist())
        self.fitness[index] = fitness
        self.best_index = self._argbest()


def initialize_population(
    graph: ModuleGraph, config: SearchConfig, rng: np.random.Generator, budget: Budget
) -> Population:
    """Uniform random positions in [1, N]^D, all evaluated (pop_size evaluations)."""
    if budget.max_evals - budget.used < config.pop_size:
        raise ValueError("budget too small to evaluate the initial population")
    n_max = graph.module_count
    positions = rng.uniform(1.0, float(n_max), size=(config.pop_size, n_max))
    return Population(graph, positions, budget)


def teacher_phase_update(
    position: np.ndarray,
    teacher_position: np.ndarray,
    mean_position: np.ndarray,
    n_max: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Global-search proposal: step toward the teacher, offset by the population mean.

    Draws the teaching factor T_F uniformly from {1, 2}, then one r in
    [0, 1) per dimension.  Pure proposal; nothing is evaluated.
    """
    teaching_factor = int(rng.integers(1, 3))
    r = rng.random(position.shape)
    proposal = position + r * (teacher_position - teaching_factor * mean_position)
    np.maximum(proposal, 1.0, out=proposal)
    np.minimum(proposal, float(n_max), out=proposal)
    return proposal


def learner_phase_update(
    position: np.ndarray,
    fitness: float,
    peer_position: np.ndarray,
    peer_fitness: float,
    n_max: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Local-search proposal relative to a random peer.

    Moves toward the peer only if the peer is strictly better; on ties
    or a worse peer it moves away instead.  One r in [0, 1) per
    dimension; pure proposal.
    """
    r = rng.random(position.shape)
    if peer_fitness > fitness:
        step = peer_position - position
    else:
        step = position - peer_position
    proposal = position + r * step
    np.maximum(proposal, 1.0, out=proposal)
    np.minimum(proposal, float(n_max), out=proposal)
    return proposal


def choose_peer(rng: np.random.Generator, pop_size: int, index: int) -> int:
    """Uniform random index != index."""
    if pop_size < 2:
        raise ValueError("need at least two individuals to pick a peer")
    peer = int(rng.integers(0, pop_size - 1))
    return peer + 1 if peer >= index else peer


def greedy_accept(
    population: Population, index: int, new_position: np.ndarray, budget: Budget
) -> bool:
    """Evaluate a proposal (one budget unit) and keep it only on strict improvement."""
    budget.spend()
    labels = decode(new_position, population.n_max)
    fitness = population.fitness_of(labels)
    if fitness > population.fitness[index]:
        population.replace(index, new_position, labels, fitness)
        return True
    return False


def _hamming_pct(canonical_a: Sequence[int], canonical_b: Sequence[int]) -> float:
    if len(canonical_a) != len(canonical_b):
        raise ValueError("label vectors differ in length")
    differing = sum(1 for a, b in zip(canonical_a, canonical_b) if a != b)
    return 100.0 * differing / len(canonical_a)


def quality_measure(fitnesses: Sequence[float], index: int) -> float:
    """Fitness of one individual scaled to [0, 100] within the population range.

    A uniform population (max = min) scores 100: every individual is
    simultaneously the best.
    """
    lowest = min(fitnesses)
    highest = max(fitnesses)
    if highest == lowest:
        return 100.0
    # ratio first: the extremes land on exactly 0 and 100
    return 100.0 * ((fitnesses[index] - lowest) / (highest - lowest))


def intensification_measure(best_labels: Sequence[int], current_labels: Sequence[int]) -> float:
    """Hamming distance to the incumbent best, on canonical labels, as a percentage."""
    return _hamming_pct(canonicalize(best_labels), canonicalize(current_labels))


def diversification_measure(all_labels: Sequence[Sequence[int]], index: int) -> float:
    """Mean canonical Hamming distance from one individual to its peers, in [0, 100]."""
    if len(all_labels) < 2:
        raise ValueError("diversification needs a population of at least two")
    canonical = [canonicalize(labels) for labels in all_labels]
    total = sum(_hamming_pct(canonical[j], canonical[index]) for j in range(len(canonical)) if j != index)
    return total / (len(all_labels) - 1)


def _finish(
    population: Population,
    budget: Budget,
    iterations: int,
    trace: list[str],
    started: float,
    measures: list[MeasureSample] | None,
) -> RunResult:
    best = population.best_index
    return RunResult(
        best_labels=canonicalize(population.labels[best].tolist()),
        best_mq=population.fitness[best],
        evals_used=budget.used,
        iterations=iterations,
        phase_trace=trace,
        wall_time=time.perf_counter() - started,
        measure_trace=measures,
    )


def run_tlbo(
    graph: ModuleGraph, config: SearchConfig, rng: np.random.Generator | None = None
) -> RunResult:
    """Serial two-phase search: every individual gets a teacher move then a learner move.

    Each full sweep costs 2 * pop_size evaluations; the run stops exactly
    when the budget is spent, mid-sweep if necessary.
    """
    if config.algorithm != "tlbo":
        raise ValueError(f"config.algorithm is {config.algorithm!r}, expected 'tlbo'")
    started = time.perf_counter()
    if rng is None:
        rng = make_rng(config.seed)
    budget = Budget(config.max_evals)
    population = initialize_population(graph, config, rng, budget)
    trace: list[str] = []
    iterations = 0

    while not budget.exhausted:
        completed_sweep = True
        for i in range(population.size):
            if budget.exhausted:
                completed_sweep = False
                break
            proposal = teacher_phase_update(
                population.positions[i],
                population.positions[population.best_index],
                population.mean_position,
                population.n_max,
                rng,
            )
            greedy_accept(population, i, proposal, budget)
            trace.append("teacher")
            if budget.exhausted:
                completed_sweep = False
                break
            peer = choose_peer(rng, population.size, i)
            proposal = learner_phase_update(
                population.positions[i],
                population.fitness[i],
                population.positions[peer],
                population.fitness[peer],
                population.n_max,
                rng,
            )
            greedy_accept(population, i, proposal, budget)
            trace.append("learner")
        if completed_sweep:
            iterations += 1

    return _finish(population, budget, iterations, trace, started, None)


def run_atlbo(
    graph: ModuleGraph,
    config: SearchConfig,
    fis: FuzzySystem | None = None,
    rng: np.random.Generator | None = None,
) -> RunResult:
    """Adaptive search: a fuzzy controller picks one phase per individual update.

    Per individual the controller reads the quality, intensification and
    diversification measures; a crisp selection below 50 (or an
    undefined one) runs the teacher phase, otherwise the learner phase.
    Each sweep costs exactly pop_size evaluations.
    """
    if config.algorithm != "atlbo":
        raise ValueError(f"config.algorithm is {config.algorithm!r}, expected 'atlbo'")
    started = time.perf_counter()
    if rng is None:
        rng = make_rng(config.seed)
    if fis is None:
        fis = config.fis if config.fis is not None else default_system()
    budget = Budget(config.max_evals)
    population = initialize_population(graph, config, rng, budget)
    trace: list[str] = []
    measures: list[MeasureSample] | None = [] if config.collect_measures else None
    iterations = 0
    dimension = graph.module_count

    while not budget.exhausted:
        completed_sweep = True
        for i in range(population.size):
            if budget.exhausted:
                completed_sweep = False
                break
            lowest = min(population.fitness)
            highest = max(population.fitness)
            fitness_before = population.fitness[i]
            if highest == lowest:
                quality = 100.0
            else:
                quality = 100.0 * ((fitness_before - lowest) / (highest - lowest))
            best_row = population.canonical[population.best_index]
            intensification = (
                100.0 * np.count_nonzero(best_row != population.canonical[i]) / dimension
            )
            diversification = (
                100.0
                * np.count_nonzero(population.canonical != population.canonical[i])
                / (dimension * (population.size - 1))
            )
            selection = fis.infer(quality, intensification, diversification)
            if selection is None or selection < SELECTION_THRESHOLD:
                phase = "teacher"
                proposal = teacher_phase_update(
                    population.positions[i],
                    population.positions[population.best_index],
                    population.mean_position,
                    population.n_max,
                    rng,
                )
            else:
                phase = "learner"
                peer = choose_peer(rng, population.size, i)
                proposal = learner_phase_update(
                    population.positions[i],
                    population.fitness[i],
                    population.positions[peer],
                    population.fitness[peer],
                    population.n_max,
                    rng,
                )
            greedy_accept(population, i, proposal, budget)
            trace.append(phase)
            if measures is not None:
                measures.append(
                    MeasureSample(
                        sweep=iterations,
                        index=i,
                        quality=quality,
                        intensification=intensification,
                        diversification=float(diversification),
                        selection=selection,
                        fitness=fitness_before,
                        min_fitness=lowest,
                        max_fitness=highest,
                    )
                )
        if completed_sweep:
            iterations += 1

    return _finish(population, budget, iterations, trace, started, measures)


def run(graph: ModuleGraph, config: SearchConfig) -> RunResult:
    """Dispatch on ``config.algorithm``."""
    if config.algorithm == "tlbo":
        return run_tlbo(graph, config)
    return run_atlbo(graph, config)
