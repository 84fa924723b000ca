"""Module dependency graphs and the Modularization Quality (MQ) fitness.

An MDG is a directed, weighted graph whose nodes are software modules.
A clustering assigns every module an integer cluster label in [1, D]
(D = number of modules).  Its quality is the sum, over non-empty
clusters, of the modularization factor i / (i + j/2), where i is the
intra-cluster edge weight and j the weight of edges crossing the
cluster boundary in either direction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

__all__ = [
    "MdgParseError",
    "ClusterWeights",
    "ModuleGraph",
    "parse_mdg",
    "serialize_mdg",
    "cluster_weights",
    "modularization_factor",
    "mq",
    "MQEvaluator",
    "canonicalize",
    "iter_partitions",
    "brute_force_optimum",
    "BRUTE_FORCE_MAX_MODULES",
]

BRUTE_FORCE_MAX_MODULES = 12


class MdgParseError(ValueError):
    """Raised when MDG text is malformed; the message carries the line number."""


class ClusterWeights(NamedTuple):
    """Intra- and inter-edge weight totals of one cluster."""

    intra: float
    inter: float


@dataclass(frozen=True)
class ModuleGraph:
    """Directed weighted dependency graph over named modules.

    Attributes:
        modules: unique, non-empty module names in first-appearance order.
        edges: (source index, target index, weight) triples; weights are
            strictly positive, self-loops and duplicate (source, target)
            pairs are rejected.
    """

    modules: tuple[str, ...]
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self) -> None:
        seen_names = set()
        for name in self.modules:
            if not name:
                raise ValueError("module names must be non-empty")
            if name in seen_names:
                raise ValueError(f"duplicate module name {name!r}")
            seen_names.add(name)
        count = len(self.modules)
        seen_pairs = set()
        for source, target, weight in self.edges:
            if not (0 <= source < count and 0 <= target < count):
                raise ValueError(f"edge ({source}, {target}) references an unknown module")
            if source == target:
                raise ValueError(f"self-loop on module {self.modules[source]!r}")
            if weight <= 0:
                raise ValueError(f"edge weight must be > 0, got {weight}")
            if (source, target) in seen_pairs:
                raise ValueError(
                    f"duplicate edge {self.modules[source]!r} -> {self.modules[target]!r}"
                )
            seen_pairs.add((source, target))

    @property
    def module_count(self) -> int:
        return len(self.modules)

    @property
    def total_weight(self) -> float:
        return sum(weight for _, _, weight in self.edges)


def parse_mdg(text: str) -> ModuleGraph:
    """Parse MDG text into a :class:`ModuleGraph`.

    Each non-blank, non-comment line is either ``SOURCE TARGET [WEIGHT]``
    (a directed edge; WEIGHT defaults to 1.0) or a single token ``NAME``
    (declares a module, useful for isolated ones).  Lines starting with
    ``#`` are comments.  Modules are registered in first-appearance
    order.  A two-way relationship is written as two edge lines.
    """
    names: list[str] = []
    index: dict[str, int] = {}
    edges: list[tuple[int, int, float]] = []
    seen_pairs: set[tuple[int, int]] = set()

    def register(name: str) -> int:
        if name not in index:
            index[name] = len(names)
            names.append(name)
        return index[name]

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) == 1:
            register(tokens[0])
            continue
        if len(tokens) > 3:
            raise MdgParseError(
                f"line {lineno}: expected 'SOURCE TARGET [WEIGHT]' or 'NAME', "
                f"got {len(tokens)} tokens"
            )
        source_name, target_name = tokens[0], tokens[1]
        if len(tokens) == 3:
            try:
                weight = float(tokens[2])
            except ValueError:
                raise MdgParseError(
                    f"line {lineno}: non-numeric edge weight {tokens[2]!r}"
                ) from None
        else:
            weight = 1.0
        if source_name == target_name:
            raise MdgParseError(f"line {lineno}: self-loop on {source_name!r}")
        if weight <= 0:
            raise MdgParseError(f"line {lineno}: edge weight must be > 0, got {weight}")
        source = register(source_name)
        target = register(target_name)
        if (source, target) in seen_pairs:
            raise MdgParseError(
                f"line {lineno}: duplicate edge {source_name!r} -> {target_name!r}"
            )
        seen_pairs.add((source, target))
        edges.append((source, target, weight))

    return ModuleGraph(modules=tuple(names), edges=tuple(edges))


def serialize_mdg(graph: ModuleGraph) -> str:
    """Render a graph as MDG text that parses back to an identical graph."""
    lines = list(graph.modules)
    for source, target, weight in graph.edges:
        lines.append(f"{graph.modules[source]} {graph.modules[target]} {weight!r}")
    return "\n".join(lines) + "\n"


def _validate_labels(graph: ModuleGraph, labels: Sequence[int]) -> None:
    count = graph.module_count
    if len(labels) != count:
        raise ValueError(f"expected {count} labels, got {len(labels)}")
    for label in labels:
        if label != int(label) or not 1 <= label <= count:
            raise ValueError(f"label {label!r} outside [1, {count}]")


def cluster_weights(graph: ModuleGraph, labels: Sequence[int], k: int) -> ClusterWeights:
    """Intra and inter edge-weight sums of cluster ``k`` under ``labels``."""
    _validate_labels(graph, labels)
    if k not in labels:
        raise ValueError(f"cluster {k} does not appear in the labeling")
    intra = 0.0
    inter = 0.0
    for source, target, weight in graph.edges:
        source_in = labels[source] == k
        target_in = labels[target] == k
        if source_in and target_in:
            intra += weight
        elif source_in or target_in:
            inter += weight
    return ClusterWeights(intra, inter)


def modularization_factor(intra: float, inter: float) -> float:
    """Per-cluster quality ratio: 0 when intra = 0, else intra/(intra + inter/2)."""
    if intra < 0 or inter < 0:
        raise ValueError("edge weight sums must be non-negative")
    if intra == 0:
        return 0.0
    return intra / (intra + inter / 2.0)


class MQEvaluator:
    """Repeated MQ evaluation against one graph.

    Precomputes the edge list once; each call is a single pass over the
    edges plus a reduction over cluster ids.  Label values must already
    lie in [1, D].
    """

    def __init__(self, graph: ModuleGraph):
        self._edges = list(graph.edges)
        self._count = graph.module_count

    def __call__(self, labels: Sequence[int]) -> float:
        size = self._count + 1
        intra = [0.0] * size
        inter = [0.0] * size
        for source, target, weight in self._edges:
            label_s = labels[source]
            label_t = labels[target]
            if label_s == label_t:
                intra[label_s] += weight
            else:
                inter[label_s] += weight
                inter[label_t] += weight
        total = 0.0
        for i, j in zip(intra, inter):
            if i > 0:
                total += i / (i + j * 0.5)
        return total


def mq(graph: ModuleGraph, labels: Sequence[int]) -> float:
    """Modularization Quality: sum of modularization factors over non-empty clusters."""
    _validate_labels(graph, labels)
    return MQEvaluator(graph)(list(labels))


def canonicalize(labels: Sequence[int]) -> tuple[int, ...]:
    """Renumber clusters by first appearance: same partition, canonical labels."""
    mapping: dict[int, int] = {}
    out = []
    for label in labels:
        key = int(label)
        if key not in mapping:
            mapping[key] = len(mapping) + 1
        out.append(mapping[key])
    return tuple(out)


def iter_partitions(count: int) -> Iterator[tuple[int, ...]]:
    """Yield every set partition of ``count`` items as canonical label tuples.

    Enumerates restricted growth strings in lexicographic order, so each
    labeling is already canonical and the stream is sorted.
    """
    if count == 0:
        yield ()
        return
    labels = [1] * count
    prefix_max = [1] * count
    while True:
        yield tuple(labels)
        i = count - 1
        while i > 0 and labels[i] > prefix_max[i - 1]:
            i -= 1
        if i == 0:
            return
        labels[i] += 1
        prefix_max[i] = max(prefix_max[i - 1], labels[i])
        for j in range(i + 1, count):
            labels[j] = 1
            prefix_max[j] = prefix_max[i]


def brute_force_optimum(graph: ModuleGraph) -> tuple[tuple[int, ...], float]:
    """Exhaustive MQ maximization over all set partitions of the modules.

    Ties resolve to the lexicographically smallest canonical labeling.
    Refuses graphs with more than ``BRUTE_FORCE_MAX_MODULES`` modules
    (Bell-number blowup).
    """
    count = graph.module_count
    if count > BRUTE_FORCE_MAX_MODULES:
        raise ValueError(
            f"graph has {count} modules; brute force is capped at "
            f"{BRUTE_FORCE_MAX_MODULES} (set-partition enumeration)"
        )
    evaluate = MQEvaluator(graph)
    best_labels: tuple[int, ...] | None = None
    best_value = float("-inf")
    for labels in iter_partitions(count):
        value = evaluate(labels)
        if value > best_value:
            best_value = value
            best_labels = labels
    assert best_labels is not None
    return best_labels, best_value
