"""Software module clustering by MQ maximization with TLBO / fuzzy-adaptive ATLBO."""

from .bench import (
    ExperimentCase,
    ExperimentConfig,
    ExperimentConfigError,
    ExperimentReport,
    SummaryStats,
    load_experiment_config,
    load_graph_source,
    run_experiment,
    summarize,
)
from .fuzzy import (
    FisConfigError,
    FuzzyRule,
    FuzzySystem,
    LinguisticVariable,
    Trapezoid,
    default_system,
    load_fis_config,
)
from .mdg import (
    ClusterWeights,
    MdgParseError,
    ModuleGraph,
    brute_force_optimum,
    canonicalize,
    cluster_weights,
    iter_partitions,
    modularization_factor,
    mq,
    parse_mdg,
    serialize_mdg,
)
from .optimizer import (
    RunResult,
    SearchConfig,
    run,
    run_atlbo,
    run_tlbo,
)

__version__ = "0.1.0"
