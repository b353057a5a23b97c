"""Mixed sum-product networks.

Tree-structured tractable density estimators over hybrid
continuous/discrete/categorical data, learned by recursively splitting
variables that test as independent and clustering rows otherwise, with
nonparametric histogram or unimodal piecewise-linear leaves. Joint,
marginal, and conditional densities, most-probable completions, samples,
and pairwise mutual information all cost a constant number of passes
over the tree.
"""

from .analysis import MiGraph, mi_graph, mutual_information
from .data import (
    CATEGORICAL,
    CONTINUOUS,
    DISCRETE,
    Column,
    Dataset,
    Schema,
    StatType,
    copula_transform,
    load_dataset,
    load_schema,
    one_hot,
)
from .errors import (
    ConditioningError,
    ConfigError,
    DomainError,
    EmptyInputError,
    FormatError,
    IngestError,
    MspnError,
    QueryError,
    SchemaError,
    VersionError,
)
from .inference import (
    Evidence,
    log_conditional,
    log_evaluate,
    log_evaluate_batch,
    mpe,
    sample,
)
from .numerics import (
    SeedScope,
    SineProjection,
    adaptive_bin_edges,
    cca_max_correlation,
    fit_monotone,
    integrate_piecewise_linear,
    kmeans,
    weighted_logsumexp,
)
from .leaves import (
    HistogramLeaf,
    PiecewiseLinearLeaf,
    fit_histogram,
    fit_isotonic_pwl,
    leaf_cdf,
    leaf_density,
    leaf_mode,
    leaf_sample,
    leaf_support,
)
from .rdc import (
    DependencyGraph,
    FeaturePartition,
    SamplePartition,
    cluster_samples,
    dependency_graph,
    rdc,
    split_features,
)
from .serialize import deserialize, load_model, save_model, serialize
from .structure import (
    LearnConfig,
    Mspn,
    ProductNode,
    SumNode,
    ValidityReport,
    iter_nodes,
    learn_mspn,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "CATEGORICAL",
    "CONTINUOUS",
    "DISCRETE",
    "Column",
    "ConditioningError",
    "ConfigError",
    "Dataset",
    "DependencyGraph",
    "DomainError",
    "EmptyInputError",
    "Evidence",
    "FeaturePartition",
    "FormatError",
    "HistogramLeaf",
    "IngestError",
    "LearnConfig",
    "MiGraph",
    "Mspn",
    "MspnError",
    "PiecewiseLinearLeaf",
    "ProductNode",
    "QueryError",
    "SamplePartition",
    "Schema",
    "SchemaError",
    "SeedScope",
    "SineProjection",
    "StatType",
    "SumNode",
    "ValidityReport",
    "VersionError",
    "adaptive_bin_edges",
    "cca_max_correlation",
    "cluster_samples",
    "copula_transform",
    "dependency_graph",
    "deserialize",
    "fit_histogram",
    "fit_isotonic_pwl",
    "fit_monotone",
    "integrate_piecewise_linear",
    "iter_nodes",
    "kmeans",
    "leaf_cdf",
    "leaf_density",
    "leaf_mode",
    "leaf_sample",
    "leaf_support",
    "learn_mspn",
    "load_dataset",
    "load_model",
    "load_schema",
    "log_conditional",
    "log_evaluate",
    "log_evaluate_batch",
    "mi_graph",
    "mpe",
    "mutual_information",
    "one_hot",
    "rdc",
    "sample",
    "save_model",
    "serialize",
    "split_features",
    "validate",
    "weighted_logsumexp",
]
