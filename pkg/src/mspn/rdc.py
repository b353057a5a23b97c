"""Nonparametric dependency machinery.

Dependence between variables of any kind is scored by rank-transforming
each variable, pushing the ranks through random sine feature maps, and
taking the largest canonical correlation of the feature blocks. On top of
that one coefficient sit the two decomposition moves of the structure
learner: splitting variables into independent groups (connected components
of the thresholded dependency graph) and conditioning rows into clusters
(k-means on the concatenated features).

All randomness flows through :class:`~mspn.numerics.SeedScope`, keyed by
(seed, recursion path, purpose, variable), so results are reproducible
and symmetric in the variable pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, copula_transform, one_hot
from .errors import DomainError
from .numerics import SeedScope, SineProjection, cca_max_correlation, kmeans

# purpose tags for seed streams; never reuse values across purposes
_SPLIT_TAG = 1
_CLUSTER_TAG = 2
_KMEANS_TAG = 3


@dataclass(frozen=True)
class DependencyGraph:
    """Thresholded pairwise-dependence graph over variable indices."""

    n_vars: int
    threshold: float
    edges: tuple[tuple[int, int, float], ...]  # (i, j, score) with i < j

    def components(self) -> tuple[tuple[int, ...], ...]:
        adjacency: list[list[int]] = [[] for _ in range(self.n_vars)]
        for i, j, _ in self.edges:
            adjacency[i].append(j)
            adjacency[j].append(i)
        seen = [False] * self.n_vars
        groups = []
        for start in range(self.n_vars):
            if seen[start]:
                continue
            stack = [start]
            seen[start] = True
            comp = []
            while stack:
                v = stack.pop()
                comp.append(v)
                for w in adjacency[v]:
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
            groups.append(tuple(sorted(comp)))
        return tuple(groups)


@dataclass(frozen=True)
class FeaturePartition:
    """Disjoint variable groups covering the whole scope."""

    groups: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class SamplePartition:
    """Disjoint row-index clusters covering all rows, with proportions."""

    clusters: tuple[np.ndarray, ...]
    proportions: np.ndarray


def _variable_features(dataset: Dataset, v: int, config, seeds: SeedScope,
                       tag: int) -> np.ndarray:
    """Rank-transform variable ``v`` and project it through sine features.

    Categorical variables are one-hot expanded first and each indicator
    column is rank-transformed on its own, giving a multivariate block.
    """
    st = dataset.schema.stat_type(v)
    col = dataset.column(v)
    if st.is_categorical:
        indicators = one_hot(col, st.arity)
        ranks = np.column_stack(
            [copula_transform(indicators[:, c]) for c in range(indicators.shape[1])]
        )
    else:
        ranks = copula_transform(col)[:, None]
    proj = SineProjection.draw(
        seeds.rng(tag, v), ranks.shape[1], config.proj_features, config.proj_scale
    )
    return proj.transform(ranks)


def _is_constant(dataset: Dataset, v: int) -> bool:
    col = dataset.column(v)
    return bool(np.all(col == col[0]))


def rdc(dataset: Dataset, i: int, j: int, config, seeds: SeedScope | None = None) -> float:
    """Randomized dependence coefficient between variables ``i`` and ``j``.

    Symmetric and deterministic given the seed scope; invariant under
    strictly increasing transformations of either variable because only
    ranks enter the feature maps. Constant columns score exactly 0.
    """
    if i == j:
        raise DomainError("rdc needs two distinct variables")
    if not (0 <= i < dataset.n_cols and 0 <= j < dataset.n_cols):
        raise DomainError("variable index out of range")
    if _is_constant(dataset, i) or _is_constant(dataset, j):
        return 0.0
    if seeds is None:
        seeds = SeedScope(config.seed)
    a, b = min(i, j), max(i, j)
    feats_a = _variable_features(dataset, a, config, seeds, _SPLIT_TAG)
    feats_b = _variable_features(dataset, b, config, seeds, _SPLIT_TAG)
    return cca_max_correlation(feats_a, feats_b)


def dependency_graph(dataset: Dataset, threshold: float, config,
                     seeds: SeedScope | None = None) -> DependencyGraph:
    """All-pairs dependence scores, keeping edges strictly above ``threshold``."""
    if seeds is None:
        seeds = SeedScope(config.seed)
    n = dataset.n_cols
    constant = [_is_constant(dataset, v) for v in range(n)]
    feats = [
        None if constant[v]
        else _variable_features(dataset, v, config, seeds, _SPLIT_TAG)
        for v in range(n)
    ]
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if constant[i] or constant[j]:
                continue
            score = cca_max_correlation(feats[i], feats[j])
            if score > threshold:
                edges.append((i, j, score))
    return DependencyGraph(n, threshold, tuple(edges))


def split_features(dataset: Dataset, threshold: float, config,
                   seeds: SeedScope | None = None) -> FeaturePartition:
    """Partition variables into the connected components of the dependency graph.

    A single returned group means no independence split exists at this
    threshold; the caller decides what to do with that.
    """
    if dataset.n_cols < 2:
        raise DomainError("feature splitting needs at least two variables")
    graph = dependency_graph(dataset, threshold, config, seeds)
    return FeaturePartition(graph.components())


def cluster_samples(dataset: Dataset, config, seeds: SeedScope | None = None) -> SamplePartition:
    """Split rows into (up to) two clusters in the shared sine-feature space.

    Every variable is rank-transformed and projected with its own feature
    map, the blocks are concatenated, and k-means with k=2 runs on the
    result. Empty clusters are dropped, so degenerate data (for example
    all-identical rows) comes back as a single cluster.
    """
    if seeds is None:
        seeds = SeedScope(config.seed)
    blocks = [
        _variable_features(dataset, v, config, seeds, _CLUSTER_TAG)
        for v in range(dataset.n_cols)
    ]
    embedded = np.hstack(blocks)
    labels = kmeans(
        embedded, 2, seeds.rng(_KMEANS_TAG), config.kmeans_max_iter, config.kmeans_tol
    )
    clusters = []
    for label in range(int(labels.max()) + 1):
        rows = np.flatnonzero(labels == label)
        if rows.size:
            clusters.append(rows)
    sizes = np.array([c.size for c in clusters], dtype=np.float64)
    return SamplePartition(tuple(clusters), sizes / dataset.n_rows)
