"""Shared numeric machinery.

Seeded RNG streams, random sine feature maps, canonical correlation,
k-means, the adaptive histogram binning search, and a few small helpers
used across the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import dp_fill, lloyd, pava_nondecreasing
from .errors import DomainError, EmptyInputError

MAX_CANDIDATE_CUTS = 100
CCA_RIDGE = 1e-6


class SeedScope:
    """Deterministic per-node randomness derived from one integer seed.

    A scope is the pair (seed, path), where the path records child indices
    down the tree being built. ``rng(*tags)`` opens an independent stream
    keyed by the scope plus integer tags, so every (node, purpose, variable)
    combination draws from its own reproducible stream regardless of call
    order. The path length is folded in so that distinct scopes can never
    alias through tag values.
    """

    __slots__ = ("seed", "path")

    def __init__(self, seed: int, path: tuple[int, ...] = ()):
        self.seed = int(seed)
        self.path = tuple(int(p) for p in path)

    def child(self, index: int) -> "SeedScope":
        return SeedScope(self.seed, self.path + (int(index),))

    def rng(self, *tags: int) -> np.random.Generator:
        entropy = (self.seed, len(self.path)) + self.path + tuple(int(t) for t in tags)
        return np.random.default_rng(np.random.SeedSequence(entropy))


@dataclass(frozen=True)
class SineProjection:
    """Random feature map ``x -> sin(W x + b)``.

    Weight and offset entries are drawn iid from a zero-mean normal with
    variance ``scale``, giving smooth nonlinear features whose inner
    products approximate a shift-invariant kernel on rank-transformed
    inputs.
    """

    weights: np.ndarray  # (n_features, n_inputs)
    offsets: np.ndarray  # (n_features,)

    @classmethod
    def draw(cls, rng: np.random.Generator, n_inputs: int, n_features: int = 20,
             scale: float = 1.0 / 6.0) -> "SineProjection":
        if n_inputs < 1 or n_features < 1:
            raise DomainError("projection needs at least one input and one feature")
        std = math.sqrt(scale)
        weights = rng.normal(0.0, std, size=(n_features, n_inputs))
        offsets = rng.normal(0.0, std, size=n_features)
        return cls(weights, offsets)

    @property
    def n_features(self) -> int:
        return self.weights.shape[0]

    def transform(self, data: np.ndarray) -> np.ndarray:
        data = np.asarray(data, dtype=np.float64)
        if data.ndim == 1:
            data = data[:, None]
        if data.shape[1] != self.weights.shape[1]:
            raise DomainError(
                f"projection expects {self.weights.shape[1]} inputs, got {data.shape[1]}"
            )
        return np.sin(data @ self.weights.T + self.offsets)


def cca_max_correlation(a: np.ndarray, b: np.ndarray, ridge: float = CCA_RIDGE) -> float:
    """Largest canonical correlation between feature blocks ``a`` and ``b``.

    Solves the generalized eigenproblem on ridge-regularized covariance
    blocks via a symmetric whitening, so the result is clamped to [0, 1]
    and degenerate (constant) blocks yield 0 rather than an error.
    """
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    m = a.shape[0]
    if b.shape[0] != m:
        raise DomainError("feature blocks must have the same number of rows")
    if m < 2:
        raise DomainError("canonical correlation needs at least two rows")
    a = a - a.mean(axis=0)
    b = b - b.mean(axis=0)
    # standardize columns (constant columns stay zero) so the ridge acts on
    # a correlation matrix: the result is then invariant under positive
    # per-column affine maps of either block, and every eigenvalue of the
    # regularized blocks is at least ``ridge``
    sa = np.sqrt((a * a).sum(axis=0) / (m - 1))
    sb = np.sqrt((b * b).sum(axis=0) / (m - 1))
    a = a / np.where(sa > 0.0, sa, 1.0)
    b = b / np.where(sb > 0.0, sb, 1.0)
    saa = a.T @ a / (m - 1) + ridge * np.eye(a.shape[1])
    sbb = b.T @ b / (m - 1) + ridge * np.eye(b.shape[1])
    sab = a.T @ b / (m - 1)
    evals, evecs = np.linalg.eigh(saa)
    inv_sqrt = evecs @ ((1.0 / np.sqrt(evals))[:, None] * evecs.T)
    mid = inv_sqrt @ sab @ np.linalg.solve(sbb, sab.T) @ inv_sqrt
    mid = 0.5 * (mid + mid.T)
    lam = np.linalg.eigvalsh(mid)
    return float(np.sqrt(np.clip(lam[-1], 0.0, 1.0)))


def kmeans(points: np.ndarray, n_clusters: int, rng: np.random.Generator,
           max_iter: int = 100, tol: float = 1e-4) -> np.ndarray:
    """Cluster rows of ``points`` by Lloyd iteration with ++-style seeding.

    Returns integer labels in [0, k). Requesting more clusters than rows
    caps k at the row count; clusters can come back empty, in which case
    their label simply never appears.
    """
    pts = np.ascontiguousarray(np.asarray(points, dtype=np.float64))
    if pts.ndim == 1:
        pts = pts[:, None]
    m = pts.shape[0]
    if m == 0:
        raise EmptyInputError("cannot cluster zero rows")
    if n_clusters < 1:
        raise DomainError("need at least one cluster")
    k = min(n_clusters, m)

    cent = np.empty((k, pts.shape[1]))
    first = int(rng.integers(m))
    cent[0] = pts[first]
    d2 = ((pts - cent[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = float(d2.sum())
        if total > 0.0:
            u = rng.random() * total
            j = int(np.searchsorted(np.cumsum(d2), u, side="right"))
            j = min(j, m - 1)
        else:
            j = int(rng.integers(m))
        cent[c] = pts[j]
        d2 = np.minimum(d2, ((pts - pts[j]) ** 2).sum(axis=1))

    return lloyd(pts, cent, max_iter, tol)


def fit_monotone(
    values: np.ndarray,
    weights: np.ndarray,
    direction: str = "increasing",
) -> np.ndarray:
    """Weighted least-squares monotone fit of ``values``.

    ``direction`` is ``"increasing"`` (nondecreasing output) or
    ``"decreasing"``; the decreasing fit is the negated increasing fit of
    the negated input, which is exact in floating point because negation
    never rounds.
    """
    if direction == "increasing":
        return fit_nondecreasing(values, weights)
    if direction == "decreasing":
        return -fit_nondecreasing(-np.asarray(values, dtype=np.float64), weights)
    raise DomainError(f"direction must be 'increasing' or 'decreasing', got {direction!r}")


def integrate_piecewise_linear(knots_x: np.ndarray, knots_y: np.ndarray) -> float:
    """Exact integral of the piecewise-linear function through the knots.

    Validates the knot sequence (1-d, matching lengths, at least two
    knots, strictly increasing x) before applying the trapezoid rule,
    which is exact for piecewise-linear integrands.
    """
    x = np.asarray(knots_x, dtype=np.float64)
    y = np.asarray(knots_y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise DomainError("knot arrays must be 1-d and the same length")
    if x.size < 2:
        raise DomainError("need at least two knots to integrate")
    if np.any(np.diff(x) <= 0.0):
        raise DomainError("knot x positions must be strictly increasing")
    return trapezoid(y, x)


def fit_nondecreasing(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Weighted least-squares nondecreasing fit (pool adjacent violators)."""
    v = np.ascontiguousarray(values, dtype=np.float64)
    w = np.ascontiguousarray(weights, dtype=np.float64)
    if v.shape != w.shape or v.ndim != 1:
        raise DomainError("values and weights must be 1-d and the same length")
    if v.size == 0:
        raise EmptyInputError("nothing to fit")
    if np.any(w <= 0):
        raise DomainError("weights must be positive")
    return pava_nondecreasing(v, w)


def _candidate_boundaries(sorted_unique: np.ndarray) -> np.ndarray:
    lo = sorted_unique[0]
    hi = sorted_unique[-1]
    mids = 0.5 * (sorted_unique[:-1] + sorted_unique[1:])
    if mids.shape[0] > MAX_CANDIDATE_CUTS:
        idx = np.unique(
            np.round(np.linspace(0, mids.shape[0] - 1, MAX_CANDIDATE_CUTS)).astype(np.int64)
        )
        mids = mids[idx]
    return np.concatenate(([lo], mids, [hi]))


def _segment_loglik(sorted_vals: np.ndarray, bounds: np.ndarray) -> np.ndarray:
    """seg[q, p-1] = max log-likelihood of one bin from boundary q to p.

    A bin spanning (bounds[q], bounds[p]] holding n of m points at width w
    contributes n * log(n / (m * w)); empty bins contribute zero.
    """
    m = sorted_vals.shape[0]
    prefix = np.searchsorted(sorted_vals, bounds, side="right")
    prefix[0] = 0  # the first boundary equals the minimum; count it inside
    n = (prefix[None, 1:] - prefix[:-1, None]).astype(np.float64)
    w = bounds[None, 1:] - bounds[:-1, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        seg = n * (np.log(n) - math.log(m) - np.log(w))
    seg[n <= 0] = 0.0
    seg[w <= 0] = -np.inf
    return seg


def _partition_penalty(n_bins: int, n_cuts: int) -> float:
    # model cost of choosing n_bins-1 interior cuts out of n_cuts candidates,
    # plus a superlinear term that keeps bin counts modest
    comb = (
        math.lgamma(n_cuts + 1)
        - math.lgamma(n_bins)
        - math.lgamma(n_cuts - n_bins + 2)
    )
    return comb + (n_bins - 1) + math.log(n_bins) ** 2.5


def adaptive_bin_edges(values: np.ndarray) -> np.ndarray:
    """Penalized maximum-likelihood histogram edges for a 1-d sample.

    Candidate edges are the midpoints between consecutive distinct values
    (subsampled evenly by index down to ``MAX_CANDIDATE_CUTS`` when there
    are more), plus the sample extremes. A dynamic program scores every
    (cut subset, bin count) pair by the histogram log-likelihood minus a
    complexity penalty and returns the winning edge vector.
    """
    vals = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if vals.size == 0:
        raise EmptyInputError("cannot bin an empty sample")
    uniq = np.unique(vals)
    if uniq.size < 2:
        raise DomainError("need at least two distinct values to place cuts")

    bounds = _candidate_boundaries(uniq)
    seg = _segment_loglik(vals, bounds)
    f, back = dp_fill(seg)

    n_segments = bounds.shape[0] - 1
    n_cuts = bounds.shape[0] - 2
    best_j = 1
    best_score = -np.inf
    for j in range(1, n_segments + 1):
        score = f[n_segments, j] - _partition_penalty(j, n_cuts)
        if score > best_score:
            best_score = score
            best_j = j

    cut_idx = [n_segments]
    p, j = n_segments, best_j
    while j > 0:
        p = int(back[p, j])
        j -= 1
        cut_idx.append(p)
    cut_idx.reverse()
    return bounds[np.asarray(cut_idx, dtype=np.intp)]


def weighted_logsumexp(log_values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """log(sum_c w_c * exp(log_values[c])) along axis 0, safely.

    ``log_values`` has shape (C, B); returns shape (B,). Columns where every
    term is -inf come back as -inf instead of nan.
    """
    lv = np.asarray(log_values, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    top = np.max(lv, axis=0)
    out = np.full(top.shape, -np.inf)
    ok = np.isfinite(top)
    if np.any(ok):
        shifted = np.exp(lv[:, ok] - top[ok])
        out[ok] = top[ok] + np.log(w @ shifted)
    return out


def trapezoid(y: np.ndarray, x: np.ndarray) -> float:
    """Trapezoid-rule integral of samples ``y`` at nodes ``x``."""
    y = np.asarray(y, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * (x[1:] - x[:-1])))
