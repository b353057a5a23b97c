"""Univariate leaf distributions.

Two nonparametric families cover all column kinds:

* :class:`HistogramLeaf` -- adaptive irregular-bin histograms for
  continuous columns, integer-aligned unit bins for discrete columns,
  per-category masses for categorical columns, all Laplace-smoothed.
* :class:`PiecewiseLinearLeaf` -- unimodal piecewise-linear densities
  obtained by isotonic regression on the smoothed histogram, for
  continuous and discrete columns.

Leaves are immutable after fitting; evaluation and sampling never
mutate them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import CATEGORICAL, CONTINUOUS, DISCRETE, StatType
from .errors import DomainError, EmptyInputError
from .numerics import adaptive_bin_edges, fit_monotone, trapezoid

# integer ranges wider than this fall back to the adaptive binning search
# rather than materializing one unit bin per integer
MAX_UNIT_BINS = 2048


def _readonly(a) -> np.ndarray:
    out = np.asarray(a, dtype=np.float64).copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class HistogramLeaf:
    """Binned density/mass function over one variable.

    For ``domain == "categorical"`` the bins are unit intervals over the
    codes ``0..arity``, ``masses[c]`` is the smoothed probability of code
    ``c``, and ``unseen_mass`` is returned for any out-of-vocabulary code.
    """

    variable: int
    domain: str
    edges: np.ndarray = field(repr=False)
    masses: np.ndarray = field(repr=False)
    smoothing: float = 0.0
    unseen_mass: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "edges", _readonly(self.edges))
        object.__setattr__(self, "masses", _readonly(self.masses))
        if self.domain not in (CONTINUOUS, DISCRETE, CATEGORICAL):
            raise DomainError(f"unknown leaf domain {self.domain!r}")
        if self.edges.ndim != 1 or self.masses.ndim != 1:
            raise DomainError("edges and masses must be 1-d")
        if self.edges.size != self.masses.size + 1 or self.masses.size < 1:
            raise DomainError("need B+1 edges for B >= 1 masses")
        if np.any(np.diff(self.edges) <= 0):
            raise DomainError("bin edges must be strictly increasing")
        if np.any(self.masses < 0) or abs(float(self.masses.sum()) - 1.0) > 1e-12:
            raise DomainError("masses must be a probability vector")
        if self.smoothing < 0 or self.unseen_mass < 0:
            raise DomainError("smoothing and unseen mass must be nonnegative")

    @property
    def scope(self) -> tuple[int, ...]:
        return (self.variable,)

    @property
    def n_bins(self) -> int:
        return self.masses.size


@dataclass(frozen=True)
class PiecewiseLinearLeaf:
    """Unimodal piecewise-linear density over one variable.

    ``knots_y`` rises (weakly) up to ``mode_index`` and falls after it;
    the trapezoid integral over the knot range is 1. For a discrete
    variable the interior knots sit on the integers of the observed
    range and interpolated values act as (approximately normalized)
    point masses.
    """

    variable: int
    domain: str
    knots_x: np.ndarray = field(repr=False)
    knots_y: np.ndarray = field(repr=False)
    mode_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "knots_x", _readonly(self.knots_x))
        object.__setattr__(self, "knots_y", _readonly(self.knots_y))
        if self.domain not in (CONTINUOUS, DISCRETE):
            raise DomainError("piecewise-linear leaves are continuous or discrete only")
        x, y = self.knots_x, self.knots_y
        if x.ndim != 1 or x.shape != y.shape or x.size < 2:
            raise DomainError("need matching 1-d knot vectors with >= 2 knots")
        if np.any(np.diff(x) <= 0):
            raise DomainError("knots_x must be strictly increasing")
        if np.any(y < 0):
            raise DomainError("knot densities must be nonnegative")
        m = self.mode_index
        if not 0 <= m < x.size:
            raise DomainError("mode_index out of range")
        if np.any(np.diff(y[: m + 1]) < 0) or np.any(np.diff(y[m:]) > 0):
            raise DomainError("knot densities must be unimodal around mode_index")
        if abs(trapezoid(y, x) - 1.0) > 1e-9:
            raise DomainError("piecewise-linear density must integrate to 1")

    @property
    def scope(self) -> tuple[int, ...]:
        return (self.variable,)


Leaf = HistogramLeaf | PiecewiseLinearLeaf


def _unit_bin_edges(lo: int, hi: int) -> np.ndarray:
    # one width-1 bin centred on every integer in [lo, hi]
    return np.arange(lo, hi + 2, dtype=np.float64) - 0.5


def _continuous_edges(values: np.ndarray, smoothing: float) -> np.ndarray:
    uniq = np.unique(values)
    if uniq.size == 1:
        edges = np.array([uniq[0] - 0.5, uniq[0] + 0.5])
    else:
        edges = adaptive_bin_edges(values)
    if smoothing > 0:
        # widen the outermost bins so nearby unseen values keep mass
        half_mean = 0.5 * (edges[-1] - edges[0]) / (edges.size - 1)
        edges = edges.copy()
        edges[0] -= half_mean
        edges[-1] += half_mean
    return edges


def _discrete_edges(values: np.ndarray, smoothing: float) -> np.ndarray:
    lo = int(values.min())
    hi = int(values.max())
    if smoothing > 0:
        # cover one extra integer on each side for unseen neighbours
        lo -= 1
        hi += 1
    if hi - lo + 1 > MAX_UNIT_BINS:
        return _continuous_edges(values, smoothing)
    return _unit_bin_edges(lo, hi)


def fit_histogram(column, stat_type: StatType, smoothing: float = 1.0,
                  variable: int = 0) -> HistogramLeaf:
    """Fit a Laplace-smoothed histogram to one column.

    Continuous columns get irregular edges from the penalized-likelihood
    binning search; discrete columns get unit bins centred on each integer
    of the observed range; categorical columns get one bin per category.
    ``smoothing`` pseudo-counts are added per bin before normalizing, and
    (when positive) the support is extended so values just outside the
    observed range keep nonzero mass.
    """
    col = np.asarray(column, dtype=np.float64).ravel()
    if col.size == 0:
        raise EmptyInputError("cannot fit a leaf to an empty column")
    if smoothing < 0:
        raise DomainError("smoothing must be nonnegative")
    m = col.size

    if stat_type.is_categorical:
        arity = stat_type.arity
        if arity is None:
            raise DomainError("categorical column has no frozen vocabulary")
        codes = np.rint(col).astype(np.int64)
        if np.any(codes < 0) or np.any(codes >= arity):
            raise DomainError("categorical codes outside the vocabulary")
        counts = np.bincount(codes, minlength=arity).astype(np.float64)
        masses = (counts + smoothing) / (m + smoothing * arity)
        unseen = smoothing / (m + smoothing * (arity + 1)) if smoothing > 0 else 0.0
        return HistogramLeaf(variable, CATEGORICAL, np.arange(arity + 1, dtype=np.float64),
                             masses, smoothing, unseen)

    if stat_type.is_discrete:
        if np.any(col != np.rint(col)):
            raise DomainError("discrete column must be integer valued")
        edges = _discrete_edges(col, smoothing)
    else:
        edges = _continuous_edges(col, smoothing)

    counts, _ = np.histogram(col, bins=edges)
    n_bins = edges.size - 1
    masses = (counts.astype(np.float64) + smoothing) / (m + smoothing * n_bins)
    return HistogramLeaf(variable, stat_type.kind, edges, masses, smoothing)


def fit_isotonic_pwl(column, stat_type: StatType, smoothing: float = 1.0,
                     variable: int = 0) -> PiecewiseLinearLeaf:
    """Fit a unimodal piecewise-linear density to one column.

    Fits the smoothed histogram first, takes the highest-density bin
    center as the mode, pools the bin densities into a nondecreasing fit
    left of the mode and a nonincreasing fit right of it (weighted by bin
    widths), then interpolates through the bin centers with zero-density
    endpoints at the support edges and renormalizes.
    """
    if stat_type.is_categorical:
        raise DomainError("categorical columns use histogram leaves")
    hist = fit_histogram(column, stat_type, smoothing, variable)
    edges, masses = hist.edges, hist.masses
    widths = np.diff(edges)
    centers = 0.5 * (edges[:-1] + edges[1:])
    density = masses / widths

    mode_bin = int(np.argmax(density))
    left = fit_monotone(density[: mode_bin + 1], widths[: mode_bin + 1], "increasing")
    right = fit_monotone(density[mode_bin:], widths[mode_bin:], "decreasing")
    fitted = np.concatenate([left, right[1:]])

    knots_x = np.concatenate(([edges[0]], centers, [edges[-1]]))
    knots_y = np.concatenate(([0.0], fitted, [0.0]))
    knots_y = knots_y / trapezoid(knots_y, knots_x)
    return PiecewiseLinearLeaf(variable, stat_type.kind, knots_x, knots_y, mode_bin + 1)


def leaf_density_batch(leaf: Leaf, values: np.ndarray) -> np.ndarray:
    """Vectorized density (mass for discrete/categorical) at ``values``."""
    v = np.asarray(values, dtype=np.float64)
    if isinstance(leaf, PiecewiseLinearLeaf):
        return np.interp(v, leaf.knots_x, leaf.knots_y, left=0.0, right=0.0)
    if leaf.domain == CATEGORICAL:
        codes = np.rint(v).astype(np.int64)
        known = (codes >= 0) & (codes < leaf.n_bins)
        out = np.full(v.shape, leaf.unseen_mass)
        out[known] = leaf.masses[codes[known]]
        return out
    edges, masses = leaf.edges, leaf.masses
    idx = np.searchsorted(edges, v, side="right") - 1
    idx = np.clip(idx, 0, masses.size - 1)
    inside = (v >= edges[0]) & (v <= edges[-1])
    if leaf.domain == DISCRETE:
        # bins wider than one integer (the wide-range fallback) spread
        # their mass uniformly over the integers they contain
        span = np.maximum(np.rint(edges[idx + 1] - edges[idx]), 1.0)
        dens = masses[idx] / span
    else:
        dens = masses[idx] / (edges[idx + 1] - edges[idx])
    return np.where(inside, dens, 0.0)


def leaf_density(leaf: Leaf, value: float) -> float:
    return float(leaf_density_batch(leaf, np.asarray([value]))[0])


def leaf_mode(leaf: Leaf) -> float:
    """Highest-mass value, ties broken toward the smallest value."""
    if isinstance(leaf, PiecewiseLinearLeaf):
        return float(leaf.knots_x[leaf.mode_index])
    if leaf.domain == CATEGORICAL:
        return float(np.argmax(leaf.masses))
    b = int(np.argmax(leaf.masses))
    center = 0.5 * (leaf.edges[b] + leaf.edges[b + 1])
    if leaf.domain == DISCRETE:
        return float(np.rint(center))
    return float(center)


def leaf_support(leaf: Leaf) -> tuple[float, float]:
    if isinstance(leaf, PiecewiseLinearLeaf):
        return float(leaf.knots_x[0]), float(leaf.knots_x[-1])
    if leaf.domain == CATEGORICAL:
        return 0.0, float(leaf.n_bins - 1)
    return float(leaf.edges[0]), float(leaf.edges[-1])


def _discrete_support_values(leaf: Leaf) -> np.ndarray:
    lo, hi = leaf_support(leaf)
    return np.arange(math.ceil(lo), math.floor(hi) + 1, dtype=np.float64)


def leaf_cdf(leaf: Leaf, value: float) -> float:
    """P(X <= value); within-bin/segment mass is interpolated."""
    v = float(value)
    if isinstance(leaf, PiecewiseLinearLeaf):
        x, y = leaf.knots_x, leaf.knots_y
        if v <= x[0]:
            return 0.0
        if v >= x[-1]:
            return 1.0
        seg = int(np.searchsorted(x, v, side="right")) - 1
        areas = 0.5 * (y[1:] + y[:-1]) * np.diff(x)
        acc = float(areas[:seg].sum())
        t = v - x[seg]
        slope = (y[seg + 1] - y[seg]) / (x[seg + 1] - x[seg])
        return acc + y[seg] * t + 0.5 * slope * t * t
    if leaf.domain == CATEGORICAL:
        c = int(math.floor(v))
        if c < 0:
            return 0.0
        return float(leaf.masses[: c + 1].sum())
    edges, masses = leaf.edges, leaf.masses
    if v <= edges[0]:
        return 0.0
    if v >= edges[-1]:
        return 1.0
    b = int(np.searchsorted(edges, v, side="right")) - 1
    acc = float(masses[:b].sum())
    frac = (v - edges[b]) / (edges[b + 1] - edges[b])
    return acc + float(masses[b]) * frac


def _sample_integer_in_bin(leaf: HistogramLeaf, b: int, rng: np.random.Generator) -> float:
    lo = math.ceil(leaf.edges[b])
    hi = math.floor(leaf.edges[b + 1])
    if hi <= lo:
        return float(lo)
    return float(rng.integers(lo, hi + 1))


def leaf_sample(leaf: Leaf, rng: np.random.Generator) -> float:
    """One inverse-CDF draw from the leaf."""
    if isinstance(leaf, HistogramLeaf):
        cum = np.cumsum(leaf.masses)
        b = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
        b = min(b, leaf.masses.size - 1)
        if leaf.domain == CATEGORICAL:
            return float(b)
        if leaf.domain == DISCRETE:
            return _sample_integer_in_bin(leaf, b, rng)
        return float(leaf.edges[b] + rng.random() * (leaf.edges[b + 1] - leaf.edges[b]))

    if leaf.domain == DISCRETE:
        support = _discrete_support_values(leaf)
        pmf = np.interp(support, leaf.knots_x, leaf.knots_y)
        cum = np.cumsum(pmf)
        i = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
        return float(support[min(i, support.size - 1)])

    x, y = leaf.knots_x, leaf.knots_y
    areas = 0.5 * (y[1:] + y[:-1]) * np.diff(x)
    cum = np.cumsum(areas)
    u = rng.random() * cum[-1]
    seg = int(np.searchsorted(cum, u, side="right"))
    seg = min(seg, areas.size - 1)
    rem = u - (cum[seg - 1] if seg > 0 else 0.0)
    width = x[seg + 1] - x[seg]
    slope = (y[seg + 1] - y[seg]) / width
    y0 = y[seg]
    if abs(slope) < 1e-300:
        t = rem / y0 if y0 > 0 else 0.0
    else:
        disc = max(y0 * y0 + 2.0 * slope * rem, 0.0)
        t = (math.sqrt(disc) - y0) / slope
    t = min(max(t, 0.0), width)
    return float(x[seg] + t)
