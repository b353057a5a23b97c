"""Information-theoretic summaries of a learned network.

Pairwise mutual information is computed by deterministic grid quadrature
over the model's own pairwise marginals: continuous variables get a
midpoint grid over the union of their leaves' supports, discrete and
categorical variables are enumerated exactly. Marginals come from summing
the same gridded joint, which keeps every MI nonnegative and makes
model-independent pairs score exactly zero.

Normalized MI divides by the geometric mean of the two grid entropies
(differential entropy for continuous variables) and clamps to [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, QueryError
from .leaves import HistogramLeaf, PiecewiseLinearLeaf, leaf_support
from .inference import log_evaluate_batch
from .structure import Mspn, iter_nodes

DEFAULT_GRID_SIZE = 256
DEFAULT_EDGE_THRESHOLD = 0.01


def _variable_grid(mspn: Mspn, var: int, grid_size: int) -> tuple[np.ndarray, np.ndarray]:
    """Evaluation points and cell measures for one variable.

    Continuous: ``grid_size`` midpoint cells over the union of leaf
    supports. Discrete: every integer of the united support. Categorical:
    every category code. The second array holds the quadrature measure of
    each point (cell width, or 1 for counting measure).
    """
    st = mspn.schema.stat_type(var)
    if st.is_categorical:
        points = np.arange(st.arity, dtype=np.float64)
        return points, np.ones_like(points)

    lo = math.inf
    hi = -math.inf
    for _, node in iter_nodes(mspn.root):
        if isinstance(node, (HistogramLeaf, PiecewiseLinearLeaf)) and node.variable == var:
            a, b = leaf_support(node)
            lo = min(lo, a)
            hi = max(hi, b)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise QueryError(f"no leaf covers variable {var}")

    if st.is_discrete:
        points = np.arange(math.ceil(lo), math.floor(hi) + 1, dtype=np.float64)
        return points, np.ones_like(points)

    width = (hi - lo) / grid_size
    points = lo + (np.arange(grid_size, dtype=np.float64) + 0.5) * width
    return points, np.full(grid_size, width)


def _grid_joint(mspn: Mspn, a: int, b: int, grid_size: int):
    """Normalized joint probability table of a variable pair on the grid."""
    pa, wa = _variable_grid(mspn, a, grid_size)
    pb, wb = _variable_grid(mspn, b, grid_size)
    ga, gb = pa.size, pb.size

    values = np.zeros((ga * gb, mspn.n_vars))
    values[:, a] = np.repeat(pa, gb)
    values[:, b] = np.tile(pb, ga)
    observed = np.zeros(mspn.n_vars, dtype=bool)
    observed[a] = observed[b] = True

    log_vals = log_evaluate_batch(mspn, values, observed)
    cell_mass = np.exp(log_vals).reshape(ga, gb) * np.outer(wa, wb)
    total = float(cell_mass.sum())
    if total <= 0.0:
        raise QueryError("pairwise marginal has zero total mass on the grid")
    return cell_mass / total, wa, wb


def _entropy(p: np.ndarray, measure: np.ndarray, continuous: bool) -> float:
    live = p > 0
    if continuous:
        # differential entropy: densities are cell mass / cell width
        return float(-(p[live] * (np.log(p[live]) - np.log(measure[live]))).sum())
    return float(-(p[live] * np.log(p[live])).sum())


def _mi_pair(mspn: Mspn, i: int, j: int, grid_size: int) -> tuple[float, float]:
    a, b = (i, j) if i < j else (j, i)
    joint, wa, wb = _grid_joint(mspn, a, b, grid_size)
    pa = joint.sum(axis=1)
    pb = joint.sum(axis=0)

    outer = np.outer(pa, pb)
    live = joint > 0
    mi = float((joint[live] * (np.log(joint[live]) - np.log(outer[live]))).sum())

    ha = _entropy(pa, wa, mspn.schema.stat_type(a).is_continuous)
    hb = _entropy(pb, wb, mspn.schema.stat_type(b).is_continuous)
    denom = ha * hb
    if denom <= 0.0:
        nmi = 0.0
    else:
        nmi = min(max(mi / math.sqrt(denom), 0.0), 1.0)
    return mi, nmi


def mutual_information(mspn: Mspn, i: int, j: int,
                       grid_size: int = DEFAULT_GRID_SIZE) -> tuple[float, float]:
    """Mutual information (nats) and normalized MI of a variable pair.

    Symmetric bit-exactly in (i, j): the pair is canonicalized before any
    computation. Marginals are read off the gridded joint itself, so a
    pair separated by a Product node scores exactly zero.
    """
    if i == j:
        raise DomainError("mutual information needs two distinct variables")
    if not (0 <= i < mspn.n_vars and 0 <= j < mspn.n_vars):
        raise DomainError("variable index out of range")
    if grid_size < 2:
        raise DomainError("grid_size must be at least 2")
    return _mi_pair(mspn, i, j, grid_size)


def _variable_entropy(mspn: Mspn, var: int, grid_size: int) -> float:
    points, measure = _variable_grid(mspn, var, grid_size)
    values = np.zeros((points.size, mspn.n_vars))
    values[:, var] = points
    observed = np.zeros(mspn.n_vars, dtype=bool)
    observed[var] = True
    mass = np.exp(log_evaluate_batch(mspn, values, observed)) * measure
    total = float(mass.sum())
    if total <= 0.0:
        raise QueryError(f"marginal of variable {var} has zero mass on the grid")
    return _entropy(mass / total, measure, mspn.schema.stat_type(var).is_continuous)


@dataclass(frozen=True)
class MiGraph:
    """All-pairs MI report plus the export threshold.

    ``mi`` and ``nmi`` are symmetric matrices with zero diagonals; every
    pair is retained here regardless of the threshold, which only governs
    which edges the DOT export draws.
    """

    names: tuple[str, ...]
    mi: np.ndarray = field(repr=False)
    nmi: np.ndarray = field(repr=False)
    entropies: np.ndarray = field(repr=False)
    edge_threshold: float
    grid_size: int

    def edges(self, exported_only: bool = False):
        """(i, j, mi, nmi) tuples for i < j, optionally thresholded on nmi."""
        out = []
        n = len(self.names)
        for i in range(n):
            for j in range(i + 1, n):
                if exported_only and self.nmi[i, j] < self.edge_threshold:
                    continue
                out.append((i, j, float(self.mi[i, j]), float(self.nmi[i, j])))
        return out

    def to_dot(self) -> str:
        lines = ["graph dependencies {", "  node [shape=ellipse];"]
        for name in self.names:
            lines.append(f'  "{name}";')
        for i, j, _, nmi in self.edges(exported_only=True):
            width = 0.5 + 6.0 * nmi
            lines.append(
                f'  "{self.names[i]}" -- "{self.names[j]}" '
                f'[penwidth={width:.3f}, label="{nmi:.3f}"];'
            )
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "variables": list(self.names),
            "entropies": [float(h) for h in self.entropies],
            "mi": [[float(v) for v in row] for row in self.mi],
            "nmi": [[float(v) for v in row] for row in self.nmi],
            "edge_threshold": self.edge_threshold,
            "grid_size": self.grid_size,
            "edges": [
                {
                    "i": i,
                    "j": j,
                    "names": [self.names[i], self.names[j]],
                    "mi": mi,
                    "nmi": nmi,
                }
                for i, j, mi, nmi in self.edges(exported_only=True)
            ],
        }


def mi_graph(mspn: Mspn, grid_size: int = DEFAULT_GRID_SIZE,
             edge_threshold: float = DEFAULT_EDGE_THRESHOLD) -> MiGraph:
    """Mutual information for every variable pair of the model."""
    n = mspn.n_vars
    if n < 2:
        raise DomainError("need at least two variables for a dependency graph")
    mi = np.zeros((n, n))
    nmi = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            mi[i, j], nmi[i, j] = _mi_pair(mspn, i, j, grid_size)
            mi[j, i] = mi[i, j]
            nmi[j, i] = nmi[i, j]
    entropies = np.array([_variable_entropy(mspn, v, grid_size) for v in range(n)])
    return MiGraph(mspn.schema.names, mi, nmi, entropies, edge_threshold, grid_size)
