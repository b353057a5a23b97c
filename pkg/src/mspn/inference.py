"""Query answering on a learned network.

Everything here is a bottom-up traversal (plus, for MPE and sampling, one
top-down pass), so query cost is linear in the node count. All
computation happens in log space: observed continuous variables
contribute log-densities, observed discrete/categorical variables
contribute log-masses, and marginalized variables contribute log 1 = 0
at their leaves. The value of a mixed query is therefore a density with
respect to the product of Lebesgue measure (continuous coordinates) and
counting measure (the rest).

Passing a ``collections.Counter`` as ``counter`` to any query records
per-node visit counts (keyed by ``id(node)``), which is how the
at-most-two-traversals contract is asserted in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .data import CATEGORICAL, DISCRETE
from .errors import ConditioningError, QueryError
from .leaves import (
    HistogramLeaf,
    PiecewiseLinearLeaf,
    leaf_density_batch,
    leaf_sample,
    leaf_support,
)
from .numerics import weighted_logsumexp
from .structure import Mspn, ProductNode, SumNode


@dataclass(frozen=True)
class Evidence:
    """Per-variable observation state: a value, or marginalized out.

    ``values[i]`` is only meaningful where ``observed[i]`` is True.
    """

    values: np.ndarray = field(repr=False)
    observed: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).copy()
        o = np.asarray(self.observed, dtype=bool).copy()
        if v.ndim != 1 or v.shape != o.shape:
            raise QueryError("evidence needs matching 1-d value and mask vectors")
        v.setflags(write=False)
        o.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "observed", o)

    @classmethod
    def marginalized(cls, n_vars: int) -> "Evidence":
        return cls(np.zeros(n_vars), np.zeros(n_vars, dtype=bool))

    @classmethod
    def observe(cls, schema: Schema, assignments: Mapping[str, object]) -> "Evidence":
        """Build evidence from a {column name: value} mapping.

        Categorical values may be given as labels (strings) or codes;
        everything else parses as a number.
        """
        values = np.zeros(len(schema))
        observed = np.zeros(len(schema), dtype=bool)
        for name, raw in assignments.items():
            i = schema.index(name)
            st = schema.stat_type(i)
            if st.is_categorical and isinstance(raw, str):
                cats = st.categories or ()
                if raw not in cats:
                    raise QueryError(f"unknown category {raw!r} for column {name!r}")
                values[i] = float(cats.index(raw))
            else:
                try:
                    values[i] = float(raw)  # type: ignore[arg-type]
                except (TypeError, ValueError):
                    raise QueryError(
                        f"cannot parse {raw!r} as a value for column {name!r}"
                    ) from None
            observed[i] = True
        return cls(values, observed)

    def merged(self, other: "Evidence") -> "Evidence":
        if self.observed.shape != other.observed.shape:
            raise QueryError("evidence vectors cover different variable counts")
        if np.any(self.observed & other.observed):
            raise QueryError("evidence sets overlap")
        values = np.where(other.observed, other.values, self.values)
        return Evidence(values, self.observed | other.observed)

    @property
    def n_vars(self) -> int:
        return self.values.shape[0]


def _check_evidence(mspn: Mspn, evidence: Evidence) -> None:
    if evidence.n_vars != mspn.n_vars:
        raise QueryError(
            f"evidence covers {evidence.n_vars} variables, model has {mspn.n_vars}"
        )
    for i in np.flatnonzero(evidence.observed):
        st = mspn.schema.stat_type(int(i))
        v = evidence.values[i]
        name = mspn.schema.names[int(i)]
        if not np.isfinite(v):
            raise QueryError(f"observed value for {name!r} is not finite")
        if st.is_continuous:
            continue
        if v != np.rint(v):
            raise QueryError(f"observed value for {name!r} must be an integer")
        if st.is_categorical and v < 0:
            raise QueryError(f"negative category code for {name!r}")


def _bump(counter, node) -> None:
    if counter is not None:
        counter[id(node)] += 1


def _eval(node, values: np.ndarray, observed: np.ndarray,
          counter, cache) -> np.ndarray:
    """One bottom-up pass over the tree; returns per-row log values."""
    _bump(counter, node)
    if isinstance(node, SumNode):
        child_vals = np.stack(
            [_eval(c, values, observed, counter, cache) for c in node.children]
        )
        out = weighted_logsumexp(child_vals, node.weights)
    elif isinstance(node, ProductNode):
        out = np.zeros(values.shape[0])
        for c in node.children:
            out = out + _eval(c, values, observed, counter, cache)
    else:
        var = node.variable
        if observed[var]:
            with np.errstate(divide="ignore"):
                out = np.log(leaf_density_batch(node, values[:, var]))
        else:
            out = np.zeros(values.shape[0])
    if cache is not None:
        cache[id(node)] = out
    return out


def log_evaluate_batch(mspn: Mspn, values: np.ndarray, observed: np.ndarray) -> np.ndarray:
    """Log value of many queries sharing one observation mask.

    ``values`` is (rows, n_vars); ``observed`` is a single (n_vars,) bool
    mask applied to every row. No per-row validation happens here; the
    caller owns that.
    """
    values = np.asarray(values, dtype=np.float64)
    observed = np.asarray(observed, dtype=bool)
    return _eval(mspn.root, values, observed, None, None)


def log_evaluate(mspn: Mspn, evidence: Evidence, counter=None) -> float:
    """Log of the (mixed density/mass) value of the evidence.

    Marginalized variables integrate out, so all-marginalized evidence
    returns exactly 0 for a valid model.
    """
    _check_evidence(mspn, evidence)
    out = _eval(
        mspn.root, evidence.values[None, :], evidence.observed, counter, None
    )
    return float(out[0])


def log_conditional(mspn: Mspn, query: Evidence, given: Evidence, counter=None) -> float:
    """log p(query | given) as a difference of two evaluations."""
    if np.any(query.observed & given.observed):
        raise QueryError("query and given evidence must observe disjoint variables")
    denom = log_evaluate(mspn, given, counter)
    if denom == -np.inf:
        raise ConditioningError("conditioning evidence has zero probability")
    num = log_evaluate(mspn, query.merged(given), counter)
    return num - denom


def _mixture_terms(node, var, values, observed, counter) -> list:
    """Flatten a one-free-variable subtree into (log coefficient, leaf) terms.

    The subtree's value as a function of the free variable ``var`` is
    sum over terms of coefficient × leaf density; coefficients absorb sum
    weights and the exact mixture values of fully observed siblings.
    """
    _bump(counter, node)
    if isinstance(node, SumNode):
        with np.errstate(divide="ignore"):
            log_w = np.log(node.weights)
        terms = []
        for lw, child in zip(log_w, node.children):
            terms.extend(
                (float(lw) + t, leaf)
                for t, leaf in _mixture_terms(child, var, values, observed, counter)
            )
        return terms
    if isinstance(node, ProductNode):
        offset = 0.0
        spine = None
        for child in node.children:
            if var in child.scope:
                spine = child
            else:  # fully observed factor: a scalar under this evidence
                offset += float(_eval(child, values, observed, counter, None)[0])
        return [
            (offset + t, leaf)
            for t, leaf in _mixture_terms(spine, var, values, observed, counter)
        ]
    return [(0.0, node)]


def _free_candidates(terms) -> np.ndarray:
    """Points that cover every possible maximum of a 1-d leaf mixture.

    A sum of piecewise-linear densities is piecewise linear between the
    union of the knots, so its maximum sits on a knot; a sum of histogram
    densities is piecewise constant between the union of the edges, so
    evaluating the midpoints of that union partition is exact. Discrete
    and categorical variables enumerate their whole (integer) support.
    """
    leaves = [leaf for _, leaf in terms]
    domain = leaves[0].domain
    if domain == CATEGORICAL:
        arity = max(leaf.n_bins for leaf in leaves)
        return np.arange(arity, dtype=np.float64)
    if domain == DISCRETE:
        lo = min(leaf_support(leaf)[0] for leaf in leaves)
        hi = max(leaf_support(leaf)[1] for leaf in leaves)
        return np.arange(np.ceil(lo), np.floor(hi) + 1.0)
    parts = []
    edges = [leaf.edges for leaf in leaves if isinstance(leaf, HistogramLeaf)]
    for leaf in leaves:
        if isinstance(leaf, PiecewiseLinearLeaf):
            parts.append(leaf.knots_x)
    if edges:
        merged = np.unique(np.concatenate(edges))
        parts.append(merged)
        parts.append(0.5 * (merged[1:] + merged[:-1]))
    return np.unique(np.concatenate(parts))


def _reduce_free_subtree(node, var, values, observed, counter) -> tuple[float, float]:
    """Exact maximizer and log maximum of a single-free-variable subtree."""
    terms = _mixture_terms(node, var, values, observed, counter)
    candidates = _free_candidates(terms)
    total = np.full(candidates.shape, -np.inf)
    for log_w, leaf in terms:
        _bump(counter, leaf)
        with np.errstate(divide="ignore"):
            total = np.logaddexp(total, log_w + np.log(leaf_density_batch(leaf, candidates)))
    best = int(np.argmax(total))
    return float(candidates[best]), float(total[best])


def _mpe_pass(node, values, observed, counter, decisions) -> float:
    """Bottom-up maximization pass; records completion decisions by node id."""
    free = [v for v in node.scope if not observed[v]]
    if not free:
        # nothing to complete below here: score the exact mixture value
        return float(_eval(node, values, observed, counter, None)[0])
    if len(free) == 1:
        x, log_f = _reduce_free_subtree(node, free[0], values, observed, counter)
        decisions[id(node)] = ("assign", free[0], x)
        return log_f
    _bump(counter, node)
    if isinstance(node, SumNode):
        with np.errstate(divide="ignore"):
            scores = [
                float(np.log(w)) + _mpe_pass(c, values, observed, counter, decisions)
                for w, c in zip(node.weights, node.children)
            ]
        branch = int(np.argmax(scores))
        decisions[id(node)] = ("branch", branch)
        return scores[branch]
    decisions[id(node)] = ("descend",)
    return sum(
        _mpe_pass(c, values, observed, counter, decisions) for c in node.children
    )


def mpe(mspn: Mspn, evidence: Evidence, counter=None) -> tuple[np.ndarray, float]:
    """Most probable completion of the evidence.

    One bottom-up maximization pass and one top-down selection pass. Sum
    nodes with two or more free variables in scope follow their
    maximizing child (ties to the lowest index); a maximal subtree with
    exactly one free variable is reduced exactly — under the evidence it
    is a 1-d mixture whose density is piecewise linear (or a finite
    table), so the true maximizer is found on the union of the leaves'
    knots, bin midpoints, integers, or category codes (ties to the
    smallest value). Fully observed subtrees contribute their exact
    mixture value. The returned log value scores the completed
    assignment with a standard evaluation query, so for fully observed
    evidence it equals ``log_evaluate(evidence)``.
    """
    _check_evidence(mspn, evidence)
    decisions: dict[int, tuple] = {}
    _mpe_pass(mspn.root, evidence.values[None, :], evidence.observed, counter, decisions)

    assignment = evidence.values.copy()
    stack = [mspn.root]
    while stack:
        node = stack.pop()
        decision = decisions.get(id(node))
        if decision is None:  # fully observed subtree: nothing to fill in
            continue
        if decision[0] == "assign":
            assignment[decision[1]] = decision[2]
        elif decision[0] == "branch":
            _bump(counter, node)
            stack.append(node.children[decision[1]])
        else:
            _bump(counter, node)
            stack.extend(node.children)

    value = log_evaluate(mspn, Evidence(assignment, np.ones(mspn.n_vars, dtype=bool)))
    return assignment, value


def sample(mspn: Mspn, evidence: Evidence, rng: np.random.Generator,
           counter=None) -> np.ndarray:
    """Draw one assignment from the model conditioned on the evidence.

    Bottom-up evaluation under the evidence, then a top-down descent that
    picks a child at each Sum with probability proportional to weight
    times the child's evaluated value, descends every child of a Product,
    samples unobserved leaves, and copies observed values through.
    """
    _check_evidence(mspn, evidence)
    cache: dict[int, np.ndarray] = {}
    root_val = _eval(
        mspn.root, evidence.values[None, :], evidence.observed, counter, cache
    )
    if float(root_val[0]) == -np.inf:
        raise ConditioningError("evidence has zero probability; cannot sample")

    assignment = evidence.values.copy()
    stack = [mspn.root]
    while stack:
        node = stack.pop()
        _bump(counter, node)
        if isinstance(node, SumNode):
            logits = np.array([float(cache[id(c)][0]) for c in node.children])
            top = logits.max()
            probs = node.weights * np.exp(logits - top)
            cum = np.cumsum(probs)
            pick = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
            stack.append(node.children[min(pick, len(node.children) - 1)])
        elif isinstance(node, ProductNode):
            # reversed so children are visited (and consume randomness)
            # in their natural left-to-right order
            stack.extend(reversed(node.children))
        else:
            if not evidence.observed[node.variable]:
                assignment[node.variable] = leaf_sample(node, rng)
    return assignment
