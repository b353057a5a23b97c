"""Shared dataset and model fixtures.

Every dataset is generated from a fixed seed so learned structures,
weights, and serialized bytes are reproducible across runs. Models are
session-scoped: learning is deterministic, so sharing them between tests
cannot leak state (all model objects are frozen/read-only).
"""

import numpy as np
import pytest

from mspn import (
    CATEGORICAL,
    CONTINUOUS,
    DISCRETE,
    Column,
    Dataset,
    LearnConfig,
    Schema,
    StatType,
    learn_mspn,
)

# ---------------------------------------------------------------------------
# acceptance reporting: one printed line per acceptance criterion
# ---------------------------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, passed: bool, detail: str) -> None:
    """Store and print a one-line verdict for an acceptance criterion.

    The line is recorded before any assertion fires so failing criteria
    still produce their line in the terminal summary.
    """
    line = f"[criterion {number}] {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert passed, line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


# ---------------------------------------------------------------------------
# dataset builders
# ---------------------------------------------------------------------------


def make_dataset(cols, values) -> Dataset:
    """Dataset from [(name, kind, categories)] plus a value matrix."""
    schema = Schema(tuple(Column(n, StatType(k, c)) for n, k, c in cols))
    return Dataset(schema, np.asarray(values, dtype=np.float64))


def make_hybrid6(seed: int, m: int) -> np.ndarray:
    """Six-variable hybrid sampler with planted pairwise dependencies.

    Variables 0 and 1 are strongly coupled (1 is a noisy square of 0);
    variable 2 partially tracks variable 3; 4 and 5 are independent of
    everything. All marginals are bounded so held-out rows stay inside
    the smoothed support of leaves fit on a training split.
    """
    r = np.random.default_rng(seed)
    x0 = r.uniform(-1.0, 1.0, m)
    x1 = 2.0 * x0**2 + 0.2 * r.uniform(-1.0, 1.0, m)
    x3 = r.integers(0, 8, m).astype(float)
    relabel = r.random(m) < 0.25
    x2 = np.where(relabel, r.integers(0, 3, m), x3 % 3).astype(float)
    x4 = r.uniform(0.0, 1.0, m)
    x5 = r.binomial(8, 0.5, m).astype(float)
    return np.column_stack([x0, x1, x2, x3, x4, x5])


HYBRID6_COLS = [
    ("pos", CONTINUOUS, None),
    ("energy", CONTINUOUS, None),
    ("grade", CATEGORICAL, ("a", "b", "c")),
    ("slot", DISCRETE, None),
    ("phase", CONTINUOUS, None),
    ("hits", DISCRETE, None),
]


# ---------------------------------------------------------------------------
# fixture datasets (>= 6, spanning pure-continuous / pure-categorical / hybrid)
# ---------------------------------------------------------------------------


@pytest.fixture(scope="session")
def blobs2d_data() -> Dataset:
    """Two equal-mass, well-separated 2-d blobs with within-blob correlation."""
    r = np.random.default_rng(2026)
    half = 600
    a0 = r.normal(0.0, 0.8, half)
    a1 = 0.8 * a0 + r.normal(0.0, 0.5, half)
    b0 = r.normal(6.0, 0.8, half)
    b1 = 6.0 + 0.8 * (b0 - 6.0) + r.normal(0.0, 0.5, half)
    values = np.column_stack(
        [np.concatenate([a0, b0]), np.concatenate([a1, b1])]
    )[r.permutation(2 * half)]
    return make_dataset(
        [("depth", CONTINUOUS, None), ("flow", CONTINUOUS, None)], values
    )


@pytest.fixture(scope="session")
def blobs2d_model(blobs2d_data):
    return learn_mspn(blobs2d_data, LearnConfig(seed=11))


@pytest.fixture(scope="session")
def cont_indep_data() -> Dataset:
    """Two independent uniform columns (M=1000)."""
    r = np.random.default_rng(515)
    values = np.column_stack([r.uniform(0.0, 1.0, 1000), r.uniform(10.0, 20.0, 1000)])
    return make_dataset(
        [("ratio", CONTINUOUS, None), ("load", CONTINUOUS, None)], values
    )


@pytest.fixture(scope="session")
def cont_indep_model(cont_indep_data):
    return learn_mspn(cont_indep_data, LearnConfig(seed=5))


@pytest.fixture(scope="session")
def cat_pair_data() -> Dataset:
    """Two dependent categorical columns (the second mostly copies the first)."""
    r = np.random.default_rng(77)
    m = 1500
    c0 = r.choice(3, size=m, p=[0.5, 0.3, 0.2]).astype(float)
    noise = r.random(m) < 0.15
    c1 = np.where(noise, r.integers(0, 3, m), c0).astype(float)
    return make_dataset(
        [
            ("source", CATEGORICAL, ("red", "green", "blue")),
            ("echo", CATEGORICAL, ("lo", "mid", "hi")),
        ],
        np.column_stack([c0, c1]),
    )


@pytest.fixture(scope="session")
def cat_pair_model(cat_pair_data):
    return learn_mspn(cat_pair_data, LearnConfig(seed=13))


@pytest.fixture(scope="session")
def cat_indep_data() -> Dataset:
    """Two independent categorical columns (M=1000)."""
    r = np.random.default_rng(31)
    m = 1000
    c0 = r.choice(3, size=m, p=[0.4, 0.35, 0.25]).astype(float)
    c1 = r.choice(2, size=m, p=[0.6, 0.4]).astype(float)
    return make_dataset(
        [
            ("region", CATEGORICAL, ("north", "south", "east")),
            ("flag", CATEGORICAL, ("off", "on")),
        ],
        np.column_stack([c0, c1]),
    )


@pytest.fixture(scope="session")
def cat_indep_model(cat_indep_data):
    return learn_mspn(cat_indep_data, LearnConfig(seed=3))


@pytest.fixture(scope="session")
def hybrid6_train() -> Dataset:
    return make_dataset(HYBRID6_COLS, make_hybrid6(1234, 5000))


@pytest.fixture(scope="session")
def hybrid6_test() -> Dataset:
    return make_dataset(HYBRID6_COLS, make_hybrid6(4321, 2000))


@pytest.fixture(scope="session")
def hybrid6_model(hybrid6_train):
    return learn_mspn(hybrid6_train, LearnConfig())


@pytest.fixture(scope="session")
def hybrid_small_data() -> Dataset:
    """Hybrid dataset below the splitting threshold (M=150 < 200)."""
    r = np.random.default_rng(8)
    m = 150
    values = np.column_stack(
        [
            r.normal(0.0, 1.0, m),
            r.integers(0, 6, m).astype(float),
            r.choice(2, size=m).astype(float),
        ]
    )
    return make_dataset(
        [
            ("score", CONTINUOUS, None),
            ("count", DISCRETE, None),
            ("state", CATEGORICAL, ("idle", "busy")),
        ],
        values,
    )


@pytest.fixture(scope="session")
def hybrid_small_model(hybrid_small_data):
    return learn_mspn(hybrid_small_data, LearnConfig(seed=7))


@pytest.fixture(scope="session")
def uni1d_data() -> Dataset:
    """Univariate bimodal mixture (0.7 / 0.3, well separated)."""
    r = np.random.default_rng(99)
    u = np.concatenate([r.normal(-2.0, 0.45, 2800), r.normal(3.0, 0.6, 1200)])
    return make_dataset([("reading", CONTINUOUS, None)], u[r.permutation(u.size), None])


@pytest.fixture(scope="session")
def uni1d_model(uni1d_data):
    return learn_mspn(uni1d_data, LearnConfig(seed=9))


@pytest.fixture(scope="session")
def mix2_data() -> Dataset:
    """Two-component fixture: exact 70/30 split marked by a categorical band.

    Component membership is recoverable exactly, so the learned root sum
    weights must reproduce the 0.7/0.3 proportions.
    """
    r = np.random.default_rng(20260816)
    m_a, m_b = 3500, 1500
    x0 = np.concatenate([r.uniform(0.0, 1.0, m_a), r.uniform(4.0, 5.0, m_b)])
    x1 = np.concatenate([np.zeros(m_a), np.ones(m_b)])
    values = np.column_stack([x0, x1])[r.permutation(m_a + m_b)]
    return make_dataset(
        [("amount", CONTINUOUS, None), ("band", CATEGORICAL, ("low", "high"))], values
    )


@pytest.fixture(scope="session")
def mix2_model(mix2_data):
    return learn_mspn(mix2_data, LearnConfig(seed=17))


@pytest.fixture(scope="session")
def fixture_models(
    blobs2d_data, blobs2d_model,
    cont_indep_data, cont_indep_model,
    cat_pair_data, cat_pair_model,
    cat_indep_data, cat_indep_model,
    hybrid6_train, hybrid6_model,
    hybrid_small_data, hybrid_small_model,
    uni1d_data, uni1d_model,
    mix2_data, mix2_model,
):
    """Every fixture dataset paired with its learned model."""
    return {
        "blobs2d": (blobs2d_data, blobs2d_model),
        "cont_indep": (cont_indep_data, cont_indep_model),
        "cat_pair": (cat_pair_data, cat_pair_model),
        "cat_indep": (cat_indep_data, cat_indep_model),
        "hybrid6": (hybrid6_train, hybrid6_model),
        "hybrid_small": (hybrid_small_data, hybrid_small_model),
        "uni1d": (uni1d_data, uni1d_model),
        "mix2": (mix2_data, mix2_model),
    }
