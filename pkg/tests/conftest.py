from pathlib import Path

import numpy as np
import pytest

from diffrec import build_graph, evaluate_kernel, ingest, split
from diffrec.datasets import SplitDataset

DATA_DIR = Path(__file__).parent / "data"

# The toy network used throughout: 3 users, 4 objects.
#   u0 -> {o0, o1}, u1 -> {o1, o2}, u2 -> {o1, o2, o3}
TOY_LINKS = [(0, 0), (0, 1), (1, 1), (1, 2), (2, 1), (2, 2), (2, 3)]
TOY_USER_SETS = [{0, 1}, {1, 2}, {1, 2, 3}]


@pytest.fixture
def toy_graph():
    return build_graph(TOY_LINKS)


def random_graph(rng, max_users=120, max_objects=200):
    m = int(rng.integers(3, max_users))
    n = int(rng.integers(3, max_objects))
    density = float(10 ** rng.uniform(np.log10(0.02), np.log10(0.5)))
    links = np.argwhere(rng.random((m, n)) < density)
    if links.shape[0] == 0:
        links = np.array([[0, 0]])
    return build_graph(links, num_users=m, num_objects=n)


@pytest.fixture(scope="session")
def graph_corpus():
    """100 seeded random graphs of varied size and density, n <= 200."""
    rng = np.random.default_rng(9091)
    return [random_graph(rng) for _ in range(100)]


def make_random_split(seed, num_users=60, num_objects=40,
                      density=0.18, ratio=0.8) -> SplitDataset:
    """Small synthetic split for unit tests; fully determined by ``seed``."""
    rng = np.random.default_rng(seed)
    links = np.argwhere(rng.random((num_users, num_objects)) < density)
    keep = rng.random(links.shape[0]) < ratio
    train = build_graph(links[keep], num_users=num_users, num_objects=num_objects)
    test = build_graph(links[~keep], num_users=num_users, num_objects=num_objects)
    return SplitDataset(train=train, test=test, ratio=ratio, seed=seed,
                        user_ids=tuple(f"u{i}" for i in range(num_users)),
                        object_ids=tuple(f"o{j}" for j in range(num_objects)))


@pytest.fixture
def small_split():
    return make_random_split(314)


def write_interaction_file(path, num_users=60, num_objects=40,
                           density=0.18, seed=271):
    """Deterministic delimited interaction file for CLI tests."""
    rng = np.random.default_rng(seed)
    links = np.argwhere(rng.random((num_users, num_objects)) < density)
    lines = [f"u{u}\to{o}\t{int(rng.integers(1, 6))}\t{800000000 + 60 * i}"
             for i, (u, o) in enumerate(links)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def ml100k_path():
    path = DATA_DIR / "u.data"
    if not path.exists():
        pytest.skip("bundled ratings dataset not present")
    return path


@pytest.fixture(scope="session")
def ml100k_records(ml100k_path):
    return ingest(ml100k_path).records


@pytest.fixture(scope="session")
def ml100k_split(ml100k_records):
    """Split cache keyed by seed, shared across the whole session."""
    cache = {}

    def get(seed, ratio=0.9):
        key = (seed, ratio)
        if key not in cache:
            cache[key] = split(ml100k_records, ratio=ratio, seed=seed)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def ml100k_eval(ml100k_split):
    """Evaluation cache keyed by (seed, kernel, length)."""
    cache = {}

    def get(seed, kernel, length=20):
        key = (seed, kernel, length)
        if key not in cache:
            cache[key] = evaluate_kernel(ml100k_split(seed), kernel, length=length)
        return cache[key]

    return get
