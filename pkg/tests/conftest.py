import numpy as np
import pytest

from treebench.data import BinaryDataset


def random_dataset(rng: np.random.Generator, n: int, p: int, pos_rate: float | None = None) -> BinaryDataset:
    """Random binary dataset with both classes present when n >= 2."""
    X = rng.random((n, p)) < rng.uniform(0.2, 0.8, size=p)
    rate = rng.uniform(0.2, 0.8) if pos_rate is None else pos_rate
    y = rng.random(n) < rate
    if n >= 2 and (y.all() or not y.any()):
        y[0] = not y[0]
    return BinaryDataset.from_matrix(X, y)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
