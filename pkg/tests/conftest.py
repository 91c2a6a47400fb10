import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from obsdiam.core import GeometricDataSet, PointMeasure, WeightedValueDistribution  # noqa: E402


@st.composite
def distributions(draw, max_atoms=8, exact=None):
    """Random finitely supported distributions on a coarse value grid."""
    k = draw(st.integers(1, max_atoms))
    values = sorted(draw(st.sets(st.integers(-20, 20), min_size=k, max_size=k)))
    weights = draw(st.lists(st.integers(1, 6), min_size=k, max_size=k))
    if exact is None:
        exact = draw(st.booleans())
    total = sum(weights)
    if exact:
        return WeightedValueDistribution(
            tuple(Fraction(v, 2) for v in values), tuple(Fraction(w, total) for w in weights)
        )
    return WeightedValueDistribution(tuple(v / 2 for v in values), tuple(w / total for w in weights))


@st.composite
def datasets(draw, max_points=7, max_features=4, weighted=True):
    n = draw(st.integers(1, max_points))
    f = draw(st.integers(0, max_features))
    cells = draw(st.lists(st.integers(-6, 6), min_size=n * f, max_size=n * f))
    table = np.array(cells, dtype=float).reshape(n, f) / 2
    if weighted and draw(st.booleans()):
        w = draw(st.lists(st.integers(1, 5), min_size=n, max_size=n))
        measure = PointMeasure(tuple(x / sum(w) for x in w))
    else:
        measure = PointMeasure.uniform(n)
    return GeometricDataSet(table, measure)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
