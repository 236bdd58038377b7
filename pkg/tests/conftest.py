import numpy as np
import pytest

from trendscan import AnalysisGrid, available_backends


@pytest.fixture(params=available_backends())
def backend(request):
    """Run the decorated test once per compiled/pure-python kernel."""
    return request.param


@pytest.fixture
def knee_grid():
    """60-point series with an obvious slope change at index 30."""
    rng = np.random.default_rng(42)
    t = np.arange(60, dtype=float)
    y = np.maximum(t - 30.0, 0.0) + 0.05 * rng.standard_normal(60)
    return AnalysisGrid(times=t, values=y)


@pytest.fixture
def small_grid():
    rng = np.random.default_rng(7)
    t = np.arange(9, dtype=float)
    y = 0.3 * t + 0.6 * rng.standard_normal(9)
    return AnalysisGrid(times=t, values=y)
