"""Shared fixtures: a coarse space-time grid and session-cached kernel builds.

The coarse grid (length 6, horizon 0.4, 129 space nodes, 17 time gaps) keeps
a full Duhamel-series build near a second, so the parametrix tests can share
three session-scoped kernels instead of rebuilding per test.  Accuracy pins
against it are correspondingly looser than at the CLI default grids.
"""

import numpy as np
import pytest

from stablekern.density import StableKernelSpec
from stablekern.drift import drift_catalog
from stablekern.parametrix import SpaceTimeGrid, heat_kernel


@pytest.fixture(scope="session")
def coarse_grid():
    return SpaceTimeGrid(length=6.0, horizon=0.4, n_x=129, n_t=17)


@pytest.fixture(scope="session")
def ou19_kernel(coarse_grid):
    spec = StableKernelSpec(d=1, alpha=1.9)
    return heat_kernel(spec, drift_catalog("ou"), coarse_grid)


@pytest.fixture(scope="session")
def zero2_kernel(coarse_grid):
    spec = StableKernelSpec(d=1, alpha=2.0)
    return heat_kernel(spec, drift_catalog("zero"), coarse_grid)


@pytest.fixture(scope="session")
def zero19_kernel(coarse_grid):
    spec = StableKernelSpec(d=1, alpha=1.9)
    return heat_kernel(spec, drift_catalog("zero"), coarse_grid)


def l1_row_distance(values, exact, weights):
    """Row-wise L1 distances between two (n_x, n_x) panels, columns = rows."""
    return np.abs(values - exact) @ weights
