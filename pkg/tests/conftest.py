import math

import pytest

from weylkit.hermite import build_context
from weylkit.weyl import GridSpec, get_engine

# Desk-scale defaults: N = 64 with the capacity-compliant xi-grid
# (h_xi = 0.125, so the default z-grid spacing 0.25 is 2 * h_xi).
CTX_ARGS = (1, 64, 13.5, 216)
GRID_ARGS = (1, 8.0, 64)
FINE_GRID_ARGS = (1, 10.0, 80)  # same spacing, wider box (level <= 8 panels)
LT = math.pi
TPTS = 64


@pytest.fixture(scope="session")
def ctx():
    return build_context(*CTX_ARGS)


@pytest.fixture(scope="session")
def ctx16():
    return build_context(1, 16, 13.5, 216)


@pytest.fixture(scope="session")
def ctx24():
    return build_context(1, 24, 13.5, 216)


@pytest.fixture(scope="session")
def grid():
    return GridSpec(*GRID_ARGS)


@pytest.fixture(scope="session")
def fine_grid():
    return GridSpec(*FINE_GRID_ARGS)


@pytest.fixture(scope="session")
def engine(ctx, grid):
    eng = get_engine(ctx, grid)
    eng.phi  # materialise the point-matrix cache once per session
    return eng


@pytest.fixture(scope="session")
def fine_engine(ctx, fine_grid):
    eng = get_engine(ctx, fine_grid)
    eng.phi
    return eng
