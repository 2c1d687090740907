import logging

import numpy as np
import pytest

from squid.model import derive_scales
from squid.schemas import DeviceParams, SpectroTable, WorkingParams
from squid.spectro import build_grid, solve_coupled

POINT_A = WorkingParams(x_e1=0.499, x_e2=0.49985, kappa=5e-4)
POINT_B = WorkingParams(x_e1=0.499, x_e2=0.49897, kappa=5e-4)

DEVICE_INI = """\
[device]
inductance = 100e-12
capacitance = 40e-15
beta_l = 1.2
"""


@pytest.fixture(scope="session")
def device():
    return DeviceParams(inductance=100e-12, capacitance=40e-15, beta_l=1.2)


@pytest.fixture(scope="session")
def scales(device):
    return derive_scales(device)


@pytest.fixture(scope="session")
def grid():
    return build_grid()


@pytest.fixture(scope="session")
def table_a(scales, grid):
    return solve_coupled(scales, POINT_A, grid)


@pytest.fixture(scope="session")
def table_b(scales, grid):
    return solve_coupled(scales, POINT_B, grid)


def synthetic_table(energies, drive, rho=1.0, computational=None) -> SpectroTable:
    """SpectroTable with hand-picked energies and drive matrix, no grid behind it."""
    energies = np.asarray(energies, dtype=float)
    size = len(energies)
    weights = np.zeros((size, 4))
    weights[np.arange(size), np.arange(size) % 4] = 1.0
    return SpectroTable(
        working_params=WorkingParams(x_e1=0.5, x_e2=0.5, kappa=0.0),
        rho=rho,
        backend="product",
        energies=energies,
        x1=np.zeros((size, size)),
        x2=np.zeros((size, size)),
        drive=np.asarray(drive, dtype=float),
        well_weights=weights,
        well_labels=[None] * size,
        computational=computational,
        saddle=(0.5, 0.5),
    )


@pytest.fixture
def two_level():
    """E = (0, 1), unit off-diagonal coupling and no diagonal drive terms."""
    return synthetic_table([0.0, 1.0], [[0.0, 1.0], [1.0, 0.0]])


@pytest.fixture
def cnot_device():
    """
    Four computational levels where only |10> <-> |11> is driven,
    plus an uncoupled fifth level.
    """
    drive = np.zeros((5, 5))
    drive[2, 3] = drive[3, 2] = 1.0
    return synthetic_table(
        [0.0, 0.3, 1.0, 1.5, 2.7],
        drive,
        computational={"00": 0, "01": 1, "10": 2, "11": 3},
    )


@pytest.fixture
def reset_logging():
    """Drop the handlers the CLI installs on the root logger."""
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        if isinstance(handler, (logging.FileHandler, logging.StreamHandler)) and not type(handler).__name__.startswith("LogCapture"):
            root.removeHandler(handler)
            handler.close()
