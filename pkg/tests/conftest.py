import numpy as np
import pytest

import sclink as sl
from sclink.measure import default_efficiency_curve, default_pump_draw_curve
from sclink.quality import AmplifierSpec


@pytest.fixture(scope="session")
def fiber():
    return sl.default_fiber()


@pytest.fixture(scope="session")
def scl_grid():
    return sl.build_grid(sl.scl_band_plan(), 150.0, 140.0, 2.0)


@pytest.fixture(scope="session")
def cl_grid():
    return sl.build_grid(sl.cl_band_plan(), 150.0, 140.0, 2.0)


@pytest.fixture(scope="session")
def amplifiers():
    return {
        "S": AmplifierSpec("S", 6.0, saturation_dbm=20.5),
        "C": AmplifierSpec("C", 5.0, saturation_dbm=23.0),
        "L": AmplifierSpec("L", 6.0, saturation_dbm=23.0),
    }


@pytest.fixture(scope="session")
def pce_curves():
    return {b: default_efficiency_curve(b) for b in "SCL"}


@pytest.fixture(scope="session")
def pump_curve():
    return default_pump_draw_curve(1365)


@pytest.fixture(scope="session")
def single_channel_grid():
    """One 1550 nm channel at the reference launch power."""
    from sclink.grid import ChannelGrid
    from sclink.units import nm_to_thz

    return ChannelGrid(np.array([nm_to_thz(1550.0)]), ("C",), 140.0,
                       np.array([10 ** 0.2]), 150.0)


@pytest.fixture(scope="session")
def small_grid():
    """A narrow 17-channel two-band grid for fast pumped solves."""
    from sclink.grid import Band, BandPlan

    plan = BandPlan((Band("S", 1520.0, 1530.0), Band("C", 1530.0, 1539.0)))
    return sl.build_grid(plan, 150.0, 140.0, 2.0)
