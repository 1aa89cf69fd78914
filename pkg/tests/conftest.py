import numpy as np
import pytest

from mhd1d import FluidParameters, MassGrid, SchemeConfig, State, load_preset, run


@pytest.fixture(scope="session")
def params():
    return FluidParameters(R=1.0, cv=1.0, mu=1.0, kappa=1.0)


@pytest.fixture(scope="session")
def grid64():
    return MassGrid.uniform(64)


@pytest.fixture(scope="session")
def smooth_traj64(params, grid64):
    """A short smooth-preset trajectory shared by oracle tests."""
    data = load_preset("smooth", grid64)
    cfg = SchemeConfig(t_end=0.2, snapshot_interval=0.01, dt_init=1e-3)
    return run(data, grid64, params, cfg)


def make_state(tau, u, theta, a, t=0.0):
    tau = np.asarray(tau, dtype=float)
    grid = MassGrid.uniform(tau.shape[0])
    return State(t, tau, np.asarray(u, dtype=float), np.asarray(theta, dtype=float),
                 np.asarray(a, dtype=float), grid)
