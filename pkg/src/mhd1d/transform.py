"""Mapping between Lagrangian mass coordinates and physical space.

Each cell carries a constant specific volume, so the physical width of
cell i is exactly h_i * tau_i and the map is a prefix sum; the physical
domain length equals the total volume at every time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataValidationError
from .model import State


@dataclass(frozen=True)
class EulerianProfile:
    """Physical-space samples of one snapshot.

    rho, u, theta and b are sampled at the cell-center positions x_phys;
    the node-sampled velocity is kept alongside for staggered output.
    """

    t: float
    x_phys: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    theta: np.ndarray
    b: np.ndarray
    x_nodes: np.ndarray
    u_nodes: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.x_phys) <= 0.0) or np.any(np.diff(self.x_nodes) <= 0.0):
            raise DataValidationError("physical positions must be strictly increasing")
        if np.any(self.rho <= 0.0):
            raise DataValidationError("density must be strictly positive")

    @property
    def length(self) -> float:
        return float(self.x_nodes[-1])


def mass_to_space(state: State) -> np.ndarray:
    """Physical node positions: prefix sums of cell volumes from x=0."""
    widths = state.grid.cell_widths * state.tau
    x = np.empty(state.n_cells + 1)
    x[0] = 0.0
    np.cumsum(widths, out=x[1:])
    return x


def to_eulerian(state: State) -> EulerianProfile:
    """Sample density, velocity, temperature and field in physical space."""
    x_nodes = mass_to_space(state)
    centers = 0.5 * (x_nodes[:-1] + x_nodes[1:])
    return EulerianProfile(
        t=state.t,
        x_phys=centers,
        rho=1.0 / state.tau,
        u=state.u_cell(),
        theta=state.theta.copy(),
        b=state.a / state.tau,
        x_nodes=x_nodes,
        u_nodes=state.u.copy(),
    )


def mass_from_profile(profile: EulerianProfile) -> np.ndarray:
    """Reconstruct cell masses from a profile by rho * dx prefix sums.

    Cell edges are rebuilt from the midpoints starting at x=0, which is
    exact for midpoint-sampled profiles; the result should match the mass
    grid that produced the profile to round-off.
    """
    c = profile.x_phys
    edges = np.empty(c.shape[0] + 1)
    edges[0] = 0.0
    for k in range(c.shape[0]):
        edges[k + 1] = 2.0 * c[k] - edges[k]
    return profile.rho * np.diff(edges)
