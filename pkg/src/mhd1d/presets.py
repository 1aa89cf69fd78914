"""Built-in initial-data scenarios.

All presets are admissible (positive bounded specific volume and
temperature, square-summable velocity vanishing at the walls, bounded
field) and carry unit total volume.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .model import InitialData, MassGrid, validate_initial

PRESET_NAMES = ("equilibrium", "smooth", "rough-b", "rough-tau")


def load_preset(name: str, grid: MassGrid) -> InitialData:
    """Sample a named scenario on a grid and validate it."""
    x = grid.cell_centers
    y = grid.node_positions
    n = grid.n_cells

    def smooth_u():
        u = 0.1 * np.sin(np.pi * y)
        u[0] = 0.0
        u[-1] = 0.0
        return u

    if name == "equilibrium":
        data = InitialData(np.ones(n), np.zeros(n + 1), np.ones(n), np.ones(n))
    elif name == "smooth":
        data = InitialData(
            1.0 + 0.2 * np.sin(2.0 * np.pi * x),
            smooth_u(),
            1.0 + 0.5 * np.sin(2.0 * np.pi * x),
            1.0 + 0.1 * np.cos(2.0 * np.pi * x),
        )
    elif name == "rough-b":
        data = InitialData(
            1.0 + 0.2 * np.sin(2.0 * np.pi * x),
            smooth_u(),
            1.0 + (x > 0.5).astype(np.float64),
            1.0 + 0.1 * np.cos(2.0 * np.pi * x),
        )
    elif name == "rough-tau":
        data = InitialData(
            0.8 + 0.4 * (x > 0.5).astype(np.float64),
            smooth_u(),
            1.0 + 0.5 * np.sin(2.0 * np.pi * x),
            1.0 + 0.1 * np.cos(2.0 * np.pi * x),
        )
    else:
        raise ConfigError(f"unknown preset '{name}' (choose from {', '.join(PRESET_NAMES)})")
    return validate_initial(data, grid)
