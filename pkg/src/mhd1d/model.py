"""Physical parameters, discrete field containers and constitutive relations.

The gas is ideal and polytropic (pressure R*rho*theta, internal energy
cv*theta) with a combined viscosity mu and heat conductivity kappa.
Resistivity is identically zero, so the magnetic field is slaved to the
specific volume through the frozen per-cell invariant a = b0*tau0.

Layout is staggered on the unit mass interval: specific volume tau,
temperature theta and the magnetic invariant a live at cell centers,
velocity u at the n+1 nodes, with u pinned to zero at both walls.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DataValidationError


def _frozen(arr) -> np.ndarray:
    """Copy to a float64 array and make it read-only."""
    out = np.array(arr, dtype=np.float64)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class FluidParameters:
    """Positive physical constants of the model.

    mu is the combined viscosity (twice shear plus bulk); the individual
    coefficients never enter the one-dimensional equations separately.
    """

    R: float = 1.0
    cv: float = 1.0
    mu: float = 1.0
    kappa: float = 1.0

    def __post_init__(self):
        for name in ("R", "cv", "mu", "kappa"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0.0:
                raise DataValidationError(f"parameter {name} must be strictly positive, got {v}")


@dataclass(frozen=True)
class MassGrid:
    """Partition of the unit mass interval into cells with node/center layout."""

    n_cells: int
    cell_widths: np.ndarray
    node_positions: np.ndarray

    def __post_init__(self):
        h = _frozen(self.cell_widths)
        y = _frozen(self.node_positions)
        object.__setattr__(self, "cell_widths", h)
        object.__setattr__(self, "node_positions", y)
        if self.n_cells < 1 or h.shape != (self.n_cells,) or y.shape != (self.n_cells + 1,):
            raise DataValidationError("grid arrays are inconsistent with n_cells")
        if np.any(h <= 0.0):
            raise DataValidationError("cell widths must be strictly positive")
        if y[0] != 0.0 or abs(y[-1] - 1.0) > 1e-12 or np.any(np.diff(y) <= 0.0):
            raise DataValidationError("node positions must increase strictly from 0 to 1")
        if abs(h.sum() - 1.0) > 1e-12:
            raise DataValidationError("cell widths must sum to unit total mass")
        if np.max(np.abs(np.diff(y) - h)) > 1e-14:
            raise DataValidationError("node positions do not match cell widths")

    @classmethod
    def uniform(cls, n: int) -> "MassGrid":
        y = np.arange(n + 1, dtype=np.float64) / n
        y[-1] = 1.0
        return cls(n, np.diff(y), y)

    @property
    def cell_centers(self) -> np.ndarray:
        y = self.node_positions
        return 0.5 * (y[:-1] + y[1:])

    @property
    def interior_node_widths(self) -> np.ndarray:
        """Half-sum of the two cell widths adjacent to each interior node."""
        h = self.cell_widths
        return 0.5 * (h[:-1] + h[1:])

    @property
    def node_masses(self) -> np.ndarray:
        """Mass lumped at each node (half-cells at the walls)."""
        h = self.cell_widths
        m = np.empty(self.n_cells + 1)
        m[0] = 0.5 * h[0]
        m[-1] = 0.5 * h[-1]
        m[1:-1] = self.interior_node_widths
        return m


@dataclass(frozen=True)
class State:
    """Immutable snapshot of the discrete fields at one time.

    tau and theta must be strictly positive everywhere; a violation is a
    solver failure, not an admissible state.  The magnetic invariant a is
    frozen at construction; the field b itself is derived as a/tau.
    """

    t: float
    tau: np.ndarray
    u: np.ndarray
    theta: np.ndarray
    a: np.ndarray
    grid: MassGrid

    def __post_init__(self):
        object.__setattr__(self, "tau", _frozen(self.tau))
        object.__setattr__(self, "u", _frozen(self.u))
        object.__setattr__(self, "theta", _frozen(self.theta))
        if not isinstance(self.a, np.ndarray) or self.a.flags.writeable:
            object.__setattr__(self, "a", _frozen(self.a))
        n = self.grid.n_cells
        if self.tau.shape != (n,) or self.theta.shape != (n,) or self.a.shape != (n,) \
                or self.u.shape != (n + 1,):
            raise DataValidationError("state arrays do not match the grid")
        if np.any(self.tau <= 0.0):
            raise DataValidationError(
                f"nonpositive specific volume at cell {int(np.argmin(self.tau))}"
            )
        if np.any(self.theta <= 0.0):
            raise DataValidationError(
                f"nonpositive temperature at cell {int(np.argmin(self.theta))}"
            )
        if self.u[0] != 0.0 or self.u[-1] != 0.0:
            raise DataValidationError("velocity must vanish at both boundary nodes")

    @property
    def n_cells(self) -> int:
        return self.grid.n_cells

    @property
    def b(self) -> np.ndarray:
        return self.a / self.tau

    def u_cell(self) -> np.ndarray:
        """Velocity averaged to cell centers."""
        return 0.5 * (self.u[:-1] + self.u[1:])

    def u_x(self) -> np.ndarray:
        """Velocity gradient per cell."""
        return np.diff(self.u) / self.grid.cell_widths


@dataclass(frozen=True)
class InitialData:
    """Admissible initial fields plus their recorded bounds.

    `a` is attached by validate_initial and is the per-cell product
    b0*tau0 that the induction law freezes in time.
    """

    tau0: np.ndarray
    u0: np.ndarray
    b0: np.ndarray
    theta0: np.ndarray
    m: float = 0.0
    M: float = 0.0
    a: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]


def validate_initial(data: InitialData, grid: MassGrid) -> InitialData:
    """Check admissibility of initial data and attach derived quantities.

    Returns the data with m, M recomputed as the actual extrema and the
    magnetic invariant a = b0*tau0 attached.  Rejects nonpositive tau0 or
    theta0, non-finite entries, wrong sizes and nonzero wall velocity.
    """
    tau0 = np.asarray(data.tau0, dtype=np.float64)
    u0 = np.asarray(data.u0, dtype=np.float64)
    b0 = np.asarray(data.b0, dtype=np.float64)
    theta0 = np.asarray(data.theta0, dtype=np.float64)
    n = grid.n_cells
    if tau0.shape != (n,) or b0.shape != (n,) or theta0.shape != (n,):
        raise DataValidationError("cell field sizes do not match the grid")
    if u0.shape != (n + 1,):
        raise DataValidationError("velocity must carry one sample per node")
    for name, arr in (("tau0", tau0), ("u0", u0), ("b0", b0), ("theta0", theta0)):
        if not np.all(np.isfinite(arr)):
            raise DataValidationError(f"{name} contains non-finite entries")
    if np.any(tau0 <= 0.0):
        raise DataValidationError(
            f"tau0 must be strictly positive, violated at cell {int(np.argmin(tau0))}"
        )
    if np.any(theta0 <= 0.0):
        raise DataValidationError(
            f"theta0 must be strictly positive, violated at cell {int(np.argmin(theta0))}"
        )
    if u0[0] != 0.0 or u0[-1] != 0.0:
        raise DataValidationError("u0 must vanish at both boundary nodes")
    m = float(min(tau0.min(), theta0.min()))
    M = float(tau0.max())
    return replace(
        InitialData(_frozen(tau0), _frozen(u0), _frozen(b0), _frozen(theta0)),
        m=m,
        M=M,
        a=_frozen(b0 * tau0),
    )


def pressure(tau, theta, params: FluidParameters):
    """Ideal-gas pressure R*theta/tau."""
    tau = np.asarray(tau, dtype=np.float64)
    if np.any(tau <= 0.0):
        raise DataValidationError("pressure requires strictly positive specific volume")
    return params.R * np.asarray(theta, dtype=np.float64) / tau


def stress_sigma(tau, theta, u_x, params: FluidParameters):
    """Viscous-plus-pressure stress (mu*u_x - R*theta)/tau."""
    tau = np.asarray(tau, dtype=np.float64)
    if np.any(tau <= 0.0):
        raise DataValidationError("stress requires strictly positive specific volume")
    return (params.mu * np.asarray(u_x, dtype=np.float64)
            - params.R * np.asarray(theta, dtype=np.float64)) / tau


def flux_psi(sigma, b):
    """Effective momentum flux: stress minus magnetic pressure b^2/2."""
    b = np.asarray(b, dtype=np.float64)
    return np.asarray(sigma, dtype=np.float64) - 0.5 * b * b


def magnetic_field(a, tau):
    """Magnetic field recovered from the frozen invariant: b = a/tau."""
    tau = np.asarray(tau, dtype=np.float64)
    if np.any(tau <= 0.0):
        raise DataValidationError("magnetic field requires strictly positive specific volume")
    return np.asarray(a, dtype=np.float64) / tau


def state_flux_psi(state: State, params: FluidParameters) -> np.ndarray:
    """Per-cell effective flux of a snapshot (stress minus magnetic pressure)."""
    sigma = stress_sigma(state.tau, state.theta, state.u_x(), params)
    return flux_psi(sigma, state.b)
