"""Time integration of the Lagrangian system on the staggered mass grid.

The magnetic field is eliminated through the frozen invariant a = b0*tau0,
so a step advances (tau, u, theta) only.  Update order is fixed: fluxes
from the old state, tau first, then u, then theta (explicit or backward
Euler per configuration) with the new tau in the conduction coefficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError, DataValidationError, NewtonError, PositivityError
from .model import FluidParameters, InitialData, MassGrid, State, validate_initial

MAX_DT_HALVINGS = 10


@dataclass(frozen=True)
class SchemeConfig:
    """Time-integration settings.

    dt_init is a ceiling on every step, not just the first; the actual
    step is the smaller of it and the safety-scaled stability limit,
    clipped so steps land exactly on snapshot times and t_end.

    newton_tol bounds the heat-solve residual max-norm measured in
    temperature units (the backward-Euler fixed-point defect), which
    keeps the tolerance meaningful for arbitrarily small steps.
    """

    dt_init: float = 1e-3
    cfl_safety: float = 0.4
    t_end: float = 1.0
    theta_step_mode: str = "implicit"
    newton_tol: float = 1e-9
    newton_max_iter: int = 25
    snapshot_interval: float = 0.1

    def __post_init__(self):
        if not (self.dt_init > 0.0):
            raise ConfigError("time.dt_init must be strictly positive")
        if not (0.0 < self.cfl_safety <= 1.0):
            raise ConfigError("time.cfl_safety must lie in (0, 1]")
        if self.t_end < 0.0:
            raise ConfigError("time.t_end must be nonnegative")
        if self.theta_step_mode not in ("explicit", "implicit"):
            raise ConfigError("time.theta_step_mode must be 'explicit' or 'implicit'")
        if not (self.newton_tol > 0.0):
            raise ConfigError("time.newton_tol must be strictly positive")
        if self.newton_max_iter < 1:
            raise ConfigError("time.newton_max_iter must be at least 1")
        if not (self.snapshot_interval > 0.0):
            raise ConfigError("output.snapshot_interval must be strictly positive")

    @property
    def implicit_theta(self) -> bool:
        return self.theta_step_mode == "implicit"


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered snapshots of one run plus everything that produced them."""

    states: tuple[State, ...]
    grid: MassGrid
    params: FluidParameters
    config: SchemeConfig

    def __post_init__(self):
        if not self.states:
            raise DataValidationError("a trajectory needs at least one snapshot")
        ts = [s.t for s in self.states]
        if ts[0] != 0.0 or any(b <= a for a, b in zip(ts, ts[1:])):
            raise DataValidationError("snapshot times must increase strictly from 0")
        first = self.states[0]
        for s in self.states:
            if s.grid is not self.grid or s.a is not first.a:
                raise DataValidationError("snapshots must share one grid and one invariant array")

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    def __len__(self) -> int:
        return len(self.states)


def _cfl_coef(params: FluidParameters, config: SchemeConfig) -> float:
    coef = 1.0 / (2.0 * params.mu)
    if not config.implicit_theta:
        coef = min(coef, params.cv / (2.0 * params.kappa))
    return coef


def _grid_reciprocals(grid: MassGrid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    h = grid.cell_widths
    return 1.0 / h, 1.0 / grid.interior_node_widths, h * h


def _work_arrays(n: int) -> tuple[np.ndarray, ...]:
    return tuple(np.empty(n) for _ in range(11)) + (np.empty(n + 1),)


def step(state: State, dt: float, params: FluidParameters, config: SchemeConfig) -> State:
    """Advance one state by dt; boundary velocity stays pinned at zero.

    Volume changes only by the telescoping boundary flux, which vanishes
    for the clamped walls, so the cell sum of h*tau is preserved to
    round-off.  Raises PositivityError (with the offending cell and a
    suggested smaller dt) or NewtonError on failure.
    """
    if not (dt > 0.0):
        raise DataValidationError(f"time step must be strictly positive, got {dt}")
    grid = state.grid
    n = grid.n_cells
    inv_h, inv_hbar, _ = _grid_reciprocals(grid)
    tau_new = np.empty(n)
    u_new = np.empty(n + 1)
    theta_new = np.empty(n)
    ux, sigma, psi, source, low, diag, up, rhs, delta, cp, dp, G = _work_arrays(n)
    status, idx, resid, iters = kernels.step_arrays(
        state.tau, state.u, state.theta, state.a,
        grid.cell_widths, inv_h, inv_hbar,
        params.R, params.cv, params.mu, params.kappa, dt,
        config.implicit_theta, config.newton_tol, config.newton_max_iter,
        tau_new, u_new, theta_new,
        ux, sigma, psi, source, G,
        low, diag, up, rhs, delta, cp, dp)
    _raise_for_status(status, idx, resid, iters, dt, state.t)
    return State(state.t + dt, tau_new, u_new, theta_new, state.a, grid)


def _raise_for_status(status, idx, resid, iters, dt, t):
    if status == kernels.STATUS_OK:
        return
    if status == kernels.STATUS_TAU_NONPOS:
        raise PositivityError(
            f"specific volume went nonpositive at cell {idx} (t={t}); retry with dt<={dt / 2}",
            cell_index=idx, suggested_dt=dt / 2, t=t)
    if status == kernels.STATUS_THETA_NONPOS:
        raise PositivityError(
            f"temperature went nonpositive at cell {idx} (t={t}); retry with dt<={dt / 2}",
            cell_index=idx, suggested_dt=dt / 2, t=t)
    raise NewtonError(
        f"implicit heat solve residual {resid} above tolerance after {iters} iterations (t={t})",
        residual=resid, iterations=iters, t=t)


def stable_dt(state: State, params: FluidParameters, config: SchemeConfig) -> float:
    """Largest admissible step from this state.

    cfl_safety times the smallest explicit stability limit (viscous, and
    conduction too in explicit theta mode), capped at dt_init and at the
    time remaining to the next snapshot and to t_end.
    """
    grid = state.grid
    h = grid.cell_widths
    dt = config.cfl_safety * kernels.cfl_limit(state.tau, h * h, _cfl_coef(params, config))
    dt = min(dt, config.dt_init)
    t = state.t
    if t < config.t_end:
        dt = min(dt, config.t_end - t)
        k = math.floor(t / config.snapshot_interval + 1e-9)
        t_next = (k + 1) * config.snapshot_interval
        if t_next > t:
            dt = min(dt, t_next - t)
    return dt


def implicit_heat_solve(state: State, dt: float, params: FluidParameters,
                        config: SchemeConfig) -> np.ndarray:
    """Backward-Euler temperature update of the reference step.

    Runs the sub-steps preceding the heat solve (old-state source, new
    tau in the conduction coefficient) and returns the new temperature
    array; the fixed-point residual max-norm, in temperature units, is
    at most config.newton_tol.
    """
    if not config.implicit_theta:
        raise ConfigError("implicit_heat_solve requires theta_step_mode = implicit")
    if not (dt > 0.0):
        raise DataValidationError(f"time step must be strictly positive, got {dt}")
    grid = state.grid
    n = grid.n_cells
    inv_h, inv_hbar, _ = _grid_reciprocals(grid)
    tau_new = np.empty(n)
    u_new = np.empty(n + 1)
    theta_new = np.empty(n)
    ux, sigma, psi, source, low, diag, up, rhs, delta, cp, dp, G = _work_arrays(n)
    status, idx, resid, iters = kernels.step_arrays(
        state.tau, state.u, state.theta, state.a,
        grid.cell_widths, inv_h, inv_hbar,
        params.R, params.cv, params.mu, params.kappa, dt,
        True, config.newton_tol, config.newton_max_iter,
        tau_new, u_new, theta_new,
        ux, sigma, psi, source, G,
        low, diag, up, rhs, delta, cp, dp)
    if status in (kernels.STATUS_TAU_NONPOS, kernels.STATUS_NEWTON_FAIL):
        _raise_for_status(status, idx, resid, iters, dt, state.t)
    return theta_new


def run(init: InitialData, grid: MassGrid, params: FluidParameters,
        config: SchemeConfig) -> Trajectory:
    """Integrate from t=0 to t_end, recording snapshots at the cadence.

    Snapshots are taken at every multiple of snapshot_interval plus t=0
    and t_end (a zero-length run holds exactly the initial snapshot).
    Identical inputs produce bit-identical trajectories.
    """
    if init.a is None:
        init = validate_initial(init, grid)
    tau = np.array(init.tau0)
    u = np.array(init.u0)
    theta = np.array(init.theta0)
    a = init.a
    h = grid.cell_widths
    inv_h, inv_hbar, h2 = _grid_reciprocals(grid)
    coef = _cfl_coef(params, config)
    states = [State(0.0, tau.copy(), u.copy(), theta.copy(), a, grid)]
    t = 0.0
    k = 0
    while t < config.t_end:
        k += 1
        t_next = min(k * config.snapshot_interval, config.t_end)
        if t_next <= t:
            continue
        status, idx, t, n_steps, resid, iters = kernels.advance_until(
            tau, u, theta, a, h, inv_h, inv_hbar, h2, coef,
            params.R, params.cv, params.mu, params.kappa,
            t, t_next, config.dt_init, config.cfl_safety,
            config.implicit_theta, config.newton_tol, config.newton_max_iter,
            MAX_DT_HALVINGS)
        _raise_for_status(status, idx, resid, iters, config.dt_init, t)
        states.append(State(t, tau.copy(), u.copy(), theta.copy(), a, grid))
    return Trajectory(tuple(states), grid, params, config)
