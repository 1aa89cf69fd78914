"""Constructive experiments: mollified data, stability ratios, convergence.

Each experiment orchestrates independent solver runs (parallelizable,
capped by the MHD1D_THREADS environment variable) and reduces the
results with the oracle norms.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, DataValidationError
from .model import FluidParameters, InitialData, MassGrid, validate_initial
from .oracles import NormSpec, require_stability_admissible, spatial_lq
from .solver import SchemeConfig, Trajectory, run


def max_workers() -> int:
    v = os.environ.get("MHD1D_THREADS")
    if v is not None:
        try:
            w = int(v)
        except ValueError as exc:
            raise ConfigError(f"MHD1D_THREADS must be an integer, got {v!r}") from exc
        if w < 1:
            raise ConfigError("MHD1D_THREADS must be at least 1")
        return w
    return os.cpu_count() or 1


def run_many(tasks: Sequence[Callable[[], object]]) -> list:
    """Execute independent run tasks, preserving order in the results."""
    workers = min(max_workers(), max(len(tasks), 1))
    if workers == 1 or len(tasks) <= 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(task) for task in tasks]
        return [f.result() for f in futures]


# ---------------------------------------------------------------------------
# Mollification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MollifierConfig:
    """Smoothing length in mass units; must be strictly inside (0, 1)."""

    epsilon: float

    def __post_init__(self):
        if not (0.0 < self.epsilon < 1.0):
            raise ConfigError(f"mollifier.epsilon must lie in (0, 1), got {self.epsilon}")


def _mollify_samples(pos, val, wts, eps, eval_pos, odd):
    """Normalized compact-kernel average with reflected boundary padding.

    The kernel is the quartic bump (1-s^2)^2 scaled to eps.  Reflection is
    even (odd=False) or odd (odd=True) about both ends of [0, 1].  The
    output is a convex combination of sample values, clipped to their
    hull to guard against last-ulp excursions.
    """
    sgn = -1.0 if odd else 1.0
    p = np.concatenate([pos, -pos, 2.0 - pos])
    v = np.concatenate([val, sgn * val, sgn * val])
    w = np.concatenate([wts, wts, wts])
    s = (eval_pos[:, None] - p[None, :]) / eps
    k = np.where(np.abs(s) < 1.0, (1.0 - s * s) ** 2, 0.0) * w[None, :]
    out = (k @ v) / k.sum(axis=1)
    return np.clip(out, v.min(), v.max())


def mollify(data: InitialData, grid: MassGrid, cfg: MollifierConfig) -> InitialData:
    """Smooth initial data by discrete convolution with a compact kernel.

    Even reflection for tau0, theta0 and b0 keeps every output value
    inside the hull of the input; odd reflection for u0 preserves the
    wall compatibility, and the boundary nodes are forced to exact zero.
    """
    if data.a is None:
        data = validate_initial(data, grid)
    xc = grid.cell_centers
    y = grid.node_positions
    h = grid.cell_widths
    m = grid.node_masses
    eps = cfg.epsilon
    tau = _mollify_samples(xc, data.tau0, h, eps, xc, odd=False)
    theta = _mollify_samples(xc, data.theta0, h, eps, xc, odd=False)
    b = _mollify_samples(xc, data.b0, h, eps, xc, odd=False)
    u = _mollify_samples(y, data.u0, m, eps, y, odd=True)
    u[0] = 0.0
    u[-1] = 0.0
    return validate_initial(InitialData(tau, u, b, theta), grid)


def perturb_initial(data: InitialData, grid: MassGrid, field: str, shape: str,
                    delta: float) -> InitialData:
    """Additive perturbation of one initial field.

    Shapes: "shift" adds a constant, "sine" one full spatial mode (half a
    mode for u0 so the walls stay pinned), "jump" an indicator of the
    right half.  The result is re-validated, so a perturbation that
    breaks positivity is rejected.
    """
    if field not in ("tau0", "u0", "b0", "theta0"):
        raise ConfigError(f"stability.field must name an initial field, got {field!r}")
    if shape not in ("shift", "sine", "jump"):
        raise ConfigError(f"stability.shape must be shift, sine or jump, got {shape!r}")
    if data.a is None:
        data = validate_initial(data, grid)
    x = grid.node_positions if field == "u0" else grid.cell_centers
    if shape == "shift":
        bump = np.full_like(x, delta)
    elif shape == "sine":
        bump = delta * np.sin((np.pi if field == "u0" else 2.0 * np.pi) * x)
    else:
        bump = delta * (x > 0.5).astype(np.float64)
    fields = {name: np.array(getattr(data, name)) for name in ("tau0", "u0", "b0", "theta0")}
    fields[field] = fields[field] + bump
    fields["u0"][0] = 0.0
    fields["u0"][-1] = 0.0
    return validate_initial(InitialData(**fields), grid)


# ---------------------------------------------------------------------------
# Stability of solutions with respect to the initial data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StabilityReport:
    """Measured norms of a perturbation experiment and their ratio."""

    delta: float
    q: float
    r: float
    eps: float
    dtau_sup: float
    du_v2: float
    db_sup: float
    dtheta_lrq: float
    dtau0_sup: float
    db0_sup: float
    du0_l2: float
    dtheta0_l1: float
    lhs_total: float
    rhs_total: float
    ratio: float | None
    uniqueness_violation: bool

    def as_dict(self) -> dict:
        return asdict(self)


def _lr_time(norms: np.ndarray, times: np.ndarray, r: float) -> float:
    if math.isinf(r):
        return float(norms.max())
    if len(norms) == 1:
        return 0.0
    return float(np.trapezoid(norms ** r, times) ** (1.0 / r))


def stability_experiment(base: InitialData, perturbed: InitialData, grid: MassGrid,
                         params: FluidParameters, config: SchemeConfig,
                         spec: NormSpec, eps: float,
                         delta: float | None = None) -> StabilityReport:
    """Run two trajectories and measure the stability norms.

    The left side collects sup |dtau|, |du| in V2 (sup-in-time L2 plus
    L2-in-spacetime of the gradient), sup |db| and |dtheta| in
    L^r(0,T; L^q); the right side the corresponding initial-data norms.
    A vanishing right side with a nonzero left side raises the
    uniqueness-violation flag instead of a ratio.
    """
    require_stability_admissible(spec, eps)
    if base.a is None:
        base = validate_initial(base, grid)
    if perturbed.a is None:
        perturbed = validate_initial(perturbed, grid)
    traj_a, traj_b = run_many([
        lambda: run(base, grid, params, config),
        lambda: run(perturbed, grid, params, config),
    ])
    times = traj_a.times
    if not np.array_equal(times, traj_b.times):
        raise DataValidationError("trajectories disagree on snapshot times")

    h = grid.cell_widths
    m = grid.node_masses
    n_snaps = len(traj_a.states)
    dtau_sup = 0.0
    db_sup = 0.0
    du_l2 = np.empty(n_snaps)
    dux_l2sq = np.empty(n_snaps)
    dtheta_lq = np.empty(n_snaps)
    for k in range(n_snaps):
        sa, sb = traj_a.states[k], traj_b.states[k]
        dtau_sup = max(dtau_sup, float(np.max(np.abs(sa.tau - sb.tau))))
        db_sup = max(db_sup, float(np.max(np.abs(sa.b - sb.b))))
        du = sa.u - sb.u
        du_l2[k] = math.sqrt(float(np.dot(m, du * du)))
        dux = np.diff(du) / h
        dux_l2sq[k] = float(np.dot(h, dux * dux))
        dtheta_lq[k] = spatial_lq(sa.theta - sb.theta, h, spec.q)
    du_v2 = float(du_l2.max())
    if n_snaps > 1:
        du_v2 += math.sqrt(float(np.trapezoid(dux_l2sq, times)))
    dtheta_lrq = _lr_time(dtheta_lq, times, spec.r)

    dtau0_sup = float(np.max(np.abs(base.tau0 - perturbed.tau0)))
    db0_sup = float(np.max(np.abs(base.b0 - perturbed.b0)))
    du0 = base.u0 - perturbed.u0
    du0_l2 = math.sqrt(float(np.dot(m, du0 * du0)))
    dtheta0_l1 = float(np.dot(h, np.abs(base.theta0 - perturbed.theta0)))

    lhs_total = dtau_sup + du_v2 + db_sup + dtheta_lrq
    rhs_total = dtau0_sup + db0_sup + du0_l2 + dtheta0_l1
    ratio = lhs_total / rhs_total if rhs_total > 0.0 else None
    return StabilityReport(
        delta=rhs_total if delta is None else delta,
        q=spec.q, r=spec.r, eps=eps,
        dtau_sup=dtau_sup, du_v2=du_v2, db_sup=db_sup, dtheta_lrq=dtheta_lrq,
        dtau0_sup=dtau0_sup, db0_sup=db0_sup, du0_l2=du0_l2, dtheta0_l1=dtheta0_l1,
        lhs_total=lhs_total, rhs_total=rhs_total, ratio=ratio,
        uniqueness_violation=(rhs_total == 0.0 and lhs_total > 0.0),
    )


# ---------------------------------------------------------------------------
# Self-convergence under grid refinement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldConvergence:
    """Per-field refinement errors and observed orders."""

    h_pairs: tuple[tuple[float, float], ...]
    errors: tuple[float, ...]
    orders: tuple[float, ...]

    @property
    def observed_order(self) -> float:
        return self.orders[-1] if self.orders else math.inf


@dataclass(frozen=True)
class ConvergenceResult:
    fields: dict[str, FieldConvergence]


def _restrict_cells(fine: np.ndarray, h_fine: np.ndarray, h_coarse: np.ndarray) -> np.ndarray:
    weighted = fine * h_fine
    return (weighted[0::2] + weighted[1::2]) / h_coarse


def convergence_study(make_data: Callable[[MassGrid], InitialData],
                      grids: Sequence[MassGrid], params: FluidParameters,
                      config: SchemeConfig) -> ConvergenceResult:
    """Self-convergence orders of tau, u and theta at the final time.

    Requires a ladder of at least three grids, each doubling the cell
    count of the previous one; errors compare each run against the next
    finer one restricted to its grid (h-weighted pair means for cell
    fields, node injection for the velocity).
    """
    if len(grids) < 3:
        raise ConfigError("convergence requires a ladder of at least 3 grids")
    for ga, gb in zip(grids, grids[1:]):
        if gb.n_cells != 2 * ga.n_cells:
            raise ConfigError(
                f"convergence ladder must double the cell count at each level, "
                f"got {ga.n_cells} -> {gb.n_cells}")

    def make_task(grid: MassGrid) -> Callable[[], Trajectory]:
        return lambda: run(validate_initial(make_data(grid), grid), grid, params, config)

    trajectories = run_many([make_task(g) for g in grids])
    finals = [traj.states[-1] for traj in trajectories]

    field_errors: dict[str, list[float]] = {"tau": [], "u": [], "theta": []}
    h_pairs: list[tuple[float, float]] = []
    for coarse, fine in zip(finals, finals[1:]):
        gc, gf = coarse.grid, fine.grid
        h_pairs.append((float(gc.cell_widths.max()), float(gf.cell_widths.max())))
        for name in ("tau", "theta"):
            diff = getattr(coarse, name) - _restrict_cells(
                getattr(fine, name), gf.cell_widths, gc.cell_widths)
            field_errors[name].append(math.sqrt(float(np.dot(gc.cell_widths, diff * diff))))
        du = coarse.u - fine.u[0::2]
        field_errors["u"].append(math.sqrt(float(np.dot(gc.node_masses, du * du))))

    out = {}
    for name, errors in field_errors.items():
        orders = []
        for ec, ef in zip(errors, errors[1:]):
            if ef == 0.0:
                orders.append(math.inf)
            elif ec == 0.0:
                orders.append(-math.inf)
            else:
                orders.append(math.log2(ec / ef))
        out[name] = FieldConvergence(tuple(h_pairs), tuple(errors), tuple(orders))
    return ConvergenceResult(out)
