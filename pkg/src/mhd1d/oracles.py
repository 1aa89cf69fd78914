"""Post-hoc verification oracles over trajectories.

Everything the solver is supposed to respect is recomputed here from
snapshots alone: conserved integrals, the entropy/dissipation budget,
mixed space-time norms, the exponential representation of the specific
volume, and the weak-form integral identities tested against polynomial
bump functions.

Quadrature conventions: midpoint on cells in space (interior-face sums
for gradient quantities), trapezoid over snapshots in time.  Temperature
gradients use the face difference mirroring the solver stencil, with
zero-flux walls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataValidationError, NormSpecError
from .model import FluidParameters, State, state_flux_psi
from .solver import Trajectory


@dataclass(frozen=True)
class DiagnosticRecord:
    """Per-snapshot conserved quantities, entropy budget, extrema and norms."""

    t: float
    volume: float
    energy: float
    entropy_fn: float
    dissipation_cum: float
    tau_min: float
    tau_max: float
    theta_min: float
    u_l2: float

    FIELDS = ("t", "volume", "energy", "entropy_fn", "dissipation_cum",
              "tau_min", "tau_max", "theta_min", "u_l2")


def volume(state: State) -> float:
    """Total specific volume (physical domain length)."""
    return float(np.dot(state.grid.cell_widths, state.tau))


def internal_energy(state: State, params: FluidParameters) -> float:
    """Thermal energy cv * integral of theta."""
    return params.cv * float(np.dot(state.grid.cell_widths, state.theta))


def total_energy(state: State, params: FluidParameters) -> float:
    """Kinetic + thermal + magnetic energy.

    The kinetic part uses the lumped node masses, which is the quadrature
    the staggered scheme conserves exactly in the semi-discrete limit, so
    the measured drift is pure time-integration error.
    """
    h = state.grid.cell_widths
    m = state.grid.node_masses
    kinetic = 0.5 * float(np.dot(m, state.u * state.u))
    dens = params.cv * state.theta + 0.5 * state.a * state.a / state.tau
    return kinetic + float(np.dot(h, dens))


def entropy_functional(state: State, params: FluidParameters) -> float:
    """Convex distance of (tau, theta) from the unit equilibrium state.

    Each term s - log(s) - 1 is nonnegative; sub-roundoff negatives from
    cancellation near s = 1 are clamped to zero.
    """
    h = state.grid.cell_widths

    def f(s):
        d = s - 1.0
        return np.maximum(d - np.log1p(d), 0.0)

    return float(np.dot(h, params.R * f(state.tau) + params.cv * f(state.theta)))


def _face_theta_x(state: State) -> np.ndarray:
    """Temperature gradient on interior faces, matching the solver stencil."""
    return np.diff(state.theta) / state.grid.interior_node_widths


def dissipation_rate(state: State, params: FluidParameters) -> float:
    """Instantaneous entropy production (sum of squares, nonnegative)."""
    grid = state.grid
    h = grid.cell_widths
    hbar = grid.interior_node_widths
    ux = state.u_x()
    visc = float(np.dot(h, params.mu * ux * ux / (state.tau * state.theta)))
    if grid.n_cells > 1:
        thx = _face_theta_x(state)
        tau_f = 0.5 * (state.tau[:-1] + state.tau[1:])
        th_f = 0.5 * (state.theta[:-1] + state.theta[1:])
        heat = float(np.dot(hbar, params.kappa * thx * thx / (tau_f * th_f * th_f)))
    else:
        heat = 0.0
    return visc + heat


def u_l2(state: State) -> float:
    """Velocity L2 norm with lumped node masses."""
    m = state.grid.node_masses
    return math.sqrt(float(np.dot(m, state.u * state.u)))


def diagnostics(state: State, params: FluidParameters,
                cum_dissipation: float = 0.0) -> DiagnosticRecord:
    """Evaluate every diagnostic on one snapshot.

    The cumulative dissipation is a time integral over the trajectory and
    must be accumulated by the caller (see diagnose_trajectory).
    """
    return DiagnosticRecord(
        t=state.t,
        volume=volume(state),
        energy=total_energy(state, params),
        entropy_fn=entropy_functional(state, params),
        dissipation_cum=cum_dissipation,
        tau_min=float(state.tau.min()),
        tau_max=float(state.tau.max()),
        theta_min=float(state.theta.min()),
        u_l2=u_l2(state),
    )


def diagnose_trajectory(traj: Trajectory) -> list[DiagnosticRecord]:
    """Diagnostics for every snapshot, with trapezoid-accumulated dissipation."""
    params = traj.params
    records = []
    cum = 0.0
    prev_t = None
    prev_rate = None
    for state in traj.states:
        rate = dissipation_rate(state, params)
        if prev_t is not None:
            cum += 0.5 * (state.t - prev_t) * (prev_rate + rate)
        records.append(diagnostics(state, params, cum))
        prev_t, prev_rate = state.t, rate
    return records


# ---------------------------------------------------------------------------
# Mixed space-time norms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormSpec:
    """Exponent pair for an L^r-in-time of L^q-in-space norm."""

    q: float
    r: float

    def __post_init__(self):
        if not (self.q >= 1.0) or not (self.r >= 1.0):
            raise NormSpecError("norm exponents must satisfy q >= 1 and r >= 1")


def require_theta_admissible(spec: NormSpec) -> None:
    """Exponents under which the temperature norm is controlled."""
    if not 1.0 / (2.0 * spec.q) + 1.0 / spec.r > 0.5:
        raise NormSpecError(
            f"(q={spec.q}, r={spec.r}) violates 1/(2q) + 1/r > 1/2 required for theta")


def require_theta_grad_admissible(spec: NormSpec) -> None:
    """Exponents under which the temperature-gradient norm is controlled."""
    if not (1.0 <= spec.q <= 2.0 and 1.0 <= spec.r <= 2.0):
        raise NormSpecError(
            f"(q={spec.q}, r={spec.r}) outside [1,2]x[1,2] required for theta_x")
    if not 1.0 / (2.0 * spec.q) + 1.0 / spec.r > 1.0:
        raise NormSpecError(
            f"(q={spec.q}, r={spec.r}) violates 1/(2q) + 1/r > 1 required for theta_x")


def require_stability_admissible(spec: NormSpec, eps: float) -> None:
    """Exponents of the temperature term in the stability estimate."""
    if not (0.0 < eps < 0.5):
        raise NormSpecError(f"stability exponent eps={eps} outside (0, 1/2)")
    if not spec.q >= 2.0:
        raise NormSpecError(f"stability requires q >= 2, got q={spec.q}")
    target = 0.5 * (1.0 + eps)
    got = 1.0 / (2.0 * spec.q) + 1.0 / spec.r
    if abs(got - target) > 1e-12:
        raise NormSpecError(
            f"(q={spec.q}, r={spec.r}) violates 1/(2q) + 1/r = (1+eps)/2 with eps={eps}")


def spatial_lq(values: np.ndarray, weights: np.ndarray, q: float) -> float:
    """Weighted discrete L^q norm; q = inf takes the max."""
    av = np.abs(values)
    if math.isinf(q):
        return float(av.max()) if av.size else 0.0
    return float(np.dot(weights, av ** q) ** (1.0 / q))


_FIELD_SAMPLERS = {
    "tau": lambda s: (s.tau, s.grid.cell_widths),
    "theta": lambda s: (s.theta, s.grid.cell_widths),
    "b": lambda s: (s.b, s.grid.cell_widths),
    "u": lambda s: (s.u, s.grid.node_masses),
    "u_x": lambda s: (s.u_x(), s.grid.cell_widths),
    "theta_x": lambda s: (_face_theta_x(s), s.grid.interior_node_widths),
}


def mixed_norm(traj: Trajectory, field: str, spec: NormSpec) -> float:
    """Discrete L^r(0,T; L^q) norm of a trajectory field.

    For field "theta" and "theta_x" the exponents are checked against
    their admissible ranges; other fields carry no constraint.
    """
    if field not in _FIELD_SAMPLERS:
        raise DataValidationError(f"unknown field selector '{field}'")
    if field == "theta":
        require_theta_admissible(spec)
    elif field == "theta_x":
        require_theta_grad_admissible(spec)
    sampler = _FIELD_SAMPLERS[field]
    norms = np.array([spatial_lq(*sampler(s), spec.q) for s in traj.states])
    times = traj.times
    if math.isinf(spec.r):
        return float(norms.max())
    if len(norms) == 1:
        return 0.0
    return float(np.trapezoid(norms ** spec.r, times) ** (1.0 / spec.r))


# ---------------------------------------------------------------------------
# Representation of the specific volume and related pointwise oracles
# ---------------------------------------------------------------------------

def j_omega(w: np.ndarray, grid) -> np.ndarray:
    """Cumulative mass integral of w minus its mass average.

    Accepts a cell field (length n) or a node field (length n+1, averaged
    to cells first).  The output lives at cell centers and has zero mass
    average by construction.
    """
    w = np.asarray(w, dtype=np.float64)
    h = grid.cell_widths
    if w.shape == (grid.n_cells + 1,):
        w = 0.5 * (w[:-1] + w[1:])
    elif w.shape != (grid.n_cells,):
        raise DataValidationError("field length matches neither cells nor nodes")
    cumulative = np.cumsum(h * w) - 0.5 * h * w
    return cumulative - np.dot(h, cumulative)


def _phi1(z: np.ndarray) -> np.ndarray:
    """(exp(z) - 1)/z, stable near zero."""
    out = np.ones_like(z)
    nz = np.abs(z) > 1e-14
    out[nz] = np.expm1(z[nz]) / z[nz]
    return out


def representation_residual(traj: Trajectory) -> np.ndarray:
    """Max-norm defect of the exponential specific-volume representation.

    The snapshot fields must satisfy, cell by cell, the closure
    tau(t) = B(t) * [tau(0) + int_0^t K/B], with B the exponential of the
    running time integral of the effective flux over mu and
    K = (R*theta + a^2/(2 tau))/mu.  The running integral is trapezoid
    (piecewise linear), and each panel of the inner integral uses the
    exact integral of that exponential against the panel-mean K, so
    time-constant states telescope to round-off.  Returns one residual
    per snapshot; the first is identically zero.
    """
    if len(traj.states) < 2:
        raise DataValidationError("representation residual needs at least 2 snapshots")
    params = traj.params
    mu = params.mu
    states = traj.states
    tau0 = states[0].tau
    psi_prev = state_flux_psi(states[0], params)
    k_prev = (params.R * states[0].theta + 0.5 * states[0].a ** 2 / states[0].tau) / mu
    cum = np.zeros_like(tau0)      # running integral of psi
    inner = np.zeros_like(tau0)    # running integral of K * exp(-cum/mu)
    out = np.empty(len(states))
    out[0] = float(np.max(np.abs(states[0].tau - tau0)))
    for k in range(1, len(states)):
        s = states[k]
        dt = s.t - states[k - 1].t
        psi_k = state_flux_psi(s, params)
        k_k = (params.R * s.theta + 0.5 * s.a ** 2 / s.tau) / mu
        psi_bar = 0.5 * (psi_prev + psi_k)
        k_bar = 0.5 * (k_prev + k_k)
        inner = inner + k_bar * dt * np.exp(-cum / mu) * _phi1(-psi_bar * dt / mu)
        cum = cum + psi_bar * dt
        rhs = np.exp(cum / mu) * (tau0 + inner)
        out[k] = float(np.max(np.abs(s.tau - rhs)))
        psi_prev, k_prev = psi_k, k_k
    return out


def unit_density_point(state: State) -> float:
    """Leftmost mass coordinate where the interpolated tau crosses one.

    The piecewise-linear interpolant runs through the cell-center values
    with constant extension to the walls; existence is guaranteed when
    the mass average of tau is one.
    """
    grid = state.grid
    xs = np.concatenate(([0.0], grid.cell_centers, [1.0]))
    vs = np.concatenate(([state.tau[0]], state.tau, [state.tau[-1]]))
    f = vs - 1.0
    for k in range(len(xs) - 1):
        if f[k] == 0.0:
            return float(xs[k])
        if f[k] * f[k + 1] < 0.0:
            return float(xs[k] + (0.0 - f[k]) * (xs[k + 1] - xs[k]) / (f[k + 1] - f[k]))
    if f[-1] == 0.0:
        return float(xs[-1])
    return float(xs[int(np.argmin(np.abs(f)))])


# ---------------------------------------------------------------------------
# Weak-form residuals
# ---------------------------------------------------------------------------

def _bump(s: np.ndarray) -> np.ndarray:
    inside = np.abs(s) < 1.0
    return np.where(inside, (1.0 - s * s) ** 4, 0.0)


def _bump_prime(s: np.ndarray) -> np.ndarray:
    inside = np.abs(s) < 1.0
    return np.where(inside, -8.0 * s * (1.0 - s * s) ** 3, 0.0)


@dataclass(frozen=True)
class TestFunction:
    """Separable polynomial bump (1-s^2)^4 in space and time.

    kind "interior" requires the spatial support strictly inside (0, 1);
    kind "boundary" may be nonzero at the walls.  Either kind must vanish
    at the end of the observation window (checked at evaluation time).
    """

    x0: float
    t0: float
    rx: float
    rt: float
    kind: str = "interior"

    def __post_init__(self):
        if self.kind not in ("interior", "boundary"):
            raise DataValidationError("test function kind must be 'interior' or 'boundary'")
        if not (self.rx > 0.0 and self.rt > 0.0):
            raise DataValidationError("test function radii must be strictly positive")
        if self.kind == "interior" and not (self.x0 - self.rx > 0.0 and self.x0 + self.rx < 1.0):
            raise DataValidationError(
                "interior test function support must stay strictly inside (0, 1)")

    def value(self, x, t: float):
        return _bump((np.asarray(x) - self.x0) / self.rx) * _bump(
            np.array((t - self.t0) / self.rt))

    def d_dx(self, x, t: float):
        sx = (np.asarray(x) - self.x0) / self.rx
        return _bump_prime(sx) / self.rx * _bump(np.array((t - self.t0) / self.rt))

    def d_dt(self, x, t: float):
        st = np.array((t - self.t0) / self.rt)
        return _bump((np.asarray(x) - self.x0) / self.rx) * _bump_prime(st) / self.rt

    def as_dict(self) -> dict:
        return {"kind": self.kind, "x0": self.x0, "t0": self.t0,
                "rx": self.rx, "rt": self.rt}


def _check_time_support(phi: TestFunction, t_final: float) -> None:
    if phi.t0 + phi.rt > t_final + 1e-12:
        raise DataValidationError(
            f"test function support reaches t={phi.t0 + phi.rt}, beyond the "
            f"trajectory window ending at t={t_final}")


def weak_momentum_residual(traj: Trajectory, phi: TestFunction) -> float:
    """Signed quadrature defect of the weak momentum identity.

    Integrates u phi_t - psi phi_x over mass and time plus the initial
    velocity term; an exact weak solution makes this vanish.
    """
    if phi.kind != "interior":
        raise DataValidationError("the momentum identity requires an interior test function")
    times = traj.times
    _check_time_support(phi, float(times[-1]))
    params = traj.params
    xc = traj.grid.cell_centers
    h = traj.grid.cell_widths
    vals = np.empty(len(traj.states))
    for k, s in enumerate(traj.states):
        psi = state_flux_psi(s, params)
        vals[k] = np.dot(h, s.u_cell() * phi.d_dt(xc, s.t)) \
            - np.dot(h, psi * phi.d_dx(xc, s.t))
    s0 = traj.states[0]
    initial = float(np.dot(h, s0.u_cell() * phi.value(xc, 0.0)))
    return float(np.trapezoid(vals, times)) + initial


def weak_energy_residual(traj: Trajectory, phi: TestFunction) -> float:
    """Signed quadrature defect of the weak thermal-energy identity.

    Integrates cv theta phi_t - kappa rho theta_x phi_x + sigma u_x phi
    plus the initial temperature term.  Test functions may be nonzero at
    the walls (the insulated boundary carries no flux).
    """
    times = traj.times
    _check_time_support(phi, float(times[-1]))
    params = traj.params
    grid = traj.grid
    xc = grid.cell_centers
    h = grid.cell_widths
    y_int = grid.node_positions[1:-1]
    vals = np.empty(len(traj.states))
    for k, s in enumerate(traj.states):
        ux = s.u_x()
        sigma = (params.mu * ux - params.R * s.theta) / s.tau
        acc = float(np.dot(h, params.cv * s.theta * phi.d_dt(xc, s.t)))
        acc += float(np.dot(h, sigma * ux * phi.value(xc, s.t)))
        if grid.n_cells > 1:
            dth = np.diff(s.theta)
            rho_f = 2.0 / (s.tau[:-1] + s.tau[1:])
            # hbar * rho_f * (dth/hbar) collapses to rho_f * dth
            acc -= float(np.sum(params.kappa * rho_f * dth * phi.d_dx(y_int, s.t)))
        vals[k] = acc
    s0 = traj.states[0]
    initial = float(np.dot(h, params.cv * s0.theta * phi.value(xc, 0.0)))
    return float(np.trapezoid(vals, times)) + initial
