"""Compiled inner-loop kernels for the staggered-grid scheme.

Everything here is nopython-compiled without fastmath, so results are
IEEE-deterministic and bit-reproducible.  The kernels operate on raw
arrays and report failures through status codes; solver.py owns
validation, error translation and snapshot bookkeeping.

Grid reciprocals (inv_h, inv_hbar, h2 = h*h) are precomputed once per
run so the hot loop stays multiplication-bound.
"""

from __future__ import annotations

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_TAU_NONPOS = 1
STATUS_THETA_NONPOS = 2
STATUS_NEWTON_FAIL = 3


@njit(cache=True, nogil=True)
def cfl_limit(tau, h2, coef):
    """Smallest explicit diffusion-stability limit over cells.

    coef is min(1/(2 mu), cv/(2 kappa)) when the heat step is explicit and
    1/(2 mu) otherwise, so the per-cell limit is tau*h^2*coef.  The caller
    applies the safety factor.
    """
    m = np.inf
    for i in range(tau.shape[0]):
        v = tau[i] * h2[i]
        if v < m:
            m = v
    return m * coef


@njit(cache=True, nogil=True)
def _thomas(low, diag, up, rhs, out, cp, dp):
    # Tridiagonal solve; the heat matrix is strictly diagonally dominant,
    # so no pivoting is needed.
    n = diag.shape[0]
    cp[0] = up[0] / diag[0]
    dp[0] = rhs[0] / diag[0]
    for i in range(1, n):
        den = diag[i] - low[i] * cp[i - 1]
        cp[i] = up[i] / den
        dp[i] = (rhs[i] - low[i] * dp[i - 1]) / den
    out[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        out[i] = dp[i] - cp[i] * out[i + 1]


@njit(cache=True, nogil=True)
def step_arrays(tau, u, theta, a, h, inv_h, inv_hbar,
                R, cv, mu, kappa, dt,
                implicit_theta, newton_tol, newton_max_iter,
                tau_new, u_new, theta_new,
                ux, sigma, psi, source, G,
                low, diag, up, rhs, delta, cp, dp):
    """One time step of the reference update order.

    Fluxes come from the old state; tau advances first, then u with the
    old effective flux, then theta with the old dissipation source and
    the new tau inside the conduction coefficient (harmonic mean of the
    densities of the two adjacent cells, zero-flux mirror faces at the
    walls).  The implicit branch solves backward Euler in increment form,
    in temperature units, so a vanishing right-hand side yields a
    bit-exact zero increment and the residual tolerance is step-size
    independent.

    Returns (status, cell_index, residual, iterations).
    """
    n = tau.shape[0]
    for i in range(n):
        ux[i] = (u[i + 1] - u[i]) * inv_h[i]
        inv_tau = 1.0 / tau[i]
        sigma[i] = (mu * ux[i] - R * theta[i]) * inv_tau
        bi = a[i] * inv_tau
        psi[i] = sigma[i] - 0.5 * bi * bi
        source[i] = sigma[i] * ux[i]

    for i in range(n):
        tau_new[i] = tau[i] + dt * ux[i]
        if not (tau_new[i] > 0.0):
            return STATUS_TAU_NONPOS, i, 0.0, 0

    u_new[0] = 0.0
    u_new[n] = 0.0
    for j in range(1, n):
        u_new[j] = u[j] + dt * (psi[j] - psi[j - 1]) * inv_hbar[j - 1]

    G[0] = 0.0
    G[n] = 0.0
    for j in range(1, n):
        G[j] = kappa * (2.0 / (tau_new[j - 1] + tau_new[j])) * inv_hbar[j - 1]

    lam = dt / cv
    resid = 0.0
    iters = 0
    if implicit_theta:
        for i in range(n):
            fl = G[i] * (theta[i] - theta[i - 1]) if i > 0 else 0.0
            fr = G[i + 1] * (theta[i + 1] - theta[i]) if i < n - 1 else 0.0
            rhs[i] = lam * (source[i] + (fr - fl) * inv_h[i])
            low[i] = -lam * G[i] * inv_h[i]
            up[i] = -lam * G[i + 1] * inv_h[i]
            diag[i] = 1.0 + lam * (G[i] + G[i + 1]) * inv_h[i]
        _thomas(low, diag, up, rhs, delta, cp, dp)
        for i in range(n):
            theta_new[i] = theta[i] + delta[i]
        # The system is linear, so the first pass normally lands at
        # round-off; the loop is the general Newton contract.
        for it in range(newton_max_iter):
            iters = it + 1
            resid = 0.0
            for i in range(n):
                fl = G[i] * (theta_new[i] - theta_new[i - 1]) if i > 0 else 0.0
                fr = G[i + 1] * (theta_new[i + 1] - theta_new[i]) if i < n - 1 else 0.0
                ri = (theta_new[i] - theta[i]) - lam * (source[i] + (fr - fl) * inv_h[i])
                rhs[i] = -ri
                if abs(ri) > resid:
                    resid = abs(ri)
            if resid <= newton_tol:
                break
            if it == newton_max_iter - 1:
                return STATUS_NEWTON_FAIL, -1, resid, iters
            _thomas(low, diag, up, rhs, delta, cp, dp)
            for i in range(n):
                theta_new[i] += delta[i]
    else:
        for i in range(n):
            fl = G[i] * (theta[i] - theta[i - 1]) if i > 0 else 0.0
            fr = G[i + 1] * (theta[i + 1] - theta[i]) if i < n - 1 else 0.0
            theta_new[i] = theta[i] + lam * (source[i] + (fr - fl) * inv_h[i])

    for i in range(n):
        if not (theta_new[i] > 0.0):
            return STATUS_THETA_NONPOS, i, resid, iters
    return STATUS_OK, -1, resid, iters


@njit(cache=True, nogil=True)
def advance_until(tau, u, theta, a, h, inv_h, inv_hbar, h2, cfl_coef,
                  R, cv, mu, kappa,
                  t, t_stop, dt_max, cfl_safety,
                  implicit_theta, newton_tol, newton_max_iter,
                  max_halvings):
    """Advance the fields in place from t to exactly t_stop.

    The step size is cfl_safety times the stability limit, capped at
    dt_max and clipped so the last step lands on t_stop.  A positivity
    failure triggers retries with halved dt up to max_halvings times.

    Returns (status, cell_index, t_reached, n_steps, residual, iterations).
    """
    n = tau.shape[0]
    tau_new = np.empty(n)
    u_new = np.empty(n + 1)
    theta_new = np.empty(n)
    ux = np.empty(n)
    sigma = np.empty(n)
    psi = np.empty(n)
    source = np.empty(n)
    G = np.empty(n + 1)
    low = np.empty(n)
    diag = np.empty(n)
    up = np.empty(n)
    rhs = np.empty(n)
    delta = np.empty(n)
    cp = np.empty(n)
    dp = np.empty(n)

    n_steps = 0
    resid = 0.0
    iters = 0
    while t < t_stop:
        dt = cfl_safety * cfl_limit(tau, h2, cfl_coef)
        if dt > dt_max:
            dt = dt_max
        hit = False
        if dt >= t_stop - t:
            dt = t_stop - t
            hit = True
        status = STATUS_OK
        idx = -1
        for _attempt in range(max_halvings + 1):
            status, idx, resid, iters = step_arrays(
                tau, u, theta, a, h, inv_h, inv_hbar,
                R, cv, mu, kappa, dt,
                implicit_theta, newton_tol, newton_max_iter,
                tau_new, u_new, theta_new,
                ux, sigma, psi, source, G,
                low, diag, up, rhs, delta, cp, dp)
            if status == STATUS_OK or status == STATUS_NEWTON_FAIL:
                break
            dt *= 0.5
            hit = False
        if status != STATUS_OK:
            return status, idx, t, n_steps, resid, iters
        tau[:] = tau_new
        u[:] = u_new
        theta[:] = theta_new
        n_steps += 1
        if hit:
            t = t_stop
        else:
            t = t + dt
    return STATUS_OK, -1, t_stop, n_steps, resid, iters
