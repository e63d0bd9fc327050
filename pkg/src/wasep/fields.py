"""Fluctuation fields and microscopic transforms evaluated on states.

Everything here is a pure function of a snapshot or an event-level
trajectory record; the compiled engine maintains some of the same
quantities incrementally, and the tests hold both routes together.

Conventions: sites live at x/n for x = 1..n-1, heights at x = 1..n
with h(x) = h1 + sum_{y<x}(eta(y) - rho); ghost occupations eta(0) =
eta(n) = rho appear only inside rate formulas.  Test function grids are
always passed as values, produced by the spectral module so every
caller agrees on them bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from wasep.core import HeightState, SimParams, apply_channel, channel_rates_array


@dataclass(frozen=True)
class DriftConstants:
    """Centering and exponential-transform constants for one (n, E).

    theta_t is theta_n / sqrt(n), so exp(theta_t) = 1 + E/sqrt(n)
    exactly; lambda_n is the rate per microscopic time unit that keeps
    the exponential field mean-stationary.  alpha_n -> E^2/8 and
    D_n -> 1 as n grows; at E = 0 the transform degenerates and the
    constants take their limits (lambda_n = alpha_n = 0, D_n = 1).
    """

    n: int
    E: float
    c_n: float
    chi: float
    theta_n: float
    theta_t: float
    lambda_n: float
    a_n: float
    b_n: float
    alpha_n: float
    D_n: float


def drift_constants(params: SimParams) -> DriftConstants:
    """Constants for params; the exponential block uses the sqrt(n) bias."""
    return drift_constants_ne(params.n, params.E, chi=params.chi, c_n=params.c_n)


def drift_constants_ne(n: int, E: float, chi: float = 0.25, c_n: float | None = None) -> DriftConstants:
    """Same as drift_constants but from bare (n, E); c_n defaults to gamma=1/2."""
    sqrt_n = math.sqrt(float(n))
    if c_n is None:
        c_n = -chi * E * n**1.5
    if E == 0.0:
        return DriftConstants(
            n=n, E=E, c_n=c_n, chi=chi, theta_n=0.0, theta_t=0.0,
            lambda_n=0.0, a_n=0.0, b_n=0.0, alpha_n=0.0, D_n=1.0,
        )
    theta_t = math.log1p(E / sqrt_n)
    a_n = -2.0 * math.sinh(0.5 * theta_t)
    b_n = math.expm1(0.5 * theta_t)
    lambda_n = -(E / a_n) * b_n * b_n * math.exp(-0.5 * theta_t) / sqrt_n
    d_n = -E / (a_n * sqrt_n)
    # alpha_n = n lambda_n - (E sqrt n / 2)(2 - e^{theta/2} - e^{-theta/2})/a_n
    alpha_n = n * lambda_n - 0.5 * E * sqrt_n * (2.0 - 2.0 * math.cosh(0.5 * theta_t)) / a_n
    return DriftConstants(
        n=n, E=E, c_n=c_n, chi=chi, theta_n=sqrt_n * theta_t, theta_t=theta_t,
        lambda_n=lambda_n, a_n=a_n, b_n=b_n, alpha_n=alpha_n, D_n=d_n,
    )


# ---------------------------------------------------------------------------
# fields from snapshots


def density_field(eta: NDArray, phi_grid: NDArray, params: SimParams) -> float:
    """(1/sqrt n) sum_x phi(x/n) (eta(x) - rho), x = 1..n-1."""
    eta = np.asarray(eta)
    phi_grid = np.asarray(phi_grid, dtype=np.float64)
    if eta.shape != (params.num_sites,) or phi_grid.shape != (params.num_sites,):
        raise ValueError(f"need occupancy and grid of length {params.num_sites}")
    return float(phi_grid @ (eta - params.rho) / math.sqrt(params.n))


def height_field(state: HeightState, phi_grid: NDArray, consts: DriftConstants) -> float:
    """n^{-3/2} sum_{x=1}^n phi(x/n) (h(x) - c_n t)."""
    n = state.params.n
    phi_grid = np.asarray(phi_grid, dtype=np.float64)
    if phi_grid.shape != (n,):
        raise ValueError(f"need grid values at x/n for x = 1..n ({n})")
    centered = state.heights() - consts.c_n * state.t_macro
    return float(phi_grid @ centered * n**-1.5)


def bg_average(x: int, ell: int, eta: NDArray, chi: float, rho: float = 0.5) -> float:
    """Centered squared window mean Q(x, ell): (mean eta-bar)^2 - chi/ell.

    The window is the ell sites right of x when x <= n-2 ell-1, the
    ell sites left of x otherwise, so it never sticks out of the
    lattice for ell < n/4.
    """
    eta = np.asarray(eta)
    n = eta.shape[0] + 1
    if not 1 <= x <= n - 2:
        raise ValueError(f"site x must be in 1..{n - 2}")
    if not 1 <= ell < n / 4:
        raise ValueError("window must satisfy 1 <= ell < n/4")
    if x <= n - 2 * ell - 1:
        window = eta[x : x + ell]  # sites x+1 .. x+ell
    else:
        window = eta[x - ell - 1 : x - 1]  # sites x-ell .. x-1
    m = float(window.mean()) - rho
    return m * m - chi / ell


def cole_hopf_field(state: HeightState, consts: DriftConstants) -> NDArray[np.float64]:
    """xi(x) = exp(theta_t h(x) + lambda_n tau), x = 1..n, log-domain inside."""
    tau = state.t_macro * state.params.n**2
    log_xi = consts.theta_t * state.heights() + consts.lambda_n * tau
    return np.exp(log_xi)


def current_field(state: HeightState, phi_grid: NDArray, consts: DriftConstants) -> float:
    """J(phi) = (1/n) sum_{x=1}^n phi(x/n) xi(x)."""
    n = state.params.n
    phi_grid = np.asarray(phi_grid, dtype=np.float64)
    if phi_grid.shape != (n,):
        raise ValueError(f"need grid values at x/n for x = 1..n ({n})")
    return float(phi_grid @ cole_hopf_field(state, consts) / n)


def colehopf_mean_profile(consts: DriftConstants) -> NDArray[np.float64]:
    """E[xi_0(x)] = cosh(theta_t/2)^{x-1} under the rho=1/2 product measure."""
    x = np.arange(consts.n, dtype=np.float64)
    return np.cosh(0.5 * consts.theta_t) ** x


def renormalized_square(z_vals: NDArray, phi_vals: NDArray, grid: NDArray, eps: float) -> float:
    """int_0^1 ((grad_eps Z)(u)^2 - 1/(4 eps)) phi(u) du by trapezoid rule.

    grad_eps is the forward difference (Z(u+eps)-Z(u))/eps for
    u < 1-2 eps and the backward one after; eps must be a whole number
    of grid cells.
    """
    if not 0.0 < eps < 0.25:
        raise ValueError("mollification scale must lie in (0, 1/4)")
    z = np.asarray(z_vals, dtype=np.float64)
    phi = np.asarray(phi_vals, dtype=np.float64)
    grid = np.asarray(grid, dtype=np.float64)
    if z.shape != grid.shape or phi.shape != grid.shape:
        raise ValueError("profile, weight and grid must share a shape")
    cells = grid.shape[0] - 1
    shift = eps * cells
    k = int(round(shift))
    if k < 1 or abs(shift - k) > 1e-9 * cells:
        raise ValueError("eps must be a whole number of grid cells")
    grad = np.empty_like(z)
    fwd = grid < 1.0 - 2.0 * eps
    idx = np.arange(cells + 1)
    up = np.minimum(idx + k, cells)
    down = np.maximum(idx - k, 0)
    grad[fwd] = (z[up[fwd]] - z[idx[fwd]]) / eps
    grad[~fwd] = (z[idx[~fwd]] - z[down[~fwd]]) / eps
    integrand = (grad * grad - 0.25 / eps) * phi
    return float(np.trapezoid(integrand, grid))


# ---------------------------------------------------------------------------
# per-channel jumps of fields (feed the compiled kernels, replayed in tests)


def channel_field_deltas(phi_grid: NDArray, params: SimParams) -> NDArray[np.float64]:
    """Jump of (1/sqrt n) sum phi eta-bar for each transition channel."""
    phi = np.asarray(phi_grid, dtype=np.float64)
    if phi.shape != (params.num_sites,):
        raise ValueError(f"need grid values of length {params.num_sites}")
    inv = 1.0 / math.sqrt(params.n)
    d = np.zeros(params.num_channels)
    nb = params.num_bonds
    # rightward swap at bond b moves mass from index b to b+1
    d[0 : 2 * nb : 2] = (phi[1:] - phi[:-1]) * inv
    d[1 : 2 * nb : 2] = -(phi[1:] - phi[:-1]) * inv
    base = 2 * nb
    d[base + 0] = phi[0] * inv
    d[base + 1] = -phi[0] * inv
    d[base + 2] = -phi[-1] * inv
    d[base + 3] = phi[-1] * inv
    return d


def qv_rate_exact(eta: NDArray, phi_grid: NDArray, params: SimParams) -> float:
    """Predictable quadratic-variation rate sum_c rate_c (dY_c)^2 (micro clock)."""
    rates = channel_rates_array(eta, params)
    d = channel_field_deltas(phi_grid, params)
    return float(rates @ (d * d))


def qv_rate_smoothed(eta: NDArray, phi_grid: NDArray, params: SimParams) -> float:
    """Bond-symmetrized variant: (1+eps)(a+b) per bond, exact at the ends.

    Equals qv_rate_exact plus eps times the leftward-jump contribution;
    the difference vanishes with eps and is tracked separately by the
    engine so both versions can be reported.
    """
    rates = channel_rates_array(eta, params)
    d = channel_field_deltas(phi_grid, params)
    q = d * d
    extra = 0.0
    nb = params.num_bonds
    for b in range(nb):
        extra += rates[2 * b + 1] * q[2 * b + 1]
    return float(rates @ q) + params.eps * extra


# ---------------------------------------------------------------------------
# exponential-transform generator block


def tn_apply(xi: NDArray, consts: DriftConstants) -> NDArray[np.float64]:
    """Boundary-corrected discrete heat operator on a height exponential.

    Interior rows are D_n times the discrete Laplacian n^2 (xi(x+1) -
    2 xi(x) + xi(x-1)); the end rows trade the missing neighbor for the
    Robin-type zeroth-order term n alpha_n xi.
    """
    xi = np.asarray(xi, dtype=np.float64)
    n = consts.n
    if xi.shape != (n,):
        raise ValueError(f"need xi values at x = 1..n ({n})")
    n2 = float(n) ** 2
    out = np.empty(n)
    out[1:-1] = consts.D_n * n2 * (xi[2:] - 2.0 * xi[1:-1] + xi[:-2])
    out[0] = n * consts.alpha_n * xi[0] + consts.D_n * n2 * (xi[1] - xi[0])
    out[-1] = n * consts.alpha_n * xi[-1] - consts.D_n * n2 * (xi[-1] - xi[-2])
    return out


def generator_on_colehopf(state: HeightState, consts: DriftConstants) -> NDArray[np.float64]:
    """n^2 (L + lambda_n) applied to xi, evaluated channel by channel.

    Each channel moves exactly one height coordinate by +-1, scaling
    that xi entry by e^{+-theta_t}; summing rate times increment gives
    L xi pointwise.  Matches tn_apply exactly at rho = 1/2 for every
    configuration, which is the identity the transform is built on.
    """
    params = state.params
    n = params.n
    xi = cole_hopf_field(state, consts)
    rates = channel_rates_array(state.eta, params)
    up = math.exp(consts.theta_t) - 1.0
    dn = math.exp(-consts.theta_t) - 1.0
    gen = np.zeros(n)
    nb = params.num_bonds
    for b in range(nb):
        x = b + 2  # height coordinate moved by bond b
        gen[x - 1] += rates[2 * b] * xi[x - 1] * dn  # rightward jump lowers h(x)
        gen[x - 1] += rates[2 * b + 1] * xi[x - 1] * up
    base = 2 * nb
    gen[0] += rates[base + 0] * xi[0] * dn + rates[base + 1] * xi[0] * up
    gen[n - 1] += rates[base + 2] * xi[n - 1] * dn + rates[base + 3] * xi[n - 1] * up
    return float(n) ** 2 * (gen + consts.lambda_n * xi)


def colehopf_qv_rate(state: HeightState, phi_grid: NDArray, consts: DriftConstants) -> float:
    """Predictable QV rate of J(phi) on the micro clock, channel by channel."""
    params = state.params
    n = params.n
    xi = cole_hopf_field(state, consts)
    rates = channel_rates_array(state.eta, params)
    up = math.exp(consts.theta_t) - 1.0
    dn = math.exp(-consts.theta_t) - 1.0
    phi = np.asarray(phi_grid, dtype=np.float64)
    acc = 0.0
    nb = params.num_bonds
    for b in range(nb):
        x = b + 2
        pz = phi[x - 1] * xi[x - 1] / n
        acc += rates[2 * b] * (pz * dn) ** 2 + rates[2 * b + 1] * (pz * up) ** 2
    base = 2 * nb
    pz = phi[0] * xi[0] / n
    acc += rates[base + 0] * (pz * dn) ** 2 + rates[base + 1] * (pz * up) ** 2
    pz = phi[n - 1] * xi[n - 1] / n
    acc += rates[base + 2] * (pz * dn) ** 2 + rates[base + 3] * (pz * up) ** 2
    return acc


def colehopf_compensator_coeffs(phi_full: NDArray, consts: DriftConstants) -> tuple[float, float]:
    """Boundary weights (cL, cR) of the summed generator action.

    Summation by parts turns (1/n) sum_x phi_x (T_n xi)_x into
    D_n (1/n) sum_x (lap_copy phi)_x xi_x + cL xi(1)/n + cR xi(n)/n,
    exactly, for any xi; phi_full holds grid values at x = 0..n.
    """
    n = consts.n
    phi_full = np.asarray(phi_full, dtype=np.float64)
    if phi_full.shape != (n + 1,):
        raise ValueError(f"need grid values at x/n for x = 0..n ({n + 1})")
    n2 = float(n) ** 2
    cl = n * consts.alpha_n * phi_full[1] + consts.D_n * n2 * (phi_full[1] - phi_full[0])
    cr = n * consts.alpha_n * phi_full[n] + consts.D_n * n2 * (
        3.0 * phi_full[n - 1] - 2.0 * phi_full[n] - phi_full[n - 2])
    return float(cl), float(cr)


# ---------------------------------------------------------------------------
# grid bundles consumed by the compiled kernels


@dataclass(frozen=True)
class MartInputs:
    """Test-function grids and per-channel jumps for the density field."""

    phi: NDArray[np.float64]      # phi(x/n), x = 1..n-1
    lapphi: NDArray[np.float64]   # discrete Laplacian, same sites
    d_phi: NDArray[np.float64]    # per-channel jump of the field
    d_lap: NDArray[np.float64]
    qw: NDArray[np.float64]       # d_phi squared
    gbond: NDArray[np.float64]    # forward gradient at the n-2 bonds


def mart_inputs(params: SimParams, mode: int) -> MartInputs:
    """Everything the density-field kernel needs for sine mode `mode`."""
    from wasep import spectral

    n = params.n
    full = spectral.sine_mode(mode, np.arange(n + 1) / n)
    phi = full[1:-1].copy()
    lapphi = spectral.lap(full, n)
    d_phi = channel_field_deltas(phi, params)
    d_lap = channel_field_deltas(lapphi, params)
    return MartInputs(phi=phi, lapphi=lapphi, d_phi=d_phi, d_lap=d_lap,
                      qw=d_phi * d_phi, gbond=spectral.grad_plus(full, n)[1:-1].copy())


@dataclass(frozen=True)
class ColeHopfInputs:
    """Grids and boundary weights for the exponential-field kernel."""

    phi_full: NDArray[np.float64]  # x = 0..n
    phi: NDArray[np.float64]       # x = 1..n
    lapphi: NDArray[np.float64]    # copy-ended Laplacian, x = 1..n
    c_left: float
    c_right: float


def colehopf_inputs(params: SimParams, consts: DriftConstants, mode: int = 0) -> ColeHopfInputs:
    """Cosine-mode grids for the exponential field (mode 0 is flat)."""
    from wasep import spectral

    n = params.n
    full = spectral.cosine_mode(mode, np.arange(n + 1) / n)
    cl, cr = colehopf_compensator_coeffs(full, consts)
    return ColeHopfInputs(phi_full=full, phi=full[1:].copy(),
                          lapphi=spectral.lap_copy(full, n), c_left=cl, c_right=cr)


# ---------------------------------------------------------------------------
# event-level replay (reference route for the compiled kernels)


@dataclass(frozen=True)
class EventRecord:
    """An exact trajectory: initial state plus every (time, channel)."""

    params: SimParams
    eta0: NDArray[np.int8]
    times_micro: NDArray[np.float64]
    channels: NDArray[np.int64]


def compensators(rec: EventRecord, phi_grid: NDArray, lapphi_grid: NDArray,
                 at_times_macro) -> dict[str, NDArray[np.float64]]:
    """Density field and its drift/noise compensators along a trajectory.

    Integrals are exact over the jump chain (piecewise-constant
    integrands).  Returns arrays over the requested macroscopic times:
    y, i (Laplacian drift integral), a_raw (the gradient pairing
    integral without its E prefactor), a = E a_raw, m = y - y0 -
    (1 + E/(2 n^gamma)) i - a, qv_emp, and qv_pred (exact channel
    rates).  a is the term that closes the decomposition; a_raw is
    exposed because the approximation arguments reuse it.
    """
    params = rec.params
    n = params.n
    phi = np.asarray(phi_grid, dtype=np.float64)
    lap = np.asarray(lapphi_grid, dtype=np.float64)
    at = np.asarray(at_times_macro, dtype=np.float64)
    d_phi = channel_field_deltas(phi, params)
    d_lap = channel_field_deltas(lap, params)
    grad = (phi[1:] - phi[:-1]) * n  # forward gradient at bonds

    eta = rec.eta0.astype(np.float64).copy()
    sqrt_n = math.sqrt(n)
    y = float(phi @ (eta - params.rho)) / sqrt_n
    ylap = float(lap @ (eta - params.rho)) / sqrt_n
    p = float(grad @ ((eta[:-1] - params.rho) * (eta[1:] - params.rho)))
    y0 = y

    targets_micro = at * n**2
    out = {k: np.zeros(at.shape[0]) for k in
           ("y", "i", "a_raw", "a", "m", "qv_emp", "qv_pred")}
    i_lap = 0.0
    i_p = 0.0
    qv_emp = 0.0
    qv_pred = 0.0
    tau = 0.0
    ev = 0
    n_ev = rec.times_micro.shape[0]
    eta_i8 = rec.eta0.copy()
    srate = qv_rate_exact(eta_i8, phi, params)
    for k, target in enumerate(targets_micro):
        while ev < n_ev and rec.times_micro[ev] <= target:
            dt = rec.times_micro[ev] - tau
            i_lap += ylap * dt
            i_p += p * dt
            qv_pred += srate * dt
            tau = rec.times_micro[ev]
            c = int(rec.channels[ev])
            apply_channel(eta_i8, c, params)
            y += d_phi[c]
            ylap += d_lap[c]
            qv_emp += d_phi[c] ** 2
            eta = eta_i8.astype(np.float64)
            p = float(grad @ ((eta[:-1] - params.rho) * (eta[1:] - params.rho)))
            srate = qv_rate_exact(eta_i8, phi, params)
            ev += 1
        dt = target - tau
        i_lap += ylap * dt
        i_p += p * dt
        qv_pred += srate * dt
        tau = target
        i_t = i_lap / n**2
        a_raw = -(n**0.5 / n**params.gamma) * i_p / n**2
        out["y"][k] = y
        out["i"][k] = i_t
        out["a_raw"][k] = a_raw
        out["a"][k] = params.E * a_raw
        out["m"][k] = y - y0 - (1.0 + 0.5 * params.eps) * i_t - params.E * a_raw
        out["qv_emp"][k] = qv_emp
        out["qv_pred"][k] = qv_pred
    return out
