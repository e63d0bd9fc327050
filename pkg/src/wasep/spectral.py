"""Spectral toolbox on the unit interval.

Laplacian eigenbases with absorbing (sine) or reflecting (cosine)
endpoints, the associated heat kernels, the antiderivative kernel
``theta``, the variance constant ``k_eps`` built from it, one-sided
approximation-of-identity windows, discrete difference operators on
the lattice {0, 1/n, ..., 1}, and mode-space Sobolev norms.

Conventions:

- Kernels solve d/dt p = p'' (full Laplacian, not half), so the
  spatial scale at time t is sqrt(2 t).
- Eigen-series are truncated at ``mode_cutoff(t)``, which keeps every
  dropped weight e^{-t pi^2 k^2} below 1e-12.
- Integrals use the composite trapezoid rule on a 2^12-interval
  uniform grid with one Richardson extrapolation step.
- ``sine_mode`` / ``cosine_mode`` are the exact evaluation entry
  points; lattice modules evaluate test functions through them so
  grid values agree bit-for-bit across the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

QUAD_CELLS: int = 1 << 12


def mode_cutoff(t: float) -> int:
    """Truncation index for series with weights e^{-t pi^2 k^2}.

    Returns the smallest K with e^{-t pi^2 K^2} < 1e-12, plus a
    two-mode margin so that the whole dropped tail stays below 1e-12.
    """
    if t <= 0.0:
        raise ValueError("series parameter must be positive")
    return max(1, math.ceil(math.sqrt(12.0 * math.log(10.0) / (t * math.pi**2)))) + 2


def sine_mode(m: int, x: NDArray | float) -> NDArray:
    """L2-normalized sine eigenmode sqrt(2) sin(m pi x), m >= 1."""
    return np.sqrt(2.0) * np.sin(m * np.pi * np.asarray(x, dtype=np.float64))


def cosine_mode(m: int, x: NDArray | float) -> NDArray:
    """L2-normalized cosine eigenmode; mode 0 is the constant 1."""
    x = np.asarray(x, dtype=np.float64)
    if m == 0:
        return np.ones_like(x)
    return np.sqrt(2.0) * np.cos(m * np.pi * x)


@dataclass(frozen=True)
class BasisFn:
    """One Laplacian eigenmode on [0, 1].

    kind "sine": vanishes at both endpoints; kind "cosine": flat at
    both endpoints.  Eigenvalue of -Lap is (m pi)^2 either way.
    """

    kind: str
    m: int

    def __post_init__(self) -> None:
        if self.kind not in ("sine", "cosine"):
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if self.m < (1 if self.kind == "sine" else 0):
            raise ValueError(f"mode index {self.m} out of range for {self.kind}")

    @property
    def eigenvalue(self) -> float:
        return (self.m * np.pi) ** 2

    def __call__(self, x: NDArray | float) -> NDArray:
        if self.kind == "sine":
            return sine_mode(self.m, x)
        return cosine_mode(self.m, x)


def quad_grid(cells: int = QUAD_CELLS, lo: float = 0.0, hi: float = 1.0) -> NDArray:
    """Uniform quadrature grid with an even number of intervals."""
    if cells % 2:
        raise ValueError("cells must be even for Richardson extrapolation")
    return np.linspace(lo, hi, cells + 1)


def integrate(vals: NDArray, grid: NDArray, axis: int = -1) -> NDArray | float:
    """Trapezoid rule on a uniform grid, Richardson-extrapolated once.

    The coarse pass reuses every second sample; the extrapolated value
    I_f + (I_f - I_c)/3 cancels the h^2 error term (composite Simpson),
    so smooth integrands converge at fourth order.
    """
    vals = np.asarray(vals, dtype=np.float64)
    if vals.shape[axis] != grid.shape[0]:
        raise ValueError("sample count does not match grid")
    if (grid.shape[0] - 1) % 2:
        raise ValueError("grid must have an even number of intervals")
    h = grid[1] - grid[0]
    fine = np.trapezoid(vals, dx=h, axis=axis)
    idx = [slice(None)] * vals.ndim
    idx[axis] = slice(None, None, 2)
    coarse = np.trapezoid(vals[tuple(idx)], dx=2.0 * h, axis=axis)
    out = fine + (fine - coarse) / 3.0
    return float(out) if np.ndim(out) == 0 else out


def _mode_weights(t: float) -> tuple[NDArray, NDArray]:
    k = np.arange(1, mode_cutoff(t) + 1, dtype=np.float64)
    return k, np.exp(-t * np.pi**2 * k**2)


def heat_kernel(kind: str, t: float, u: NDArray | float, v: NDArray | float) -> NDArray:
    """Heat kernel p_t(u, v) with absorbing or reflecting endpoints.

    kind "dirichlet": sum_k 2 e^{-t pi^2 k^2} sin(k pi u) sin(k pi v);
    kind "neumann": 1 + the analogous cosine sum.  Symmetric in (u, v),
    broadcasts over array arguments.
    """
    if t <= 0.0:
        raise ValueError("kernel time must be positive")
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nd = max(u.ndim, v.ndim)
    k, w = _mode_weights(t)
    k = k.reshape((-1,) + (1,) * nd)
    w = w.reshape((-1,) + (1,) * nd)
    if kind == "dirichlet":
        out = (2.0 * w * np.sin(k * np.pi * u) * np.sin(k * np.pi * v)).sum(axis=0)
    elif kind == "neumann":
        out = 1.0 + (2.0 * w * np.cos(k * np.pi * u) * np.cos(k * np.pi * v)).sum(axis=0)
    else:
        raise ValueError(f"unknown kernel kind {kind!r}")
    return out


def dirichlet_mass(t: float, u: NDArray | float) -> NDArray:
    """Exact total mass of the absorbing kernel, sum over odd modes.

    Integrating the sine series in v gives
    sum_{k odd} 4 e^{-t pi^2 k^2} sin(k pi u)/(k pi); the defect
    1 - mass is the probability of absorption by time t.
    """
    if t <= 0.0:
        raise ValueError("kernel time must be positive")
    u = np.asarray(u, dtype=np.float64)
    k, w = _mode_weights(t)
    odd = k[(k.astype(np.int64) % 2) == 1]
    wodd = w[(k.astype(np.int64) % 2) == 1]
    kk = odd.reshape((-1,) + (1,) * u.ndim)
    ww = wodd.reshape((-1,) + (1,) * u.ndim)
    return (4.0 * ww * np.sin(kk * np.pi * u) / (kk * np.pi)).sum(axis=0)


@dataclass(frozen=True)
class KernelTable:
    """Kernel values tabulated on a fixed grid; immutable once built.

    values[i, j] holds kernel(grid[i], grid[j]); for kind "theta" the
    first index is the base point u.
    """

    kind: str
    par: float
    grid: NDArray[np.float64]
    values: NDArray[np.float64]
    cutoff: int


def kernel_table(kind: str, par: float, grid: NDArray) -> KernelTable:
    """Tabulate a heat kernel or theta kernel over grid x grid."""
    grid = np.asarray(grid, dtype=np.float64)
    if kind in ("dirichlet", "neumann"):
        if par <= 0.0:
            raise ValueError("kernel time must be positive")
        k, w = _mode_weights(par)
        if kind == "dirichlet":
            s = np.sin(np.outer(k, np.pi * grid))
            vals = (2.0 * w[:, None] * s).T @ s
        else:
            c = np.cos(np.outer(k, np.pi * grid))
            vals = 1.0 + (2.0 * w[:, None] * c).T @ c
        return KernelTable(kind, par, grid, vals, k.shape[0])
    if kind == "theta":
        vals = theta(par, grid[:, None], grid[None, :])
        cut = 0 if par == 0.0 else mode_cutoff(par)
        return KernelTable(kind, par, grid, vals, cut)
    raise ValueError(f"unknown kernel kind {kind!r}")


def theta(eps: float, u: NDArray | float, v: NDArray | float) -> NDArray:
    """Antiderivative kernel theta^eps_u(v).

    theta^0_u(v) = 1_{[0,u]}(v) + v - 1 in closed form (never the
    series, which would only converge to the jump midpoint).  For
    eps > 0, the absorbing-end smoothing
    sum_l e^{-eps pi^2 l^2} (-2/(l pi)) cos(l pi u) sin(l pi v).
    Differentiating in u gives the absorbing kernel; in v it gives
    -(reflecting kernel - 1).
    """
    if eps < 0.0:
        raise ValueError("smoothing parameter must be >= 0")
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if eps == 0.0:
        return (v <= u).astype(np.float64) + v - 1.0
    nd = max(u.ndim, v.ndim)
    k, w = _mode_weights(eps)
    k = k.reshape((-1,) + (1,) * nd)
    w = w.reshape((-1,) + (1,) * nd)
    return -(2.0 * w * np.cos(k * np.pi * u) * np.sin(k * np.pi * v) / (k * np.pi)).sum(axis=0)


def theta_norm_sq(eps: float, u: NDArray | float) -> NDArray:
    """Squared L2 norm of theta^eps_u in its second argument.

    Exact mode sum sum_l 2 e^{-2 eps pi^2 l^2} cos^2(l pi u)/(l pi)^2;
    at eps = 0 the closed form u^2 - u + 1/3.
    """
    if eps < 0.0:
        raise ValueError("smoothing parameter must be >= 0")
    u = np.asarray(u, dtype=np.float64)
    if eps == 0.0:
        return u * u - u + 1.0 / 3.0
    k, w = _mode_weights(2.0 * eps)
    k = k.reshape((-1,) + (1,) * u.ndim)
    w = w.reshape((-1,) + (1,) * u.ndim)
    return (2.0 * w * np.cos(k * np.pi * u) ** 2 / (k * np.pi) ** 2).sum(axis=0)


def k_eps(
    eps: float,
    u: NDArray | float,
    E: float = 1.0,
    route: str = "spectral",
) -> NDArray:
    """Variance constant K^eps_u of the smoothed antiderivative kernel.

    K^eps_u = E^2 ( int p^neu_eps(u,w) theta^eps_u(w)^2 dw
                    - ( int p^dir_eps(u,v) theta^eps_u(v) dv )^2 ).

    route "spectral" uses the exact simplification
    E^2 (||theta^eps_u||^2 - theta^{2 eps}_u(u)^2); route "quadrature"
    integrates the defining expression on the default grid.  Both agree
    to 1e-8.  Converges to E^2/12 in L2(du) as eps -> 0 (pointwise only
    on the open interval; at the endpoints the limit is E^2/3).
    """
    if eps <= 0.0:
        raise ValueError("smoothing parameter must be positive")
    u = np.asarray(u, dtype=np.float64)
    if route == "spectral":
        return E * E * (theta_norm_sq(eps, u) - theta(2.0 * eps, u, u) ** 2)
    if route == "quadrature":
        g = quad_grid()
        uu = np.atleast_1d(u)
        out = np.empty(uu.shape, dtype=np.float64)
        for i, ui in np.ndenumerate(uu):
            th = theta(eps, ui, g)
            first = integrate(heat_kernel("neumann", eps, ui, g) * th * th, g)
            second = integrate(heat_kernel("dirichlet", eps, ui, g) * th, g)
            out[i] = E * E * (first - second * second)
        return out.reshape(u.shape) if u.ndim else float(out[0])
    raise ValueError(f"unknown route {route!r}")


def k_eps_l2_error(eps: float, E: float = 1.0, lo: float = 0.0, hi: float = 1.0) -> float:
    """int_lo^hi |K^eps_u / E^2 - 1/12|^2 du on the default grid."""
    g = quad_grid(lo=lo, hi=hi)
    dev = k_eps(eps, g, E=1.0) - 1.0 / 12.0
    return float(integrate(dev * dev, g))


def kernel_estimates_check(
    t_grid: NDArray | None = None,
    u_grid: NDArray | None = None,
) -> dict:
    """Quadrature sweep behind the standard heat-kernel estimates.

    For each t in t_grid (default logspace(-4, -1, 7)) tabulates the
    absorbing kernel over u_grid x quad_grid() and records:

    - sup: sup over the table, bounded by C t^{-1/2};
    - moment_half / moment_one: max_u of int p(u,v)|u-v|^lam dv,
      bounded by C t^{lam/2} for lam = 1/2, 1;
    - mass_defect_l2: L2(du) norm of 1 - int p(u,v) dv, bounded by
      C t^{1/4};
    - neu_dir_l1_uavg: int_u ||p_neu(u,.) - p_dir(u,.)||_L1 du, which
      decays like t^{1/2};
    - neu_dir_l1_mid: the same L1 distance at u = 1/2.  Pointwise this
      equals the mass defect exactly (the difference kernel is
      nonnegative and the reflecting kernel has unit mass), so at the
      midpoint it is exponentially small in 1/t, underflowing to 0 at
      small t; any log-log slope fit must use the u-averaged series.

    Fitted exponents and bound constants are returned in a dict.
    """
    if t_grid is None:
        t_grid = np.logspace(-4.0, -1.0, 7)
    t_grid = np.asarray(t_grid, dtype=np.float64)
    if np.any(t_grid <= 0.0) or np.any(t_grid > 1.0):
        raise ValueError("t values must lie in (0, 1]")
    if u_grid is None:
        u_grid = quad_grid(1 << 10)
    u_grid = np.asarray(u_grid, dtype=np.float64)
    v_grid = quad_grid()

    k_max = mode_cutoff(float(t_grid.min()))
    k = np.arange(1, k_max + 1, dtype=np.float64)
    s_u = np.sin(np.outer(k, np.pi * u_grid))
    s_v = np.sin(np.outer(k, np.pi * v_grid))
    c_u = np.cos(np.outer(k, np.pi * u_grid))
    c_v = np.cos(np.outer(k, np.pi * v_grid))
    absdiff = np.abs(u_grid[:, None] - v_grid[None, :])

    sup = np.empty_like(t_grid)
    moment_half = np.empty_like(t_grid)
    moment_one = np.empty_like(t_grid)
    mass_defect_l2 = np.empty_like(t_grid)
    neu_dir_uavg = np.empty_like(t_grid)
    neu_dir_mid = np.empty_like(t_grid)
    neu_dir_c = 0.0
    mid_row = np.searchsorted(u_grid, 0.5)

    for i, t in enumerate(t_grid):
        w = np.exp(-t * np.pi**2 * k**2)
        p_dir = (2.0 * w[:, None] * s_u).T @ s_v
        p_neu = 1.0 + ((2.0 * w[:, None] * c_u).T @ c_v)
        sup[i] = p_dir.max()
        moment_half[i] = integrate(p_dir * np.sqrt(absdiff), v_grid, axis=1).max()
        moment_one[i] = integrate(p_dir * absdiff, v_grid, axis=1).max()
        defect = 1.0 - integrate(p_dir, v_grid, axis=1)
        mass_defect_l2[i] = math.sqrt(integrate(defect * defect, u_grid))
        l1 = integrate(np.abs(p_neu - p_dir), v_grid, axis=1)
        neu_dir_uavg[i] = integrate(l1, u_grid)
        neu_dir_mid[i] = l1[mid_row]
        shape = np.minimum(math.sqrt(t) / (u_grid * (1.0 - u_grid) + 1e-300), 1.0)
        neu_dir_c = max(neu_dir_c, float((l1 / shape).max()))

    def _slope(y: NDArray) -> float:
        return float(np.polyfit(np.log(t_grid), np.log(y), 1)[0])

    return {
        "t_grid": t_grid,
        "sup": sup,
        "sup_slope": _slope(sup),
        "sup_C": float((sup * np.sqrt(t_grid)).max()),
        "moment_half": moment_half,
        "moment_half_C": float((moment_half / t_grid**0.25).max()),
        "moment_one": moment_one,
        "moment_one_C": float((moment_one / np.sqrt(t_grid)).max()),
        "mass_defect_l2": mass_defect_l2,
        "mass_defect_slope": _slope(mass_defect_l2),
        "mass_defect_C": float((mass_defect_l2 / t_grid**0.25).max()),
        "neu_dir_l1_uavg": neu_dir_uavg,
        "neu_dir_uavg_slope": _slope(neu_dir_uavg),
        "neu_dir_l1_mid": neu_dir_mid,
        "neu_dir_C": neu_dir_c,
    }


# ---------------------------------------------------------------------------
# discrete difference operators on {0, 1/n, ..., 1}

def grad_plus(phi: NDArray, n: int) -> NDArray:
    """Forward difference n (phi[x+1] - phi[x]) at x = 0..n-1."""
    phi = _check_grid(phi, n)
    return n * (phi[1:] - phi[:-1])


def grad_minus(phi: NDArray, n: int) -> NDArray:
    """Backward difference n (phi[x] - phi[x-1]) at x = 1..n."""
    phi = _check_grid(phi, n)
    return n * (phi[1:] - phi[:-1])


def lap(phi: NDArray, n: int) -> NDArray:
    """Centered Laplacian n^2 (phi[x+1] + phi[x-1] - 2 phi[x]) at x = 1..n-1."""
    phi = _check_grid(phi, n)
    return n * n * (phi[2:] + phi[:-2] - 2.0 * phi[1:-1])


def lap_reflect(phi: NDArray, n: int) -> NDArray:
    """Laplacian on x = 1..n whose last row reflects across x = n.

    Rows 1..n-1 are the centered stencil; row n substitutes the ghost
    value phi[n+1] := phi[n-1], giving 2 n^2 (phi[n-1] - phi[n]).  For
    flat-ended test functions this still converges to the Laplacian.
    """
    phi = _check_grid(phi, n)
    out = np.empty(n, dtype=np.float64)
    out[: n - 1] = lap(phi, n)
    out[n - 1] = 2.0 * n * n * (phi[n - 1] - phi[n])
    return out


def lap_copy(phi: NDArray, n: int) -> NDArray:
    """Laplacian on x = 1..n whose last row copies the row at x = n-1."""
    phi = _check_grid(phi, n)
    out = np.empty(n, dtype=np.float64)
    out[: n - 1] = lap(phi, n)
    out[n - 1] = out[n - 2]
    return out


_DISCRETE_OPS = {
    "grad_plus": grad_plus,
    "grad_minus": grad_minus,
    "lap": lap,
    "lap_reflect": lap_reflect,
    "lap_copy": lap_copy,
}


def discrete_op(phi: NDArray, n: int, which: str) -> NDArray:
    """Dispatch to one of the named difference operators."""
    try:
        op = _DISCRETE_OPS[which]
    except KeyError:
        raise ValueError(f"unknown operator {which!r}; choose from {sorted(_DISCRETE_OPS)}")
    return op(phi, n)


def _check_grid(phi: NDArray, n: int) -> NDArray:
    phi = np.asarray(phi, dtype=np.float64)
    if phi.shape != (n + 1,):
        raise ValueError(f"expected grid of length n+1 = {n + 1}, got {phi.shape}")
    return phi


# ---------------------------------------------------------------------------
# Sobolev norms in mode space

@dataclass(frozen=True)
class SobolevCoeffs:
    """Sine-mode coefficients <f, e_k>; 1d, or 2d for tensor modes."""

    coeffs: NDArray[np.float64]

    def __post_init__(self) -> None:
        c = np.asarray(self.coeffs, dtype=np.float64)
        if c.ndim not in (1, 2):
            raise ValueError("coefficients must be a 1d or 2d array")
        object.__setattr__(self, "coeffs", c)


def sobolev_norm(coeffs: SobolevCoeffs | NDArray, order: int) -> float:
    """Squared Sobolev norm sum_k (pi^2 |k|^2)^order <f, e_k>^2.

    order +1 is the H^1 seminorm squared, order -k the dual H^{-k}
    norms; 2d coefficient arrays use the multi-index weight
    |k|^2 = k1^2 + k2^2.
    """
    c = coeffs.coeffs if isinstance(coeffs, SobolevCoeffs) else np.asarray(coeffs, np.float64)
    if c.ndim == 1:
        ksq = np.arange(1, c.shape[0] + 1, dtype=np.float64) ** 2
    elif c.ndim == 2:
        k1 = np.arange(1, c.shape[0] + 1, dtype=np.float64) ** 2
        k2 = np.arange(1, c.shape[1] + 1, dtype=np.float64) ** 2
        ksq = k1[:, None] + k2[None, :]
    else:
        raise ValueError("coefficients must be a 1d or 2d array")
    return float((((np.pi**2 * ksq) ** order) * c * c).sum())


# ---------------------------------------------------------------------------
# approximation of the identity

@dataclass(frozen=True)
class IotaWindow:
    """Indicator window of width eps and height 1/eps (unit mass).

    Forward-looking half-open window (u, u+eps] away from the right
    endpoint; within 2 eps of it, the backward window [u-eps, u).
    """

    u: float
    eps: float
    lo: float
    hi: float
    forward: bool

    @property
    def height(self) -> float:
        return 1.0 / self.eps

    def __call__(self, v: NDArray | float) -> NDArray:
        v = np.asarray(v, dtype=np.float64)
        if self.forward:
            ind = (v > self.lo) & (v <= self.hi)
        else:
            ind = (v >= self.lo) & (v < self.hi)
        return ind.astype(np.float64) / self.eps

    def mode_coeffs(self, modes: int) -> NDArray:
        """<iota, e_k> for k = 1..modes, in closed form."""
        k = np.arange(1, modes + 1, dtype=np.float64)
        return np.sqrt(2.0) * (np.cos(k * np.pi * self.lo) - np.cos(k * np.pi * self.hi)) / (
            k * np.pi * self.eps
        )


def iota(eps: float, u: float) -> IotaWindow:
    """One-sided approximation-of-identity window at u."""
    if not 0.0 < eps < 0.5:
        raise ValueError("window width must lie in (0, 1/2)")
    if not 0.0 <= u <= 1.0:
        raise ValueError("base point must lie in [0, 1]")
    if u < 1.0 - 2.0 * eps:
        return IotaWindow(u, eps, u, u + eps, True)
    return IotaWindow(u, eps, u - eps, u, False)
