"""Microscopic model: an exclusion chain on {1, ..., n-1} with a weak
rightward bias and particle reservoirs at both ends.

Bulk bond (x, x+1): swap rates (1 + eps) eta(x)(1 - eta(x+1)) to the
right and eta(x+1)(1 - eta(x)) to the left, with eps = E / n^gamma.
Left reservoir: inject at (1 + eps) rho (1 - eta(1)), absorb at
(1 - rho) eta(1).  Right reservoir: absorb at (1 + eps)(1 - rho)
eta(n-1), inject at rho (1 - eta(n-1)).  The product Bernoulli(rho)
measure is invariant for every (E, gamma, rho) but reversible only at
E = 0.

Ghost sites 0 and n are never materialized; formulas that reference
them use the reservoir density rho.

This module holds the exact small-system machinery (full generator,
invariance and reversibility checks, Dirichlet form) and a plain
Python jump-chain sampler used as the reference for the compiled
engine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

MAX_EXACT_SITES = 11  # full generator capped at 2^11 configurations

# channel kinds, in storage order within the boundary block
BULK_RIGHT = "bulk_right"
BULK_LEFT = "bulk_left"
ENTER_LEFT = "enter_left"
EXIT_LEFT = "exit_left"
EXIT_RIGHT = "exit_right"
ENTER_RIGHT = "enter_right"
_BOUNDARY_ORDER = (ENTER_LEFT, EXIT_LEFT, EXIT_RIGHT, ENTER_RIGHT)


@dataclass(frozen=True)
class SimParams:
    """Model parameters; immutable and hashable.

    n: the lattice is {1, ..., n-1}, so n >= 3 means at least two sites.
    E: bias amplitude; may be negative as long as 1 + E/n^gamma > 0.
    gamma: bias decay exponent (> 0); the effective bond bias is
        eps = E / n^gamma.
    rho: reservoir density, strictly inside (0, 1).
    """

    n: int
    E: float = 0.0
    gamma: float = 0.5
    rho: float = 0.5

    def __post_init__(self) -> None:
        if self.n < 3:
            raise ValueError("need n >= 3 (at least two lattice sites)")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("reservoir density must lie strictly inside (0, 1)")
        if self.gamma <= 0.0:
            raise ValueError("bias decay exponent must be positive")
        if 1.0 + self.eps <= 0.0:
            raise ValueError("bias too negative: 1 + E/n^gamma must stay positive")

    @property
    def eps(self) -> float:
        """Effective bond bias E / n^gamma."""
        return self.E / self.n**self.gamma

    @property
    def chi(self) -> float:
        """Per-site variance of a Bernoulli(rho) occupation."""
        return self.rho * (1.0 - self.rho)

    @property
    def c_n(self) -> float:
        """Mean height displacement per unit macroscopic time: -chi E n^{2-gamma}."""
        return -self.chi * self.E * self.n ** (2.0 - self.gamma)

    @property
    def num_sites(self) -> int:
        return self.n - 1

    @property
    def num_bonds(self) -> int:
        return self.n - 2

    @property
    def num_channels(self) -> int:
        """2 per bulk bond plus 4 boundary channels = 2n."""
        return 2 * self.num_bonds + 4


@dataclass(frozen=True)
class HeightState:
    """Occupancy plus the two boundary particle counters.

    h1 counts net particles removed through the left end, hn net
    particles injected through the right end; the interface height is
    h(x) = h1 + sum_{y<x} (eta(y) - rho) for x in {1, ..., n}, so h1
    moves only on left-boundary events and hn only on right ones.
    """

    eta: NDArray[np.int8]
    h1: int
    hn: int
    t_macro: float
    params: SimParams

    def heights(self) -> NDArray[np.float64]:
        """h(x) for x = 1..n as an array of length n."""
        h = np.empty(self.params.n, dtype=np.float64)
        h[0] = self.h1
        h[1:] = self.h1 + np.cumsum(self.eta.astype(np.float64) - self.params.rho)
        return h


@dataclass(frozen=True)
class TransitionChannel:
    """One Poisson clock: what it does, where, and at which rate.

    site is the left site of the bond for bulk channels, 1 for left
    boundary channels and n-1 for right ones.  dh1/dhn are the height
    counter increments at the two ends (+1 when a particle leaves
    through that end, -1 when one enters).
    """

    index: int
    kind: str
    site: int
    rate: float
    dh1: int
    dhn: int


def sample_initial(params: SimParams, rng: np.random.Generator) -> NDArray[np.int8]:
    """Independent Bernoulli(rho) occupations, the invariant profile."""
    return (rng.random(params.num_sites) < params.rho).astype(np.int8)


def channel_rates_array(eta: NDArray, params: SimParams) -> NDArray[np.float64]:
    """All channel rates as a flat array in storage order.

    Layout: channels 2b and 2b+1 are the rightward/leftward swaps of
    bond b (array sites b, b+1; lattice sites b+1, b+2), followed by
    enter-left, exit-left, exit-right, enter-right.
    """
    eta = np.asarray(eta)
    if eta.shape != (params.num_sites,):
        raise ValueError(f"occupancy must have length {params.num_sites}")
    biased = 1.0 + params.eps
    rho = params.rho
    occ = eta.astype(np.float64)
    rates = np.empty(params.num_channels, dtype=np.float64)
    rates[0 : 2 * params.num_bonds : 2] = biased * occ[:-1] * (1.0 - occ[1:])
    rates[1 : 2 * params.num_bonds : 2] = occ[1:] * (1.0 - occ[:-1])
    base = 2 * params.num_bonds
    rates[base + 0] = biased * rho * (1.0 - occ[0])
    rates[base + 1] = (1.0 - rho) * occ[0]
    rates[base + 2] = biased * (1.0 - rho) * occ[-1]
    rates[base + 3] = rho * (1.0 - occ[-1])
    return rates


def channel_rates(eta: NDArray, params: SimParams) -> list[TransitionChannel]:
    """The 2(n-2)+4 transition channels for a configuration."""
    rates = channel_rates_array(eta, params)
    base = 2 * params.num_bonds
    channels = [
        TransitionChannel(
            index=c,
            kind=BULK_RIGHT if c % 2 == 0 else BULK_LEFT,
            site=c // 2 + 1,
            rate=float(rates[c]),
            dh1=0,
            dhn=0,
        )
        for c in range(base)
    ]
    deltas = {ENTER_LEFT: (-1, 0), EXIT_LEFT: (1, 0), EXIT_RIGHT: (0, -1), ENTER_RIGHT: (0, 1)}
    for k, kind in enumerate(_BOUNDARY_ORDER):
        dh1, dhn = deltas[kind]
        site = 1 if kind in (ENTER_LEFT, EXIT_LEFT) else params.n - 1
        channels.append(TransitionChannel(base + k, kind, site, float(rates[base + k]), dh1, dhn))
    return channels


def apply_channel(eta: NDArray, channel_index: int, params: SimParams) -> tuple[int, int]:
    """Apply one transition in place; returns (dh1, dhn)."""
    base = 2 * params.num_bonds
    if channel_index < base:
        b = channel_index // 2
        eta[b], eta[b + 1] = eta[b + 1], eta[b]
        return 0, 0
    k = channel_index - base
    if k == 0:  # enter left
        eta[0] = 1
        return -1, 0
    if k == 1:  # exit left
        eta[0] = 0
        return 1, 0
    if k == 2:  # exit right
        eta[-1] = 0
        return 0, -1
    if k == 3:  # enter right
        eta[-1] = 1
        return 0, 1
    raise IndexError(f"channel index {channel_index} out of range")


class JumpChain:
    """Occupancy plus an incrementally maintained channel-rate index.

    Reference Gillespie sampler: exact but pure Python, used by the
    property tests that pin the compiled engine's semantics.  After an
    event only the affected channels (at most 6) are recomputed.
    """

    def __init__(self, eta: NDArray, params: SimParams) -> None:
        self.params = params
        self.eta = np.array(eta, dtype=np.int8)
        self.rates = channel_rates_array(self.eta, params)
        self.h1 = 0
        self.hn = 0
        self.t_micro = 0.0

    def total_rate(self) -> float:
        return float(self.rates.sum())

    def step(self, rng: np.random.Generator) -> tuple[TransitionChannel, float]:
        """Advance one event; returns (channel taken, waiting time)."""
        total = self.total_rate()
        if total <= 0.0:
            raise RuntimeError("rate index corrupt: total rate not positive")
        dt = rng.exponential(1.0 / total)
        cum = np.cumsum(self.rates)
        c = int(np.searchsorted(cum, rng.random() * total, side="right"))
        c = min(c, self.params.num_channels - 1)
        fired_rate = float(self.rates[c])
        dh1, dhn = apply_channel(self.eta, c, self.params)
        self.h1 += dh1
        self.hn += dhn
        self._refresh_after(c)
        self.t_micro += dt
        kind = _channel_kind(c, self.params)
        site = c // 2 + 1 if c < 2 * self.params.num_bonds else (1 if dh1 else self.params.n - 1)
        return TransitionChannel(c, kind, site, fired_rate, dh1, dhn), dt

    def _refresh_after(self, c: int) -> None:
        p = self.params
        base = 2 * p.num_bonds
        occ = self.eta
        biased = 1.0 + p.eps
        if c < base:
            b = c // 2
            bonds = [bb for bb in (b - 1, b, b + 1) if 0 <= bb < p.num_bonds]
            touched_left = b == 0
            touched_right = b + 1 == p.num_sites - 1
        else:
            flipped = 0 if c - base < 2 else p.num_sites - 1
            bonds = [bb for bb in (flipped - 1, flipped) if 0 <= bb < p.num_bonds]
            touched_left = flipped == 0
            touched_right = flipped == p.num_sites - 1
        for bb in bonds:
            a, d = float(occ[bb]), float(occ[bb + 1])
            self.rates[2 * bb] = biased * a * (1.0 - d)
            self.rates[2 * bb + 1] = d * (1.0 - a)
        if touched_left:
            self.rates[base + 0] = biased * p.rho * (1.0 - occ[0])
            self.rates[base + 1] = (1.0 - p.rho) * occ[0]
        if touched_right:
            self.rates[base + 2] = biased * (1.0 - p.rho) * occ[-1]
            self.rates[base + 3] = p.rho * (1.0 - occ[-1])


def _channel_kind(c: int, params: SimParams) -> str:
    base = 2 * params.num_bonds
    if c < base:
        return BULK_RIGHT if c % 2 == 0 else BULK_LEFT
    return _BOUNDARY_ORDER[c - base]


# ---------------------------------------------------------------------------
# exact enumeration machinery (small n)

def _check_exact_size(params: SimParams) -> int:
    if params.num_sites > MAX_EXACT_SITES:
        raise ValueError(f"exact enumeration capped at {MAX_EXACT_SITES} sites")
    return 1 << params.num_sites


def _config(i: int, num_sites: int) -> NDArray[np.int8]:
    """Configuration for index i; bit x-1 holds site x."""
    return np.array([(i >> s) & 1 for s in range(num_sites)], dtype=np.int8)


def stationary_weights(params: SimParams) -> NDArray[np.float64]:
    """Bernoulli(rho) product weights over all configurations."""
    size = _check_exact_size(params)
    nu = np.empty(size, dtype=np.float64)
    for i in range(size):
        k = int(i).bit_count()
        nu[i] = params.rho**k * (1.0 - params.rho) ** (params.num_sites - k)
    return nu


def exact_generator(params: SimParams) -> NDArray[np.float64]:
    """Full jump-rate matrix over {0,1}^{n-1}; rows sum to zero."""
    size = _check_exact_size(params)
    ns = params.num_sites
    L = np.zeros((size, size), dtype=np.float64)
    for i in range(size):
        eta = _config(i, ns)
        rates = channel_rates_array(eta, params)
        for c, r in enumerate(rates):
            if r == 0.0:
                continue
            target = eta.copy()
            apply_channel(target, c, params)
            j = int((target.astype(np.int64) << np.arange(ns)).sum())
            L[i, j] += r
            L[i, i] -= r
    return L


def invariance_violation(params: SimParams) -> float:
    """max |(nu L)(config)|; zero iff Bernoulli(rho) is invariant."""
    L = exact_generator(params)
    nu = stationary_weights(params)
    return float(np.abs(nu @ L).max())


def reversibility_violation(params: SimParams) -> float:
    """max |nu(i) L(i,j) - nu(j) L(j,i)| over configuration pairs.

    Zero iff the chain is reversible for Bernoulli(rho); positive for
    any E > 0.
    """
    L = exact_generator(params)
    nu = stationary_weights(params)
    flux = nu[:, None] * L
    off = flux - flux.T
    np.fill_diagonal(off, 0.0)
    return float(np.abs(off).max())


def _function_values(f, params: SimParams) -> NDArray[np.float64]:
    size = _check_exact_size(params)
    vals = np.asarray(f, dtype=np.float64) if not callable(f) else None
    if vals is None:
        vals = np.array([float(f(_config(i, params.num_sites))) for i in range(size)])
    if vals.shape != (size,):
        raise ValueError(f"need one value per configuration ({size})")
    return vals


def dirichlet_form(f, params: SimParams) -> float:
    """int f (-L f) d nu, by exact enumeration.

    f may be a callable on occupancy arrays or a vector of values
    indexed like the generator.  Nonnegative because nu is invariant.
    """
    vals = _function_values(f, params)
    L = exact_generator(params)
    nu = stationary_weights(params)
    return float(-(nu * vals * (L @ vals)).sum())


def dirichlet_form_parts(f, params: SimParams) -> dict[str, float]:
    """Bulk and boundary quadratic forms (1/2) sum nu rate (f o sigma - f)^2.

    Invariance of nu makes the two entries sum to dirichlet_form(f):
    L(f^2) integrates to zero, which turns the generator pairing into
    the square-increment form with the global 1/2.
    """
    vals = _function_values(f, params)
    nu = stationary_weights(params)
    size = vals.shape[0]
    ns = params.num_sites
    base = 2 * params.num_bonds
    bulk = boundary = 0.0
    for i in range(size):
        eta = _config(i, ns)
        rates = channel_rates_array(eta, params)
        for c, r in enumerate(rates):
            if r == 0.0:
                continue
            target = eta.copy()
            apply_channel(target, c, params)
            j = int((target.astype(np.int64) << np.arange(ns)).sum())
            term = 0.5 * nu[i] * r * (vals[j] - vals[i]) ** 2
            if c < base:
                bulk += term
            else:
                boundary += term
    return {"bulk": bulk, "boundary": boundary}
