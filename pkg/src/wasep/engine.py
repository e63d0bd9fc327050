"""Compiled event-driven simulator: Gillespie direct method over a
binary sum tree of channel rates.

The microscopic clock tau advances by exponential waiting times at the
current total rate; macroscopic time is t = tau / n^2.  Channel layout
matches core.channel_rates_array: channels 2b and 2b+1 are the
rightward/leftward swaps of bond b (occupancy indices b, b+1), then
enter-left, exit-left, exit-right, enter-right.

Leaf rates are recomputed from the occupancy after every event (at most
6 leaves), so the tree never accumulates float drift; running
statistics that are updated incrementally are rebuilt from scratch
every REBUILD_EVERY events.

Each kernel below specializes the same loop for one family of running
statistics; they trade duplication for keeping every per-event update
O(1) and inlined.  The pure-Python reference for their shared
semantics is core.JumpChain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from numpy.typing import NDArray

from wasep.core import HeightState, SimParams, sample_initial

REBUILD_EVERY = 1 << 20


# ---------------------------------------------------------------------------
# sum tree


@njit(cache=True, inline="always")
def _leaf_rates(eta, eps, rho, tree, cap):
    ns = eta.shape[0]
    nb = ns - 1
    biased = 1.0 + eps
    for b in range(nb):
        a = float(eta[b])
        d = float(eta[b + 1])
        tree[cap + 2 * b] = biased * a * (1.0 - d)
        tree[cap + 2 * b + 1] = d * (1.0 - a)
    base = 2 * nb
    tree[cap + base + 0] = biased * rho * (1.0 - eta[0])
    tree[cap + base + 1] = (1.0 - rho) * eta[0]
    tree[cap + base + 2] = biased * (1.0 - rho) * eta[ns - 1]
    tree[cap + base + 3] = rho * (1.0 - eta[ns - 1])


@njit(cache=True, inline="always")
def _tree_build(tree, cap):
    for i in range(cap - 1, 0, -1):
        tree[i] = tree[2 * i] + tree[2 * i + 1]


@njit(cache=True, inline="always")
def _tree_set(tree, cap, c, val):
    i = cap + c
    tree[i] = val
    i >>= 1
    while i >= 1:
        tree[i] = tree[2 * i] + tree[2 * i + 1]
        i >>= 1


@njit(cache=True, inline="always")
def _tree_sample(tree, cap, nc, u):
    i = 1
    while i < cap:
        left = tree[2 * i]
        if u < left:
            i = 2 * i
        else:
            u -= left
            i = 2 * i + 1
    c = i - cap
    if c >= nc or tree[cap + c] <= 0.0:
        # float edge case: fall back to a linear scan
        u = 0.0
        for k in range(nc):
            if tree[cap + k] > 0.0:
                c = k
                u += tree[cap + k]
                break
    return c


@njit(cache=True, inline="always")
def _apply_event(eta, c, nb):
    """Mutate occupancy; return (dh1, dhn, hsite, dh).

    hsite is the 1-based height coordinate that moves (the right end of
    the bond for swaps, 1 or n for boundary events) and dh its +-1
    increment.
    """
    if c < 2 * nb:
        b = c >> 1
        tmp = eta[b]
        eta[b] = eta[b + 1]
        eta[b + 1] = tmp
        if c & 1:  # leftward jump raises h at the bond's right end
            return 0, 0, b + 2, 1
        return 0, 0, b + 2, -1
    k = c - 2 * nb
    ns = nb + 1
    if k == 0:
        eta[0] = 1
        return -1, 0, 1, -1
    if k == 1:
        eta[0] = 0
        return 1, 0, 1, 1
    if k == 2:
        eta[ns - 1] = 0
        return 0, -1, ns + 1, -1
    eta[ns - 1] = 1
    return 0, 1, ns + 1, 1


@njit(cache=True, inline="always")
def _refresh(eta, eps, rho, tree, cap, c):
    """Recompute the <= 6 channel rates an event at channel c can change."""
    ns = eta.shape[0]
    nb = ns - 1
    base = 2 * nb
    biased = 1.0 + eps
    if c < base:
        b = c >> 1
        lo = b - 1 if b > 0 else 0
        hi = b + 2 if b + 2 <= nb else nb
        touched_left = b == 0
        touched_right = b + 1 == ns - 1
    else:
        site = 0 if c - base < 2 else ns - 1
        lo = site - 1 if site > 0 else 0
        hi = site + 1 if site + 1 <= nb else nb
        touched_left = site == 0
        touched_right = site == ns - 1
    for bb in range(lo, hi):
        a = float(eta[bb])
        d = float(eta[bb + 1])
        _tree_set(tree, cap, 2 * bb, biased * a * (1.0 - d))
        _tree_set(tree, cap, 2 * bb + 1, d * (1.0 - a))
    if touched_left:
        _tree_set(tree, cap, base + 0, biased * rho * (1.0 - eta[0]))
        _tree_set(tree, cap, base + 1, (1.0 - rho) * eta[0])
    if touched_right:
        _tree_set(tree, cap, base + 2, biased * (1.0 - rho) * eta[ns - 1])
        _tree_set(tree, cap, base + 3, rho * (1.0 - eta[ns - 1]))


@njit(cache=True, inline="always")
def _tree_cap(nc):
    cap = 1
    while cap < nc:
        cap *= 2
    return cap


# ---------------------------------------------------------------------------
# kernels


@njit(cache=True, nogil=True)
def run_snapshots(eta, h1, hn, eps, rho, times_micro, rng, etas_out, h_out):
    """Advance to each target time, storing occupancy and counters."""
    ns = eta.shape[0]
    nc = 2 * (ns + 1)
    cap = _tree_cap(nc)
    tree = np.zeros(2 * cap)
    _leaf_rates(eta, eps, rho, tree, cap)
    _tree_build(tree, cap)
    tau = 0.0
    events = np.int64(0)
    for k in range(times_micro.shape[0]):
        target = times_micro[k]
        while True:
            total = tree[1]
            dt = rng.standard_exponential() / total
            if tau + dt > target:
                tau = target
                break
            tau += dt
            c = _tree_sample(tree, cap, nc, rng.random() * total)
            dh1, dhn, _, _ = _apply_event(eta, c, ns - 1)
            h1 += dh1
            hn += dhn
            _refresh(eta, eps, rho, tree, cap, c)
            events += 1
            if events % REBUILD_EVERY == 0:
                _leaf_rates(eta, eps, rho, tree, cap)
                _tree_build(tree, cap)
        etas_out[k, :] = eta
        h_out[k, 0] = h1
        h_out[k, 1] = hn
    return events, h1, hn


@njit(cache=True, nogil=True)
def run_events(eta, eps, rho, t_end_micro, max_events, rng, times_out, chans_out):
    """Record every event (time, channel) up to t_end; -1 on overflow."""
    ns = eta.shape[0]
    nc = 2 * (ns + 1)
    cap = _tree_cap(nc)
    tree = np.zeros(2 * cap)
    _leaf_rates(eta, eps, rho, tree, cap)
    _tree_build(tree, cap)
    tau = 0.0
    m = np.int64(0)
    while True:
        total = tree[1]
        dt = rng.standard_exponential() / total
        if tau + dt > t_end_micro:
            return m
        tau += dt
        if m >= max_events:
            return np.int64(-1)
        c = _tree_sample(tree, cap, nc, rng.random() * total)
        _apply_event(eta, c, ns - 1)
        _refresh(eta, eps, rho, tree, cap, c)
        times_out[m] = tau
        chans_out[m] = c
        m += 1


@njit(cache=True, nogil=True)
def run_height(eta, eps, rho, grid_micro, c_n_micro, rng):
    """Running sup over the grid of |h - drift| at both ends.

    c_n_micro is the mean counter drift per microscopic time unit
    (c_n / n^2).  Returns (sup_left^2, sup_right^2, events) where the
    sups are over the grid of |h1 - c_n_micro tau| and the analogous
    right-end quantity h(n) = prefix0 + hn.
    """
    ns = eta.shape[0]
    nc = 2 * (ns + 1)
    cap = _tree_cap(nc)
    tree = np.zeros(2 * cap)
    _leaf_rates(eta, eps, rho, tree, cap)
    _tree_build(tree, cap)
    prefix0 = 0.0
    for x in range(ns):
        prefix0 += eta[x] - rho
    tau = 0.0
    h1 = np.int64(0)
    hn = np.int64(0)
    events = np.int64(0)
    sup_l = 0.0
    sup_r = 0.0
    for k in range(grid_micro.shape[0]):
        target = grid_micro[k]
        while True:
            total = tree[1]
            dt = rng.standard_exponential() / total
            if tau + dt > target:
                tau = target
                break
            tau += dt
            c = _tree_sample(tree, cap, nc, rng.random() * total)
            dh1, dhn, _, _ = _apply_event(eta, c, ns - 1)
            h1 += dh1
            hn += dhn
            _refresh(eta, eps, rho, tree, cap, c)
            events += 1
            if events % REBUILD_EVERY == 0:
                _leaf_rates(eta, eps, rho, tree, cap)
                _tree_build(tree, cap)
        drift = c_n_micro * tau
        dl = h1 - drift
        dr = prefix0 + hn - drift
        if dl * dl > sup_l:
            sup_l = dl * dl
        if dr * dr > sup_r:
            sup_r = dr * dr
    return sup_l, sup_r, events


@njit(cache=True, inline="always")
def _field_values(eta, rho, phi, lapphi, inv_sqrt_n):
    y = 0.0
    ylap = 0.0
    for x in range(eta.shape[0]):
        eb = eta[x] - rho
        y += phi[x] * eb
        ylap += lapphi[x] * eb
    return y * inv_sqrt_n, ylap * inv_sqrt_n


@njit(cache=True, inline="always")
def _bond_product(eta, rho, gbond):
    p = 0.0
    for b in range(gbond.shape[0]):
        p += gbond[b] * (eta[b] - rho) * (eta[b + 1] - rho)
    return p


@njit(cache=True, nogil=True)
def run_mart(eta, eps, rho, times_micro, phi, lapphi, dY, dYlap, qw, gbond, rng, out):
    """Density field against one test function plus its compensators.

    phi, lapphi: grid values of the test function and of its discrete
    Laplacian at x/n, x = 1..n-1.  dY[c], dYlap[c]: the jump each
    channel makes in the corresponding (1/sqrt n) sum phi eta-bar
    fields; qw[c] = dY[c]^2 are the quadratic-variation weights.
    gbond[b] weights the bond product sum
    P = sum_b gbond[b] eta-bar(b) eta-bar(b+1).

    out[k] is the record at times_micro[k] with columns Y,
    int Y_lap dtau, int P dtau, sum (dY)^2, int S dtau,
    int S_left dtau, events; S = sum_c rate_c qw[c] and S_left its
    restriction to leftward bulk channels.
    """
    ns = eta.shape[0]
    nb = ns - 1
    nc = 2 * (ns + 1)
    base = 2 * nb
    cap = _tree_cap(nc)
    tree = np.zeros(2 * cap)
    _leaf_rates(eta, eps, rho, tree, cap)
    _tree_build(tree, cap)

    inv_sqrt_n = 1.0 / math.sqrt(float(ns + 1))
    y, ylap = _field_values(eta, rho, phi, lapphi, inv_sqrt_n)
    p = _bond_product(eta, rho, gbond)
    s_all = 0.0
    s_left = 0.0
    for c in range(nc):
        s_all += tree[cap + c] * qw[c]
        if c < base and (c & 1) == 1:
            s_left += tree[cap + c] * qw[c]

    tau = 0.0
    i_lap = 0.0
    i_p = 0.0
    qv_emp = 0.0
    i_s = 0.0
    i_sl = 0.0
    events = np.int64(0)
    for k in range(times_micro.shape[0]):
        target = times_micro[k]
        while True:
            total = tree[1]
            dt = rng.standard_exponential() / total
            if tau + dt > target:
                seg = target - tau
                i_lap += ylap * seg
                i_p += p * seg
                i_s += s_all * seg
                i_sl += s_left * seg
                tau = target
                break
            i_lap += ylap * dt
            i_p += p * dt
            i_s += s_all * dt
            i_sl += s_left * dt
            tau += dt
            c = _tree_sample(tree, cap, nc, rng.random() * total)
            # bond products around the touched sites, before the move
            if c < base:
                b = c >> 1
                blo = b - 1 if b > 0 else 0
                bhi = b + 2 if b + 2 <= nb else nb
            else:
                site = 0 if c - base < 2 else ns - 1
                blo = site - 1 if site > 0 else 0
                bhi = site + 1 if site + 1 <= nb else nb
            for bb in range(blo, bhi):
                p -= gbond[bb] * (eta[bb] - rho) * (eta[bb + 1] - rho)
            _apply_event(eta, c, nb)
            for bb in range(blo, bhi):
                p += gbond[bb] * (eta[bb] - rho) * (eta[bb + 1] - rho)
            y += dY[c]
            ylap += dYlap[c]
            qv_emp += qw[c]
            # rate refresh with running S updates
            biased = 1.0 + eps
            if c < base:
                touched_left = (c >> 1) == 0
                touched_right = (c >> 1) + 1 == ns - 1
            else:
                touched_left = c - base < 2
                touched_right = not touched_left
            for bb in range(blo, bhi):
                a = float(eta[bb])
                d = float(eta[bb + 1])
                r0 = biased * a * (1.0 - d)
                r1 = d * (1.0 - a)
                s_all += (r0 - tree[cap + 2 * bb]) * qw[2 * bb]
                s_all += (r1 - tree[cap + 2 * bb + 1]) * qw[2 * bb + 1]
                s_left += (r1 - tree[cap + 2 * bb + 1]) * qw[2 * bb + 1]
                _tree_set(tree, cap, 2 * bb, r0)
                _tree_set(tree, cap, 2 * bb + 1, r1)
            if touched_left:
                r0 = biased * rho * (1.0 - eta[0])
                r1 = (1.0 - rho) * eta[0]
                s_all += (r0 - tree[cap + base]) * qw[base]
                s_all += (r1 - tree[cap + base + 1]) * qw[base + 1]
                _tree_set(tree, cap, base + 0, r0)
                _tree_set(tree, cap, base + 1, r1)
            if touched_right:
                r2 = biased * (1.0 - rho) * eta[ns - 1]
                r3 = rho * (1.0 - eta[ns - 1])
                s_all += (r2 - tree[cap + base + 2]) * qw[base + 2]
                s_all += (r3 - tree[cap + base + 3]) * qw[base + 3]
                _tree_set(tree, cap, base + 2, r2)
                _tree_set(tree, cap, base + 3, r3)
            events += 1
            if events % REBUILD_EVERY == 0:
                _leaf_rates(eta, eps, rho, tree, cap)
                _tree_build(tree, cap)
                y, ylap = _field_values(eta, rho, phi, lapphi, inv_sqrt_n)
                p = _bond_product(eta, rho, gbond)
                s_all = 0.0
                s_left = 0.0
                for cc in range(nc):
                    s_all += tree[cap + cc] * qw[cc]
                    if cc < base and (cc & 1) == 1:
                        s_left += tree[cap + cc] * qw[cc]
        out[k, 0] = y
        out[k, 1] = i_lap
        out[k, 2] = i_p
        out[k, 3] = qv_emp
        out[k, 4] = i_s
        out[k, 5] = i_sl
        out[k, 6] = events
    return events


@njit(cache=True, nogil=True)
def run_bg(eta, eps, rho, t_end_micro, v, ells, rng, integrals_out):
    """Time integrals of the local-average replacement error.

    For each window half-width ell the integrand is
        F_ell = sum_x v(x) [eta-bar(x) eta-bar(x+1) - Q(x, ell)]
    with Q(x, ell) = (window mean of eta-bar)^2 - chi/ell, the window
    lying right of x for x <= n-2 ell-1 and left of x otherwise
    (lattice x = 1..n-2).  integrals_out[j] receives int_0^tau F dt in
    microscopic time.

    A swap moves window sums at O(1) positions per ell; only the rare
    boundary flips touch nothing (no window contains site 1 or n-1 when
    ell < n/4), which keeps the per-event cost O(#ells).
    """
    ns = eta.shape[0]
    nb = ns - 1
    n = ns + 1
    nc = 2 * n
    base = 2 * nb
    cap = _tree_cap(nc)
    tree = np.zeros(2 * cap)
    _leaf_rates(eta, eps, rho, tree, cap)
    _tree_build(tree, cap)
    chi = rho * (1.0 - rho)

    nell = ells.shape[0]
    # w[j, i]: occupation count in the effective window of lattice x = i+1
    w = np.zeros((nell, nb), dtype=np.int64)
    for j in range(nell):
        ell = ells[j]
        for i in range(nb):
            x = i + 1
            if x <= n - 2 * ell - 1:
                lo = x + 1
                hi = x + ell
            else:
                lo = x - ell
                hi = x - 1
            cnt = 0
            for y in range(lo, hi + 1):
                cnt += eta[y - 1]
            w[j, i] = cnt

    # g[j] = sum_x v(x) ((w/ell - rho)^2 - chi/ell); b_sum independent of ell
    g = np.zeros(nell)
    for j in range(nell):
        ell = float(ells[j])
        acc = 0.0
        for i in range(nb):
            m = w[j, i] / ell - rho
            acc += v[i] * (m * m - chi / ell)
        g[j] = acc
    b_sum = _bond_product(eta, rho, v)

    integ = np.zeros(nell)
    tau = 0.0
    events = np.int64(0)
    while True:
        total = tree[1]
        dt = rng.standard_exponential() / total
        if tau + dt > t_end_micro:
            seg = t_end_micro - tau
            for j in range(nell):
                integrals_out[j] = integ[j] + (b_sum - g[j]) * seg
            return events
        for j in range(nell):
            integ[j] += (b_sum - g[j]) * dt
        tau += dt
        c = _tree_sample(tree, cap, nc, rng.random() * total)
        if c < base:
            b = c >> 1
            blo = b - 1 if b > 0 else 0
            bhi = b + 2 if b + 2 <= nb else nb
        else:
            site = 0 if c - base < 2 else ns - 1
            blo = site - 1 if site > 0 else 0
            bhi = site + 1 if site + 1 <= nb else nb
        for bb in range(blo, bhi):
            b_sum -= v[bb] * (eta[bb] - rho) * (eta[bb + 1] - rho)
        if c < base:
            # swap of occupancy indices (b, b+1) = lattice sites (y, y+1):
            # eta-bar(y) changes by +delta, eta-bar(y+1) by -delta
            b = c >> 1
            delta = np.int64(eta[b + 1]) - np.int64(eta[b])
            y = b + 1
            if delta != 0:
                for j in range(nell):
                    ell = ells[j]
                    ellf = float(ell)
                    # right window [x+1, x+ell]: x=y sees site y+1, x=y-ell sees y
                    i = y - 1
                    if i < nb and y <= n - 2 * ell - 1:
                        m0 = w[j, i] / ellf - rho
                        w[j, i] -= delta
                        m1 = w[j, i] / ellf - rho
                        g[j] += v[i] * (m1 * m1 - m0 * m0)
                    i = y - ell - 1
                    if i >= 0 and y - ell <= n - 2 * ell - 1:
                        m0 = w[j, i] / ellf - rho
                        w[j, i] += delta
                        m1 = w[j, i] / ellf - rho
                        g[j] += v[i] * (m1 * m1 - m0 * m0)
                    # left window [x-ell, x-1]: x=y+1 sees site y, x=y+ell+1 sees y+1
                    i = y
                    if i < nb and y + 1 > n - 2 * ell - 1:
                        m0 = w[j, i] / ellf - rho
                        w[j, i] += delta
                        m1 = w[j, i] / ellf - rho
                        g[j] += v[i] * (m1 * m1 - m0 * m0)
                    i = y + ell
                    if i < nb and y + ell + 1 > n - 2 * ell - 1:
                        m0 = w[j, i] / ellf - rho
                        w[j, i] -= delta
                        m1 = w[j, i] / ellf - rho
                        g[j] += v[i] * (m1 * m1 - m0 * m0)
        _apply_event(eta, c, nb)
        for bb in range(blo, bhi):
            b_sum += v[bb] * (eta[bb] - rho) * (eta[bb + 1] - rho)
        _refresh(eta, eps, rho, tree, cap, c)
        events += 1
        if events % REBUILD_EVERY == 0:
            _leaf_rates(eta, eps, rho, tree, cap)
            _tree_build(tree, cap)
            b_sum = _bond_product(eta, rho, v)
            for j in range(nell):
                ellf = float(ells[j])
                acc = 0.0
                for i in range(nb):
                    m = w[j, i] / ellf - rho
                    acc += v[i] * (m * m - chi / ellf)
                g[j] = acc


@njit(cache=True, nogil=True)
def run_boundary(eta, eps, rho, grid_micro, widths, rng, sup_out):
    """Sup over the grid of squared time-averaged boundary window fields.

    widths[j] is a window size in sites; the observable is the density
    field tested against the flat window of mass one at either end,
    i.e. sqrt(n)/width * (window occupation count - width rho), whose
    running macroscopic time integral is monitored.  sup_out[0, j] and
    sup_out[1, j] receive the sup of the squared integral for the left
    and right window of widths[j].
    """
    ns = eta.shape[0]
    nb = ns - 1
    n = ns + 1
    nc = 2 * n
    base = 2 * nb
    cap = _tree_cap(nc)
    tree = np.zeros(2 * cap)
    _leaf_rates(eta, eps, rho, tree, cap)
    _tree_build(tree, cap)

    nj = widths.shape[0]
    s_l = np.zeros(nj, dtype=np.int64)
    s_r = np.zeros(nj, dtype=np.int64)
    for j in range(nj):
        wdt = widths[j]
        cl = np.int64(0)
        cr = np.int64(0)
        for i in range(wdt):
            cl += eta[i]
            cr += eta[ns - 1 - i]
        s_l[j] = cl
        s_r[j] = cr

    integ_l = np.zeros(nj)
    integ_r = np.zeros(nj)
    tau = 0.0
    events = np.int64(0)
    for j in range(nj):
        sup_out[0, j] = 0.0
        sup_out[1, j] = 0.0
    sqrt_n = math.sqrt(float(n))
    inv_n2 = 1.0 / (float(n) * float(n))
    for k in range(grid_micro.shape[0]):
        target = grid_micro[k]
        while True:
            total = tree[1]
            dt = rng.standard_exponential() / total
            if tau + dt > target:
                seg = target - tau
                for j in range(nj):
                    integ_l[j] += (s_l[j] - widths[j] * rho) * seg
                    integ_r[j] += (s_r[j] - widths[j] * rho) * seg
                tau = target
                break
            for j in range(nj):
                integ_l[j] += (s_l[j] - widths[j] * rho) * dt
                integ_r[j] += (s_r[j] - widths[j] * rho) * dt
            tau += dt
            c = _tree_sample(tree, cap, nc, rng.random() * total)
            if c < base:
                b = c >> 1
                delta = np.int64(eta[b + 1]) - np.int64(eta[b])
                if delta != 0:
                    for j in range(nj):
                        if b == widths[j] - 1:
                            s_l[j] += delta
                        if b + 1 == ns - widths[j]:
                            s_r[j] -= delta
            else:
                kk = c - base
                if kk < 2:
                    docc = np.int64(1) if kk == 0 else np.int64(-1)
                    for j in range(nj):
                        s_l[j] += docc
                else:
                    docc = np.int64(-1) if kk == 2 else np.int64(1)
                    for j in range(nj):
                        s_r[j] += docc
            _apply_event(eta, c, nb)
            _refresh(eta, eps, rho, tree, cap, c)
            events += 1
            if events % REBUILD_EVERY == 0:
                _leaf_rates(eta, eps, rho, tree, cap)
                _tree_build(tree, cap)
        for j in range(nj):
            scale = sqrt_n / float(widths[j]) * inv_n2
            vl = integ_l[j] * scale
            vr = integ_r[j] * scale
            if vl * vl > sup_out[0, j]:
                sup_out[0, j] = vl * vl
            if vr * vr > sup_out[1, j]:
                sup_out[1, j] = vr * vr
    return events


@njit(cache=True, nogil=True)
def run_colehopf(eta, E, rho, times_micro, phi, lapphi, theta_t, lam, rng, out):
    """Exponential height field J = (1/n) sum phi(x/n) xi(x) and friends.

    xi(x) = exp(theta_t h(x) + lam tau) with h(1) the left counter;
    exactly one xi coordinate is scaled by e^{+-theta_t} per event, and
    the lam drift is folded through a global offset so per-event work
    stays O(1).  lapphi holds the reflected-copy discrete Laplacian of
    phi on x = 1..n.

    out[k] is the record at times_micro[k] with columns J,
    int J_lap dtau, int xi(1) dtau, int xi(n) dtau, sum (dJ)^2,
    int S_qv dtau, events, where J_lap is (1/n) sum lapphi xi and
    S_qv = sum_c rate_c (dJ_c)^2.
    """
    ns = eta.shape[0]
    nb = ns - 1
    n = ns + 1
    nc = 2 * n
    base = 2 * nb
    cap = _tree_cap(nc)
    tree = np.zeros(2 * cap)
    eps = E / math.sqrt(float(n))
    _leaf_rates(eta, eps, rho, tree, cap)
    _tree_build(tree, cap)

    up = math.exp(theta_t)
    dn = math.exp(-theta_t)
    qup = (up - 1.0) * (up - 1.0)
    qdn = (dn - 1.0) * (dn - 1.0)
    inv_n = 1.0 / float(n)

    h = np.zeros(n, dtype=np.int64)  # h[x-1] = h(x); starts at h1 = 0
    acc = np.int64(0)
    for x in range(1, n):
        acc += eta[x - 1]
        h[x] = acc  # integer part; the -rho x drift is folded into zeta below
    zeta = np.empty(n)
    for x in range(n):
        zeta[x] = math.exp(theta_t * (h[x] - rho * x))
    ofs = 0.0  # log-scale offset: true xi = zeta * exp(ofs), ofs = lam*tau + rebuild residue

    jj = 0.0
    jlap = 0.0
    for x in range(n):
        jj += phi[x] * zeta[x]
        jlap += lapphi[x] * zeta[x]
    jj *= inv_n
    jlap *= inv_n

    # per-channel QV weights on the zeta scale: (phi_x zeta_x (e^{d theta}-1)/n)^2
    wch = np.zeros(nc)
    for c in range(nc):
        if c < base:
            x = (c >> 1) + 2
            q = qdn if (c & 1) == 0 else qup
        elif c < base + 2:
            x = 1
            q = qdn if c == base else qup
        else:
            x = n
            q = qdn if c == base + 2 else qup
        pz = phi[x - 1] * zeta[x - 1] * inv_n
        wch[c] = pz * pz * q
    s_qv = 0.0
    for c in range(nc):
        s_qv += tree[cap + c] * wch[c]

    tau = 0.0
    i_lap = 0.0
    i_1 = 0.0
    i_n = 0.0
    qv_emp = 0.0
    i_qv = 0.0
    events = np.int64(0)
    for k in range(times_micro.shape[0]):
        target = times_micro[k]
        while True:
            total = tree[1]
            dt = rng.standard_exponential() / total
            last = tau + dt > target
            seg = (target - tau) if last else dt
            # exact integrals of zeta * e^{ofs + lam s} over the segment
            if lam != 0.0:
                w1 = math.exp(ofs) * math.expm1(lam * seg) / lam
                w2 = math.exp(2.0 * ofs) * math.expm1(2.0 * lam * seg) / (2.0 * lam)
            else:
                w1 = math.exp(ofs) * seg
                w2 = math.exp(2.0 * ofs) * seg
            i_lap += jlap * w1
            i_1 += zeta[0] * w1
            i_n += zeta[n - 1] * w1
            i_qv += s_qv * w2
            ofs += lam * seg
            if last:
                tau = target
                break
            tau += dt
            c = _tree_sample(tree, cap, nc, rng.random() * total)
            _apply_event(eta, c, nb)
            if c < base:
                x = (c >> 1) + 2
                dh = 1 if (c & 1) == 1 else -1
            elif c < base + 2:
                x = 1
                dh = 1 if c == base + 1 else -1
            else:
                x = n
                dh = 1 if c == base + 3 else -1
            h[x - 1] += dh
            fac = up if dh > 0 else dn
            dz = zeta[x - 1] * (fac - 1.0)
            zeta[x - 1] += dz
            dj = phi[x - 1] * dz * inv_n
            jj += dj
            jlap += lapphi[x - 1] * dz * inv_n
            scaled = dj * math.exp(ofs)
            qv_emp += scaled * scaled
            # refresh rates and QV weights for the touched channels
            if c < base:
                b = c >> 1
                blo = b - 1 if b > 0 else 0
                bhi = b + 2 if b + 2 <= nb else nb
                touched_left = b == 0
                touched_right = b + 1 == ns - 1
            else:
                site = 0 if c - base < 2 else ns - 1
                blo = site - 1 if site > 0 else 0
                bhi = site + 1 if site + 1 <= nb else nb
                touched_left = site == 0
                touched_right = site == ns - 1
            biased = 1.0 + eps
            for bb in range(blo, bhi):
                a = float(eta[bb])
                d = float(eta[bb + 1])
                r0 = biased * a * (1.0 - d)
                r1 = d * (1.0 - a)
                xz = bb + 2
                pz = phi[xz - 1] * zeta[xz - 1] * inv_n
                w0 = pz * pz * qdn
                w1b = pz * pz * qup
                s_qv += r0 * w0 - tree[cap + 2 * bb] * wch[2 * bb]
                s_qv += r1 * w1b - tree[cap + 2 * bb + 1] * wch[2 * bb + 1]
                wch[2 * bb] = w0
                wch[2 * bb + 1] = w1b
                _tree_set(tree, cap, 2 * bb, r0)
                _tree_set(tree, cap, 2 * bb + 1, r1)
            if touched_left:
                r0 = biased * rho * (1.0 - eta[0])
                r1 = (1.0 - rho) * eta[0]
                pz = phi[0] * zeta[0] * inv_n
                w0 = pz * pz * qdn
                w1b = pz * pz * qup
                s_qv += r0 * w0 - tree[cap + base] * wch[base]
                s_qv += r1 * w1b - tree[cap + base + 1] * wch[base + 1]
                wch[base] = w0
                wch[base + 1] = w1b
                _tree_set(tree, cap, base + 0, r0)
                _tree_set(tree, cap, base + 1, r1)
            if touched_right:
                r2 = biased * (1.0 - rho) * eta[ns - 1]
                r3 = rho * (1.0 - eta[ns - 1])
                pz = phi[n - 1] * zeta[n - 1] * inv_n
                w2b = pz * pz * qdn
                w3 = pz * pz * qup
                s_qv += r2 * w2b - tree[cap + base + 2] * wch[base + 2]
                s_qv += r3 * w3 - tree[cap + base + 3] * wch[base + 3]
                wch[base + 2] = w2b
                wch[base + 3] = w3
                _tree_set(tree, cap, base + 2, r2)
                _tree_set(tree, cap, base + 3, r3)
            events += 1
            if events % REBUILD_EVERY == 0:
                _leaf_rates(eta, eps, rho, tree, cap)
                _tree_build(tree, cap)
                # renormalize: fold the offset back into zeta exactly
                for x in range(n):
                    zeta[x] = math.exp(theta_t * (h[x] - rho * x) + ofs)
                ofs = 0.0
                jj = 0.0
                jlap = 0.0
                for x in range(n):
                    jj += phi[x] * zeta[x]
                    jlap += lapphi[x] * zeta[x]
                jj *= inv_n
                jlap *= inv_n
                for cc in range(nc):
                    if cc < base:
                        x = (cc >> 1) + 2
                        q = qdn if (cc & 1) == 0 else qup
                    elif cc < base + 2:
                        x = 1
                        q = qdn if cc == base else qup
                    else:
                        x = n
                        q = qdn if cc == base + 2 else qup
                    pz = phi[x - 1] * zeta[x - 1] * inv_n
                    wch[cc] = pz * pz * q
                s_qv = 0.0
                for cc in range(nc):
                    s_qv += tree[cap + cc] * wch[cc]
        eofs = math.exp(ofs)
        out[k, 0] = jj * eofs
        out[k, 1] = i_lap
        out[k, 2] = i_1
        out[k, 3] = i_n
        out[k, 4] = qv_emp
        out[k, 5] = i_qv
        out[k, 6] = events
    return events


# ---------------------------------------------------------------------------
# Python-facing driver


@dataclass(frozen=True)
class SimSummary:
    """What a trajectory run returns: event count and final state."""

    events: int
    final: HeightState


def times_to_micro(params: SimParams, times_macro) -> NDArray[np.float64]:
    """Sorted macroscopic record times mapped to the microscopic clock."""
    t = np.asarray(times_macro, dtype=np.float64)
    if t.ndim != 1 or t.shape[0] == 0:
        raise ValueError("record times must be a nonempty 1-d sequence")
    if t[0] < 0.0 or np.any(np.diff(t) < 0.0):
        raise ValueError("record times must be sorted and nonnegative")
    return t * float(params.n) ** 2


def simulate(
    params: SimParams,
    record_times,
    recorder=None,
    rng: np.random.Generator | None = None,
    eta: NDArray[np.int8] | None = None,
) -> SimSummary:
    """Run one trajectory, invoking recorder(state, t) at each record time.

    The chain starts from `eta` (Bernoulli(rho) sample if omitted) and
    runs on the microscopic clock to max(record_times) * n^2; recorded
    states are right-continuous.  Returns the event count and final
    state.
    """
    if rng is None:
        rng = np.random.default_rng()
    times_micro = times_to_micro(params, record_times)
    eta = sample_initial(params, rng) if eta is None else np.array(eta, dtype=np.int8)
    if eta.shape != (params.num_sites,):
        raise ValueError(f"occupancy must have length {params.num_sites}")
    k = times_micro.shape[0]
    etas = np.empty((k, params.num_sites), dtype=np.int8)
    h_out = np.empty((k, 2), dtype=np.int64)
    events, h1, hn = run_snapshots(
        eta, np.int64(0), np.int64(0), params.eps, params.rho, times_micro, rng, etas, h_out
    )
    times = np.asarray(record_times, dtype=np.float64)
    final = HeightState(
        eta=etas[-1].copy(), h1=int(h_out[-1, 0]), hn=int(h_out[-1, 1]),
        t_macro=float(times[-1]), params=params,
    )
    if recorder is not None:
        for i in range(k):
            state = HeightState(
                eta=etas[i].copy(), h1=int(h_out[i, 0]), hn=int(h_out[i, 1]),
                t_macro=float(times[i]), params=params,
            )
            recorder(state, float(times[i]))
    return SimSummary(events=int(events), final=final)
