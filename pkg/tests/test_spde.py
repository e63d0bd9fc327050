"""Mode-space integrator and the exponential-moment boundary defects."""

import math
from dataclasses import replace

import numpy as np
import pytest

from wasep.spde import (
    GalerkinState,
    SpdeParams,
    burgers_drift,
    burgers_step,
    burgers_step_modes,
    drift_table,
    exp_moment_field,
    nonlin_increment_var,
    ou_step,
    ou_step_modes,
    run_burgers,
    she_consistency,
    stationary_modes,
    theta_mode_coeffs,
)


def test_params_validation():
    with pytest.raises(ValueError):
        SpdeParams(A=0.0)
    with pytest.raises(ValueError):
        SpdeParams(D=-1.0)
    with pytest.raises(ValueError):
        SpdeParams(M=0)
    with pytest.raises(ValueError):
        SpdeParams(dt=0.0)
    with pytest.raises(ValueError):
        SpdeParams(eps=0.3)


def test_rescaling_invariant():
    p = SpdeParams(A=2.0, D=0.5, Ebar=3.0)
    q = p.rescaled()
    assert q.A == 1.0 and q.D == 2.0
    assert q.stationary_var == 1.0
    inv = lambda s: s.D * s.Ebar ** 2 / s.A ** 3
    assert math.isclose(inv(p), inv(q), rel_tol=1e-12)
    # already-normalized parameters are a fixed point
    r = q.rescaled()
    assert r.Ebar == q.Ebar


def test_ou_transition_statistics():
    # conditional on y0 the step is Gaussian with mean decay*y0 and
    # variance (D/2A)(1 - decay^2), independently per mode
    p = SpdeParams(A=1.5, D=0.8, M=4)
    dt = 0.013
    rng = np.random.default_rng(11)
    y0 = np.array([0.7, -0.3, 0.2, 1.1])
    batch = np.broadcast_to(y0, (200_000, 4))
    y1 = ou_step_modes(batch, dt, p, rng)
    decay = np.exp(-p.A * p.mode_eigenvalues * dt)
    var = p.stationary_var * (1.0 - decay * decay)
    se_mean = np.sqrt(var / 200_000)
    assert np.all(np.abs(y1.mean(axis=0) - decay * y0) < 4.0 * se_mean)
    se_var = var * math.sqrt(2.0 / 200_000)
    assert np.all(np.abs(y1.var(axis=0) - var) < 4.0 * se_var)


def test_stationary_autocovariance():
    # lag-t covariance of mode m is (D/2A) exp(-A (m pi)^2 t); at
    # A=1, D=1/2, t=0.1 the first mode gives 0.25 exp(-pi^2/10)
    p = SpdeParams(A=1.0, D=0.5, M=1)
    rng = np.random.default_rng(7)
    y0 = stationary_modes(p, (400_000,), rng)
    y1 = ou_step_modes(y0, 0.1, p, rng)
    target = 0.25 * math.exp(-math.pi ** 2 * 0.1)
    assert math.isclose(target, 0.0931770, abs_tol=5e-8)
    est = float(np.mean(y0[:, 0] * y1[:, 0]))
    se = float(np.std(y0[:, 0] * y1[:, 0])) / math.sqrt(400_000)
    assert abs(est - target) < 4.0 * se
    # marginal variance stays at D/2A
    assert abs(float(np.var(y1)) - 0.25) < 4.0 * 0.25 * math.sqrt(2.0 / 400_000)


def test_zero_drift_reduces_to_linear_step():
    p = SpdeParams(Ebar=0.0, M=8)
    table = drift_table(p)
    y = stationary_modes(p, (5,), np.random.default_rng(3))
    a = burgers_step_modes(y, 1e-3, p, table, np.random.default_rng(99))
    b = ou_step_modes(y, 1e-3, p, np.random.default_rng(99))
    assert np.array_equal(a, b)


def _window_mode_coeffs(u: float, eps: float, forward: bool, modes: int) -> np.ndarray:
    # <iota_eps(u), e_k> from the sine antiderivative over the window
    a, b = (u, u + eps) if forward else (u - eps, u)
    k = np.arange(1, modes + 1, dtype=np.float64)
    return math.sqrt(2.0) * (np.cos(k * math.pi * a) - np.cos(k * math.pi * b)) / (k * math.pi * eps)


def _simpson(vals: np.ndarray, h: float) -> float:
    w = np.full(vals.shape[0], 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return float(w @ vals) * h / 3.0


def _drift_oracle(y: np.ndarray, p: SpdeParams, cells: int = 16_000) -> np.ndarray:
    # dense Simpson on each smooth piece, split where the window flips
    u_star = 1.0 - 2.0 * p.eps
    out = np.zeros(p.M)
    for lo, hi, fwd in ((0.0, u_star, True), (u_star, 1.0, False)):
        grid = np.linspace(lo, hi, cells + 1)
        w = np.array([_window_mode_coeffs(float(u), p.eps, fwd, p.M) @ y for u in grid])
        m = np.arange(1, p.M + 1, dtype=np.float64)
        grad_e = math.sqrt(2.0) * (m * math.pi) * np.cos(np.outer(grid, m * math.pi))
        for j in range(p.M):
            out[j] += _simpson(w * w * grad_e[:, j], (hi - lo) / cells)
    return -p.Ebar * out


def test_drift_matches_dense_quadrature():
    p = SpdeParams(Ebar=1.3, M=8, eps=1.0 / 8.0)
    y = stationary_modes(p, (), np.random.default_rng(21))
    got = drift_table(p).drift(y, p.Ebar)
    want = _drift_oracle(y, p)
    assert np.allclose(got, want, rtol=1e-6, atol=1e-9)
    # the GalerkinState wrapper routes through the same table
    state = GalerkinState(y=y, t=0.0, params=p)
    assert np.array_equal(burgers_drift(state), got)
    # overriding the probe scale changes the answer
    other = burgers_drift(state, eps=1.0 / 16.0)
    assert not np.allclose(other, got)
    assert np.allclose(other, _drift_oracle(y, replace(p, eps=1.0 / 16.0)), rtol=1e-6, atol=1e-9)


def test_drift_divergence_identity():
    # pairing the drift with sum_m <1, e_m> e_m leaves boundary window
    # means plus the jump of the squared field at the window flip; the
    # projection residual decays like 1/M
    rng = np.random.default_rng(4)
    eps = 1.0 / 8.0
    y16 = stationary_modes(SpdeParams(M=16), (), rng)
    res = []
    for modes in (64, 128, 256):
        p = SpdeParams(Ebar=1.0, M=modes, eps=eps)
        y = np.zeros(modes)
        y[:16] = y16
        lhs = float(drift_table(p).drift(y, p.Ebar) @ _ones_coeffs(modes))
        u_star = 1.0 - 2.0 * eps
        f0 = (_window_mode_coeffs(0.0, eps, True, modes) @ y) ** 2
        f1 = (_window_mode_coeffs(1.0, eps, False, modes) @ y) ** 2
        f_lo = (_window_mode_coeffs(u_star, eps, True, modes) @ y) ** 2
        f_hi = (_window_mode_coeffs(u_star, eps, False, modes) @ y) ** 2
        s_at_star = float(_sine_partial_sum(u_star, modes))
        rhs = p.Ebar * (f1 - f0 + (f_hi - f_lo) * (s_at_star - 1.0))
        res.append(abs(lhs - rhs))
    assert res[0] > res[1] > res[2]
    scaled = [r * m for r, m in zip(res, (64, 128, 256))]
    assert max(scaled) < 2.5 * min(scaled)


def _ones_coeffs(modes: int) -> np.ndarray:
    m = np.arange(1, modes + 1, dtype=np.float64)
    return math.sqrt(2.0) * (1.0 - np.cos(m * math.pi)) / (m * math.pi)


def _sine_partial_sum(u: float, modes: int) -> float:
    m = np.arange(1, modes + 1, dtype=np.float64)
    return float(_ones_coeffs(modes) @ (math.sqrt(2.0) * np.sin(m * math.pi * u)))


def test_theta_mode_coeffs_against_quadrature():
    # Theta_u is v on [0, u] and v - 1 after; integrate each piece
    modes = 12
    for u in (0.17, 0.5, 0.83):
        want = np.zeros(modes)
        for lo, hi, shift in ((0.0, u, 0.0), (u, 1.0, -1.0)):
            grid = np.linspace(lo, hi, 4001)
            vals = grid + shift
            k = np.arange(1, modes + 1, dtype=np.float64)
            basis = math.sqrt(2.0) * np.sin(np.outer(grid, k * math.pi))
            for j in range(modes):
                want[j] += _simpson(vals * basis[:, j], (hi - lo) / 4000)
        got = theta_mode_coeffs(u, modes)
        assert np.allclose(got, want, atol=1e-10)
    # vectorized shape contract
    arr = theta_mode_coeffs(np.array([0.1, 0.9]), modes)
    assert arr.shape == (2, modes)


def test_exp_moment_field_closed_form_mean():
    # log Psi(u) is Gaussian with variance (Ebar/A)^2 (D/2A) |P_M Theta_u|^2
    p = SpdeParams(A=1.0, D=0.5, Ebar=1.0, M=64)
    rng = np.random.default_rng(17)
    ys = stationary_modes(p, (200_000,), rng)
    for u in (0.0, 0.35):
        norm_sq = float(theta_mode_coeffs(u, p.M) @ theta_mode_coeffs(u, p.M))
        want = math.exp(0.125 * norm_sq)
        psi = exp_moment_field(ys, u, p)
        se = float(np.std(psi)) / math.sqrt(psi.shape[0])
        assert abs(float(psi.mean()) - want) < 4.0 * se
    # truncated norm at u = 0 approaches 1/3
    n0 = float(theta_mode_coeffs(0.0, 512) @ theta_mode_coeffs(0.0, 512))
    assert abs(n0 - 1.0 / 3.0) < 1e-3


def _ou_ensemble(p: SpdeParams, t_end: float, every: int, batch: int, seed: int):
    rng = np.random.default_rng(seed)
    y = stationary_modes(p, (batch,), rng)
    ts = [0.0]
    ys = [y.copy()]
    steps = int(round(t_end / p.dt))
    for k in range(1, steps + 1):
        y = ou_step_modes(y, p.dt, p, rng)
        if k % every == 0:
            ts.append(k * p.dt)
            ys.append(y.copy())
    return np.array(ts), np.array(ys)


def test_boundary_defect_hierarchy():
    # the Robin-corrected defect beats the naive one and shrinks with
    # the probe scale; the naive defect sits on the closed-form plateau
    p = SpdeParams(A=1.0, D=0.5, Ebar=1.0, M=64, dt=2e-3)
    eps_list = (1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0)
    ts, ys = _ou_ensemble(p, 1.0, 5, 512, seed=29)
    out = she_consistency(ts, ys, p, eps_list)
    assert out["rate"] == pytest.approx(0.125)
    assert out["robin"].shape == (3, 512)

    def mean_se(a):
        return float(a.mean()), float(a.std(ddof=1)) / math.sqrt(a.shape[0])

    # E[Psi(u)] = exp(rate |P_M Theta_u|^2): the same constant drives
    # the plateau and the Robin correction, which is why they cancel
    theory = {}
    for eps in (0.0, *eps_list):
        nrm = float(theta_mode_coeffs(eps, p.M) @ theta_mode_coeffs(eps, p.M))
        theory[eps] = math.exp(out["rate"] * nrm)
    for i, eps in enumerate(eps_list):
        t_naive = out["t_end"] * (theory[eps] - theory[0.0]) / eps
        est, se = mean_se(out["naive"][i])
        assert abs(est - t_naive) < 3.0 * se
        assert abs(est) > 5.0 * se
        est_r, se_r = mean_se(out["robin"][i])
        assert abs(est_r) < 0.5 * abs(est)
        assert abs(est_r) < 4.0 * se_r
    # with the tail resolved the corrected defect vanishes with eps
    fine = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]
    vals = []
    for eps in fine:
        n_e = float(theta_mode_coeffs(eps, 512) @ theta_mode_coeffs(eps, 512))
        n_0 = float(theta_mode_coeffs(0.0, 512) @ theta_mode_coeffs(0.0, 512))
        pe, p0 = math.exp(0.125 * n_e), math.exp(0.125 * n_0)
        vals.append(abs((pe - p0) / eps + 0.125 * p0))
    assert vals[0] > vals[1] > vals[2] > vals[3]
    assert vals[-1] < 0.02

    with pytest.raises(ValueError):
        she_consistency(ts[:-1], ys, p)


def test_nonlin_increment_probe_scaling():
    p = SpdeParams(A=1.0, D=0.5, Ebar=1.0, M=32, dt=2e-3)
    ts, ys = _ou_ensemble(p, 0.5, 5, 256, seed=41)
    far = nonlin_increment_var(ts, ys, p, 1.0 / 8.0, 1.0 / 32.0)
    near = nonlin_increment_var(ts, ys, p, 1.0 / 16.0, 1.0 / 32.0)
    assert far > near > 0.0


def test_state_wrappers_advance_clock():
    p = SpdeParams(M=6)
    y = stationary_modes(p, (), np.random.default_rng(2))
    s0 = GalerkinState(y=y, t=0.25, params=p)
    s1 = ou_step(s0, 1e-3, np.random.default_rng(8))
    assert s1.t == pytest.approx(0.251)
    assert np.array_equal(s1.y, ou_step_modes(y, 1e-3, p, np.random.default_rng(8)))
    with pytest.raises(ValueError):
        burgers_step(s0, dt=0.0, rng=np.random.default_rng(0))


def test_run_burgers_contract():
    p = SpdeParams(Ebar=1.0, M=8, dt=1e-3, eps=1.0 / 8.0)
    ts, ys = run_burgers(p, 0.02, 4, np.random.default_rng(13), shape=(3,))
    assert ys.shape == (len(ts), 3, 8)
    assert ts[0] == 0.0 and ts[-1] == pytest.approx(0.02)
    assert np.allclose(np.diff(ts), 4 * p.dt)
    # explicit start state is used verbatim
    y0 = np.zeros((3, 8))
    ts2, ys2 = run_burgers(p, 0.004, 2, np.random.default_rng(13), shape=(3,), y0=y0)
    assert np.array_equal(ys2[0], y0)


def test_blow_up_raises():
    # the explicit drift step is unstable when dt ignores the CFL bound
    p = SpdeParams(Ebar=40.0, M=16, dt=5e-3, eps=1.0 / 8.0)
    assert p.dt > p.cfl_dt
    y0 = np.full((1, 16), 3.0)
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(FloatingPointError, match="blow-up"):
            run_burgers(p, 1.0, 1, np.random.default_rng(5), shape=(1,), y0=y0)
