"""Exact-enumeration checks for the jump chain and its invariant measure."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wasep.core import (
    MAX_EXACT_SITES,
    JumpChain,
    SimParams,
    apply_channel,
    channel_rates,
    channel_rates_array,
    dirichlet_form,
    dirichlet_form_parts,
    exact_generator,
    invariance_violation,
    reversibility_violation,
    sample_initial,
    stationary_weights,
)

GRID_E = (0.0, 1.0, -0.5)
GRID_GAMMA = (0.5, 1.0)
GRID_RHO = (0.3, 0.5, 0.7)


# ---------------------------------------------------------------------------
# invariance and reversibility, exact


@pytest.mark.parametrize("n", range(3, 9))
def test_product_measure_invariant_for_all_rates(n):
    """nu L = 0 exactly: the Bernoulli product measure is stationary for
    every bias strength, decay exponent, and reservoir density."""
    for E in GRID_E:
        for gamma in GRID_GAMMA:
            for rho in GRID_RHO:
                params = SimParams(n=n, E=E, gamma=gamma, rho=rho)
                assert invariance_violation(params) < 1e-12


def test_reversible_only_without_bias():
    params = SimParams(n=6, E=0.0, gamma=0.5, rho=0.5)
    assert reversibility_violation(params) < 1e-12
    biased = SimParams(n=6, E=1.0, gamma=0.5, rho=0.5)
    assert reversibility_violation(biased) > 1e-6


def test_off_half_density_reversible_at_zero_bias():
    # detailed balance needs E = 0 but holds at any reservoir density
    params = SimParams(n=5, E=0.0, gamma=0.5, rho=0.3)
    assert reversibility_violation(params) < 1e-12


def test_generator_rows_sum_to_zero():
    params = SimParams(n=6, E=0.7, gamma=0.5, rho=0.4)
    L = exact_generator(params)
    assert np.abs(L.sum(axis=1)).max() < 1e-12
    off_diag = L - np.diag(np.diag(L))
    assert off_diag.min() >= 0.0


def test_stationary_weights_normalized():
    params = SimParams(n=7, E=0.3, gamma=1.0, rho=0.6)
    nu = stationary_weights(params)
    assert nu.sum() == pytest.approx(1.0, abs=1e-14)
    assert nu.min() > 0.0


# ---------------------------------------------------------------------------
# Dirichlet form, two routes


def test_dirichlet_form_matches_generator_pairing():
    """int f (-L f) dnu equals the half-sum-of-squares form; the identity
    needs invariance of nu, so it doubles as an invariance check."""
    params = SimParams(n=6, E=0.8, gamma=0.5, rho=0.5)
    rng = np.random.default_rng(3)
    L = exact_generator(params)
    nu = stationary_weights(params)
    for _ in range(5):
        f = rng.standard_normal(L.shape[0])
        pairing = -float(nu @ (f * (L @ f)))
        assert dirichlet_form(f, params) == pytest.approx(pairing, rel=1e-12)


def test_dirichlet_form_parts_sum_and_sign():
    params = SimParams(n=5, E=0.5, gamma=0.5, rho=0.5)
    rng = np.random.default_rng(4)
    f = rng.standard_normal(1 << params.num_sites)
    parts = dirichlet_form_parts(f, params)
    total = dirichlet_form(f, params)
    assert parts["bulk"] + parts["boundary"] == pytest.approx(total, rel=1e-12)
    assert parts["bulk"] >= 0.0 and parts["boundary"] >= 0.0
    assert dirichlet_form(np.ones(1 << params.num_sites), params) == pytest.approx(0.0, abs=1e-15)


# ---------------------------------------------------------------------------
# channels


def test_channel_rates_layout_and_totals():
    params = SimParams(n=5, E=1.0, gamma=0.5, rho=0.5)
    eta = np.array([1, 0, 1, 1], dtype=np.int8)
    rates = channel_rates_array(eta, params)
    assert rates.shape == (params.num_channels,)
    eps = params.eps
    # bond 0 holds (1, 0): only the biased rightward jump is possible
    assert rates[0] == pytest.approx(1.0 + eps)
    assert rates[1] == 0.0
    # bond 1 holds (0, 1): only the leftward jump
    assert rates[2] == 0.0
    assert rates[3] == 1.0
    base = 2 * params.num_bonds
    # eta(1) = 1: nothing can enter left, exit runs at 1 - rho
    assert rates[base + 0] == 0.0
    assert rates[base + 1] == pytest.approx(1.0 - params.rho)
    # eta(n-1) = 1: biased exit right, no entry
    assert rates[base + 2] == pytest.approx((1.0 + eps) * (1.0 - params.rho))
    assert rates[base + 3] == 0.0


def test_channel_list_agrees_with_array():
    params = SimParams(n=6, E=0.4, gamma=1.0, rho=0.3)
    eta = sample_initial(params, np.random.default_rng(9))
    listed = channel_rates(eta, params)
    arr = channel_rates_array(eta, params)
    assert len(listed) == arr.shape[0]
    for ch in listed:
        assert arr[ch.index] == pytest.approx(ch.rate)
        # height counters move only on boundary events
        if ch.index < 2 * params.num_bonds:
            assert ch.dh1 == 0 and ch.dhn == 0


def test_bulk_swap_pair_restores_state():
    params = SimParams(n=6, E=0.2, gamma=0.5, rho=0.5)
    eta = np.array([1, 0, 0, 1, 0], dtype=np.int8)
    before = eta.copy()
    assert apply_channel(eta, 0, params) == (0, 0)   # bond 0 jump right
    assert apply_channel(eta, 1, params) == (0, 0)   # bond 0 jump left
    np.testing.assert_array_equal(eta, before)


def test_boundary_channels_move_height_counters():
    params = SimParams(n=4, E=0.0, gamma=0.5, rho=0.5)
    base = 2 * params.num_bonds
    eta = np.zeros(params.num_sites, dtype=np.int8)
    assert apply_channel(eta, base + 0, params) == (-1, 0)   # enter left
    assert eta[0] == 1
    assert apply_channel(eta, base + 1, params) == (1, 0)    # exit left
    assert eta[0] == 0
    assert apply_channel(eta, base + 3, params) == (0, 1)    # enter right
    assert eta[-1] == 1
    assert apply_channel(eta, base + 2, params) == (0, -1)   # exit right
    assert eta[-1] == 0


@given(
    n=st.integers(4, 8),
    e_scaled=st.integers(-9, 20),
    rho_scaled=st.integers(1, 9),
    steps=st.integers(1, 60),
    seed=st.integers(0, 2**32 - 1),
)
@settings(max_examples=60, deadline=None)
def test_jump_chain_rate_index_stays_exact(n, e_scaled, rho_scaled, steps, seed):
    """The incrementally maintained rate index equals a fresh recompute
    after any event sequence."""
    params = SimParams(n=n, E=e_scaled / 10.0, gamma=0.5, rho=rho_scaled / 10.0)
    rng = np.random.default_rng(seed)
    chain = JumpChain(sample_initial(params, rng), params)
    for _ in range(steps):
        chain.step(rng)
    np.testing.assert_allclose(
        chain.rates, channel_rates_array(chain.eta, params), atol=1e-14)


@given(
    n=st.integers(3, 8),
    e_scaled=st.integers(-9, 20),
    gamma_scaled=st.integers(5, 20),
    rho_scaled=st.integers(1, 9),
)
@settings(max_examples=80, deadline=None)
def test_invariance_holds_across_parameter_space(n, e_scaled, gamma_scaled, rho_scaled):
    params = SimParams(
        n=n, E=e_scaled / 10.0, gamma=gamma_scaled / 10.0, rho=rho_scaled / 10.0)
    assert invariance_violation(params) < 1e-12


# ---------------------------------------------------------------------------
# parameters and sampling


def test_params_validation():
    with pytest.raises(ValueError):
        SimParams(n=2)
    with pytest.raises(ValueError):
        SimParams(n=8, rho=0.0)
    with pytest.raises(ValueError):
        SimParams(n=8, rho=1.0)
    with pytest.raises(ValueError):
        SimParams(n=8, gamma=0.0)
    with pytest.raises(ValueError):
        SimParams(n=4, E=-2.0, gamma=0.5)   # 1 + eps = 0: rates degenerate


def test_params_derived_quantities():
    params = SimParams(n=16, E=2.0, gamma=0.5, rho=0.3)
    assert params.eps == pytest.approx(2.0 / 4.0)
    assert params.chi == pytest.approx(0.3 * 0.7)
    assert params.c_n == pytest.approx(-0.21 * 2.0 * 16 ** 1.5)
    assert params.num_sites == 15
    assert params.num_bonds == 14
    assert params.num_channels == 2 * 16


def test_exact_enumeration_capped():
    with pytest.raises(ValueError):
        invariance_violation(SimParams(n=MAX_EXACT_SITES + 2))


def test_sample_initial_reproducible_and_bernoulli():
    params = SimParams(n=200, rho=0.3)
    eta1 = sample_initial(params, np.random.default_rng(7))
    eta2 = sample_initial(params, np.random.default_rng(7))
    np.testing.assert_array_equal(eta1, eta2)
    assert set(np.unique(eta1)) <= {0, 1}
    big = SimParams(n=20001, rho=0.3)
    eta = sample_initial(big, np.random.default_rng(8))
    # binomial 3-sigma band around the target density
    assert abs(eta.mean() - 0.3) < 3 * np.sqrt(0.21 / big.num_sites)
