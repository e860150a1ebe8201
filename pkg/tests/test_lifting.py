"""Lifting, fast sample/hold error systems and multirate filter recovery."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sddisc.classic import step_invariant
from sddisc.errors import UnstableSystemError, ValidationError
from sddisc.lifting import (DesignSpec, build_error_system, build_error_system_multirate,
                            build_error_system_singlerate, fast_simulate, hold_matrix,
                            lift_signal, lift_system, recover_multirate_filter,
                            sampler_matrix, unlift_signal, upsample)
from sddisc.lti import (SampledSignal, StateSpaceModel, c2d_zoh, delay_chain,
                        frequency_response, series, simulate, static_gain)
from sddisc.norms import hinf_norm_discrete
from sddisc.plant import lower_lft
from sddisc.synthesis import error_norm

from conftest import random_stable_discrete


def lifted_response(sys, w):
    return frequency_response(sys.model, w)


# ---------------------------------------------------------------- spec

def test_design_spec_defaults():
    s = DesignSpec()
    assert (s.h, s.m, s.N, s.L, s.eps_reg) == (1.0, 4, 12, 1, 1e-4)
    assert s.fast_period == pytest.approx(1 / 12) and s.hold_length == 12


@pytest.mark.parametrize("kw,field", [({"h": 0}, "h"), ({"m": -1}, "m"), ({"N": 0}, "N"),
                                      ({"N": 12, "L": 5}, "L"), ({"eps_reg": 0}, "eps_reg"),
                                      ({"N": 2.5}, "N")])
def test_design_spec_validation(kw, field):
    with pytest.raises(ValidationError) as err:
        DesignSpec(**kw)
    assert err.value.field == field


# ---------------------------------------------------------------- lifting

def test_lift_n1_is_identity(rng):
    H = random_stable_discrete(rng, 3)
    L = lift_system(H, 1)
    assert L.model is H and L.blocking == 1


def test_lift_scalar_n2_by_hand():
    a, b, c, d = 0.5, 2.0, 3.0, 0.25
    L = lift_system(StateSpaceModel([[a]], [[b]], [[c]], [[d]], period=0.1), 2)
    np.testing.assert_allclose(L.model.A, [[a * a]])
    np.testing.assert_allclose(L.model.B, [[a * b, b]])
    np.testing.assert_allclose(L.model.C, [[c], [c * a]])
    np.testing.assert_allclose(L.model.D, [[d, 0], [c * b, d]])
    assert L.slow_period == pytest.approx(0.2) and L.fast_period == pytest.approx(0.1)


def test_lift_matches_simulation(rng):
    H = random_stable_discrete(rng, 4, 2, 3)
    N = 3
    u = rng.standard_normal((4 * N, 2))
    y = simulate(H, u)
    yl = simulate(lift_system(H, N).model, lift_signal(u, N))
    np.testing.assert_allclose(unlift_signal(yl, N), y, atol=1e-13)


def test_lift_keeps_state_dimension(rng):
    H = random_stable_discrete(rng, 5, 2, 1)
    L = lift_system(H, 4)
    assert L.model.n_states == 5
    assert (L.model.n_inputs, L.model.n_outputs) == (8, 4)


def test_lift_rejects():
    H = StateSpaceModel([[0.5]], [[1]], [[1]], [[0]], period=1.0)
    with pytest.raises(ValidationError):
        lift_system(H, 0)
    with pytest.raises(ValidationError):
        lift_system(H.replace(period=None), 2)


def test_lift_is_multiplicative(rng):
    H1 = random_stable_discrete(rng, 3, 2, 2)
    H2 = random_stable_discrete(rng, 2, 2, 1)
    N = 3
    prod = lift_system(series(H2, H1), N)
    parts = series(lift_system(H2, N).model, lift_system(H1, N).model)
    for w in rng.uniform(0, np.pi / 3, 16):
        np.testing.assert_allclose(lifted_response(prod, w), frequency_response(parts, w),
                                   atol=1e-9)


@given(st.integers(0, 10_000), st.sampled_from([2, 3, 4]))
def test_lift_preserves_norm(seed, N):
    H = random_stable_discrete(np.random.default_rng(seed), 3)
    a = hinf_norm_discrete(H, rel_tol=1e-9)
    b = hinf_norm_discrete(lift_system(H, N).model, rel_tol=1e-9)
    assert b == pytest.approx(a, rel=1e-6)


def test_lifted_delay():
    N, m = 3, 2
    Z = delay_chain(m, N, 1.0)
    assert hinf_norm_discrete(Z) == pytest.approx(1.0, rel=1e-6)
    u = np.zeros((5, N))
    u[0] = [1, 2, 3]
    y = simulate(Z, u)
    assert np.all(y[np.arange(5) != m] == 0)
    np.testing.assert_array_equal(y[m], u[0])


# ---------------------------------------------------------------- sample / hold

def test_hold_and_sampler():
    np.testing.assert_array_equal(hold_matrix(4, 2), [[1, 0], [1, 0], [0, 1], [0, 1]])
    np.testing.assert_array_equal(hold_matrix(3, 1), np.ones((3, 1)))
    np.testing.assert_array_equal(hold_matrix(3, 3), np.eye(3))
    np.testing.assert_array_equal(sampler_matrix(3), [[1, 0, 0]])
    with pytest.raises(ValidationError):
        hold_matrix(4, 3)


# ---------------------------------------------------------------- error system

def test_bench_plant_dimensions(bench_plant):
    assert bench_plant.dims == (57, 13, 1, 12, 1)
    assert np.all(bench_plant.D22 == 0) and np.all(bench_plant.B2 == 0)
    np.testing.assert_array_equal(bench_plant.D12, -np.ones((12, 1)))
    np.testing.assert_allclose(bench_plant.D21, np.hstack([np.zeros((1, 12)), [[1e-4]]]))


def test_zero_filter_gives_target_norm(G_bench, F_bench):
    spec = DesignSpec(m=0, N=4)
    P = build_error_system(G_bench, F_bench, spec)
    K0 = static_gain([[0.0]], period=1.0)
    GN = lift_system(c2d_zoh(G_bench, 0.25), 4).model
    FN = lift_system(c2d_zoh(F_bench, 0.25), 4).model
    ref = hinf_norm_discrete(series(GN, FN))
    assert error_norm(P, K0) == pytest.approx(ref, rel=1e-5)


def test_unit_target_matches_compositional_construction():
    G = static_gain([[1.0]])
    F = StateSpaceModel([[-1.0]], [[1.0]], [[1.0]], [[0.0]])
    spec = DesignSpec(h=1.0, m=0, N=2)
    T1 = build_error_system(G, F, spec).without_noise().target()
    FN = lift_system(c2d_zoh(F, 0.5), 2).model
    ref = series(lift_system(c2d_zoh(G, 0.5), 2).model, FN)
    for w in np.linspace(0.1, 3.0, 7):
        np.testing.assert_allclose(frequency_response(T1, w), frequency_response(ref, w),
                                   atol=1e-14)


def test_error_system_matches_direct_chain(G_bench, F_bench, rng):
    # closed loop with K_d against an explicit fast-rate simulation of E_N
    spec = DesignSpec(h=1.0, m=2, N=4)
    P = build_error_system(G_bench, F_bench, spec).without_noise()
    K = step_invariant(G_bench, 1.0)
    E = lower_lft(P, K)
    slow = 12
    w = rng.standard_normal((slow * 4, 1))
    e = unlift_signal(simulate(E, lift_signal(w, 4)), 4)[:, 0]
    hf = 0.25
    u = simulate(c2d_zoh(F_bench, hf), w)
    ideal = simulate(series(delay_chain(8, 1, hf), c2d_zoh(G_bench, hf)), u)[:, 0]
    digital = np.repeat(simulate(K, u[::4])[:, 0], 4)
    np.testing.assert_allclose(e, ideal - digital, atol=1e-12)


def test_singlerate_ignores_L(G_bench, F_bench):
    spec = DesignSpec(N=4, L=2, m=1)
    P = build_error_system_singlerate(G_bench, F_bench, spec)
    assert P.dims[2] == 1


def test_multirate_hold(G_bench, F_bench):
    P = build_error_system_multirate(G_bench, F_bench, DesignSpec(N=4, L=2, m=1))
    np.testing.assert_array_equal(-P.D12, [[1, 0], [1, 0], [0, 1], [0, 1]])
    P1 = build_error_system_multirate(G_bench, F_bench, DesignSpec(N=4, L=1, m=1))
    P2 = build_error_system_singlerate(G_bench, F_bench, DesignSpec(N=4, L=1, m=1))
    for name in ("A", "B1", "C1", "D11", "D12", "C2", "D21"):
        assert np.array_equal(getattr(P1, name), getattr(P2, name))
    Pf = build_error_system_multirate(G_bench, F_bench, DesignSpec(N=4, L=4, m=1))
    np.testing.assert_array_equal(-Pf.D12, np.eye(4))


def test_error_system_rejects_bad_models(G_bench, F_bench):
    unstable = StateSpaceModel([[0.5]], [[1.0]], [[1.0]], [[0.0]])
    with pytest.raises(UnstableSystemError):
        build_error_system(unstable, F_bench, DesignSpec())
    with pytest.raises(UnstableSystemError):
        build_error_system(G_bench, unstable, DesignSpec())
    proper = F_bench.replace(D=np.ones((1, 1)))
    with pytest.raises(ValidationError, match="strictly proper"):
        build_error_system(G_bench, proper, DesignSpec())
    with pytest.raises(ValidationError):
        build_error_system(c2d_zoh(G_bench, 1.0), F_bench, DesignSpec())


# ---------------------------------------------------------------- multirate filter

def test_recover_l1_unchanged(rng):
    K = random_stable_discrete(rng, 2)
    assert recover_multirate_filter(K, 1) is K


def test_recover_static_polyphase():
    K = recover_multirate_filter(static_gain([[2.0], [3.0]], period=1.0), 2)
    assert K.period == 0.5
    y = simulate(K, np.eye(6)[:, :1])[:, 0]
    np.testing.assert_allclose(y, [2, 3, 0, 0, 0, 0], atol=1e-15)


@given(st.integers(0, 10_000), st.sampled_from([2, 3, 4]))
def test_recover_round_trip(seed, L):
    rng = np.random.default_rng(seed)
    Kt = random_stable_discrete(rng, 3, 1, L)
    K = recover_multirate_filter(Kt, L)
    v = rng.standard_normal((8, 1))
    y_fast = simulate(K, upsample(v, L))
    np.testing.assert_allclose(lift_signal(y_fast, L), simulate(Kt, v), atol=1e-11)


def test_recover_rejects_wrong_output_count(rng):
    with pytest.raises(ValidationError):
        recover_multirate_filter(random_stable_discrete(rng, 2, 1, 3), 2)


# ---------------------------------------------------------------- fast simulation

def test_fast_simulate_zero_and_impulse():
    sig = SampledSignal(np.zeros(5), 0.1)
    H = StateSpaceModel([[0.5]], [[1.0]], [[1.0]], [[0.0]], period=0.1)
    assert np.all(fast_simulate(H, sig).values == 0)
    out = fast_simulate(static_gain([[3.0]], period=0.1), SampledSignal(np.eye(4)[0], 0.1))
    np.testing.assert_array_equal(out.values[:, 0], [3, 0, 0, 0])


def test_fast_simulate_first_order_step():
    a, b, c = 0.8, 1.5, 2.0
    H = StateSpaceModel([[a]], [[b]], [[c]], [[0.0]], period=0.1)
    y = fast_simulate([H], SampledSignal(np.ones(10), 0.1)).values[:, 0]
    k = np.arange(10)
    np.testing.assert_allclose(y, (1 - a ** k) / (1 - a) * b * c, rtol=1e-13)


def test_fast_simulate_chain_and_mismatch():
    H = StateSpaceModel([[0.5]], [[1.0]], [[1.0]], [[0.0]], period=0.1)
    sig = SampledSignal(np.ones(6), 0.1)
    np.testing.assert_allclose(fast_simulate([H, H], sig).values,
                               simulate(series(H, H), np.ones((6, 1))))
    with pytest.raises(ValidationError):
        fast_simulate(H, SampledSignal(np.ones(3), 0.2))
