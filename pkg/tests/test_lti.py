"""State-space models, zero-order-hold sampling, responses and composition."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sddisc.errors import PoleAtFrequencyError, ValidationError
from sddisc.lti import (SampledSignal, StateSpaceModel, Stability, c2d_zoh, delay_chain,
                        dumps_model, frequency_response, load_model, matrix_exponential,
                        model_from_dict, model_to_dict, parallel, save_model, series, simulate,
                        stability, static_gain, subtract)

from conftest import random_stable_continuous, random_stable_discrete, rk4_step_response


def taylor_expm(M, terms=60, squarings=10):
    """exp(M) by a truncated Taylor series at scaled argument, then squaring."""
    X = M / 2.0 ** squarings
    E = np.eye(M.shape[0])
    term = np.eye(M.shape[0])
    for k in range(1, terms):
        term = term @ X / k
        E = E + term
    for _ in range(squarings):
        E = E @ E
    return E


def first_order(a=-1.0, b=1.0, c=1.0, d=0.0, period=None):
    return StateSpaceModel([[a]], [[b]], [[c]], [[d]], period=period)


# ---------------------------------------------------------------- model type

def test_shapes_are_validated():
    with pytest.raises(ValidationError) as err:
        StateSpaceModel(np.eye(2), np.ones((3, 1)), np.ones((1, 2)), [[0]])
    assert err.value.field == "B"
    with pytest.raises(ValidationError):
        StateSpaceModel(np.ones((2, 3)), np.ones((2, 1)), np.ones((1, 2)), [[0]])
    with pytest.raises(ValidationError):
        StateSpaceModel(np.eye(1), [[1]], [[1]], [[0, 0]])


def test_period_must_be_positive():
    with pytest.raises(ValidationError):
        first_order(period=0.0)
    with pytest.raises(ValidationError):
        first_order(period=-1.0)


def test_static_gain_has_no_states():
    K = static_gain([[2.0, 3.0]], period=0.5)
    assert K.n_states == 0 and K.n_inputs == 2 and K.n_outputs == 1
    assert K.is_discrete and stability(K) is Stability.STABLE


def test_matrices_are_read_only():
    G = first_order()
    with pytest.raises(ValueError):
        G.A[0, 0] = 3.0


def test_stability_tristate():
    assert stability(first_order(-1.0)) is Stability.STABLE
    assert stability(first_order(0.0)) is Stability.MARGINAL
    assert stability(first_order(1e-3)) is Stability.UNSTABLE
    assert stability(first_order(1.0, period=1.0)) is Stability.MARGINAL
    assert stability(first_order(0.5, period=1.0)) is Stability.STABLE
    assert stability(first_order(1.0 + 1e-12, period=1.0)) is Stability.MARGINAL


# ---------------------------------------------------------------- expm

def test_expm_zero_is_identity():
    np.testing.assert_array_equal(matrix_exponential(np.zeros((2, 2))), np.eye(2))


def test_expm_diagonal():
    np.testing.assert_allclose(matrix_exponential(np.diag([1.0, -1.0])),
                               np.diag([math.e, 1 / math.e]), rtol=1e-14)


def test_expm_against_taylor(rng):
    for _ in range(5):
        M = rng.standard_normal((4, 4))
        E = matrix_exponential(M)
        ref = taylor_expm(M)
        assert np.linalg.norm(E - ref, 2) <= 1e-12 * np.linalg.norm(ref, 2)


def test_expm_commuting_sum(rng):
    X = rng.standard_normal((3, 3)) * 0.5
    M1 = X @ X - 0.3 * X
    M2 = 2.0 * X + np.eye(3)
    lhs = matrix_exponential(M1 + M2)
    rhs = matrix_exponential(M1) @ matrix_exponential(M2)
    assert np.linalg.norm(lhs - rhs, 2) <= 1e-10 * np.linalg.norm(lhs, 2)


@pytest.mark.parametrize("bad", [np.ones((2, 3)), np.array([[np.nan]]), np.array([[np.inf]])])
def test_expm_rejects(bad):
    with pytest.raises(ValidationError):
        matrix_exponential(bad)


# ---------------------------------------------------------------- zoh

def test_zoh_integrator():
    Gd = c2d_zoh(StateSpaceModel([[0.0]], [[1.0]], [[1.0]], [[0.0]]), 0.5)
    assert Gd.A[0, 0] == 1.0 and Gd.B[0, 0] == pytest.approx(0.5, abs=1e-15)
    assert Gd.period == 0.5


def test_zoh_scalar_closed_form():
    Gd = c2d_zoh(first_order(-1.0), 1.0)
    assert Gd.A[0, 0] == pytest.approx(math.exp(-1), rel=1e-14)
    assert Gd.B[0, 0] == pytest.approx(1 - math.exp(-1), rel=1e-14)


def test_zoh_static():
    Gd = c2d_zoh(static_gain([[3.0]]), 0.1)
    assert Gd.n_states == 0 and Gd.D[0, 0] == 3.0 and Gd.period == 0.1


@pytest.mark.parametrize("h", [0.0, -1.0])
def test_zoh_rejects_bad_period(h):
    with pytest.raises(ValidationError):
        c2d_zoh(first_order(), h)


def test_zoh_rejects_discrete_input():
    with pytest.raises(ValidationError):
        c2d_zoh(first_order(0.5, period=1.0), 1.0)


def test_zoh_is_step_invariant(rng):
    for _ in range(3):
        G = random_stable_continuous(rng, 3)
        h = 0.4
        y_d = simulate(c2d_zoh(G, h), np.ones((21, 1)))
        y_c = rk4_step_response(G, h, 21, substeps=400)
        np.testing.assert_allclose(y_d, y_c, atol=1e-9)


def test_zoh_dc_gain_converges(rng):
    G = random_stable_continuous(rng, 3)
    dc = frequency_response(G, 0.0)
    errs = [np.abs(frequency_response(c2d_zoh(G, h), 1e-3) - dc).max() for h in (1, 0.1, 0.01)]
    assert errs[0] > errs[1] > errs[2]


# ---------------------------------------------------------------- responses

def test_response_of_static_gain():
    K = static_gain([[2.0]], period=1.0)
    for w in (0.0, 0.3, 3.0):
        assert frequency_response(K, w)[0, 0] == 2.0


def test_response_first_order():
    G = first_order()
    assert frequency_response(G, 0.0)[0, 0] == pytest.approx(1.0)
    assert frequency_response(G, 1.0)[0, 0] == pytest.approx(1 / (1 + 1j), rel=1e-15)


def test_response_discrete_uses_period():
    G = first_order(0.5, period=0.1)
    z = np.exp(1j * 2.0 * 0.1)
    assert frequency_response(G, 2.0)[0, 0] == pytest.approx(1 / (z - 0.5), rel=1e-14)


def test_response_at_pole():
    with pytest.raises(PoleAtFrequencyError):
        frequency_response(first_order(0.0), 0.0)
    with pytest.raises(PoleAtFrequencyError):
        frequency_response(first_order(1.0, period=1.0), 0.0)


# ---------------------------------------------------------------- composition

def test_series_poles_are_union():
    G1 = first_order(-1.0)
    G2 = first_order(-3.0, 2.0, 0.5)
    poles = np.sort(series(G2, G1).poles().real)
    np.testing.assert_allclose(poles, [-3.0, -1.0])


def test_series_and_subtract_responses(rng):
    G1 = random_stable_discrete(rng, 3, 2, 2)
    G2 = random_stable_discrete(rng, 2, 2, 2)
    S = series(G2, G1)
    Dd = subtract(G1, G2)
    P = parallel(G1, G2)
    for w in rng.uniform(0, math.pi, 32):
        r1, r2 = frequency_response(G1, w), frequency_response(G2, w)
        np.testing.assert_allclose(frequency_response(S, w), r2 @ r1, atol=1e-10)
        np.testing.assert_allclose(frequency_response(Dd, w), r1 - r2, atol=1e-10)
        np.testing.assert_allclose(frequency_response(P, w), r1 + r2, atol=1e-10)


def test_series_rejects_mismatch():
    with pytest.raises(ValidationError):
        series(first_order(0.5, period=1.0), first_order(0.5, period=2.0))
    with pytest.raises(ValidationError):
        series(first_order(), first_order(0.5, period=1.0))
    with pytest.raises(ValidationError):
        series(static_gain(np.ones((1, 2))), first_order())


def test_delay_chain_identity_when_zero():
    Z = delay_chain(0, 3, 1.0)
    assert Z.n_states == 0
    np.testing.assert_array_equal(Z.D, np.eye(3))


def test_delay_chain_shifts_impulse():
    y = simulate(delay_chain(1, 1, 1.0), np.eye(5)[:, :1])
    np.testing.assert_array_equal(y[:, 0], [0, 1, 0, 0, 0])


@given(st.integers(1, 4), st.integers(1, 3))
def test_delay_chain_impulse_support(m, width):
    Z = delay_chain(m, width, 1.0)
    assert Z.n_states == m * width
    u = np.zeros((m + 3, width))
    u[0] = np.arange(1, width + 1)
    y = simulate(Z, u)
    assert np.all(y[np.arange(m + 3) != m] == 0)
    np.testing.assert_array_equal(y[m], u[0])


# ---------------------------------------------------------------- simulation

def test_simulate_first_order_geometric():
    a, b, c = 0.7, 2.0, 0.5
    y = simulate(first_order(a, b, c, 0.0, period=1.0), np.ones((10, 1)))[:, 0]
    k = np.arange(10)
    np.testing.assert_allclose(y, c * b * (1 - a ** k) / (1 - a), rtol=1e-13)


def test_sampled_signal():
    s = SampledSignal([1.0, 2.0, 3.0], 0.5, start_index=2)
    assert len(s) == 3 and s.dim == 1
    np.testing.assert_allclose(s.times, [1.0, 1.5, 2.0])
    with pytest.raises(ValidationError):
        SampledSignal([1.0], 0.0)


# ---------------------------------------------------------------- json

def test_json_roundtrip_is_bitwise(tmp_path, rng):
    G = random_stable_discrete(rng, 4, 2, 3, period=0.25)
    path = tmp_path / "g.json"
    save_model(G, path)
    H = load_model(path)
    for name in "ABCD":
        assert np.array_equal(getattr(G, name), getattr(H, name))
    assert H.period == G.period
    assert dumps_model(H) == path.read_text()


def test_json_static_roundtrip():
    K = static_gain([[1.5]])
    doc = json.loads(json.dumps(model_to_dict(K)))
    K2 = model_from_dict(doc)
    assert K2.n_states == 0 and K2.D[0, 0] == 1.5 and not K2.is_discrete


@pytest.mark.parametrize("doc,field", [
    ({"domain": "analog", "A": [], "B": [], "C": [], "D": [[1]]}, "domain"),
    ({"domain": "discrete", "A": [[0.5]], "B": [[1]], "C": [[1]], "D": [[0]]}, "period"),
    ({"domain": "continuous", "A": [[0.5]], "B": [[1]], "C": [[1]]}, "D"),
    ({"domain": "continuous", "A": [[0.5]], "B": [[1], [2]], "C": [[1]], "D": [[0]]}, "B"),
])
def test_json_validation_names_field(doc, field):
    with pytest.raises(ValidationError) as err:
        model_from_dict(doc)
    assert err.value.field == field
