import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chebalance.cheby import Weights, augment, local_frame_wrench, solve
from chebalance.contacts import ContactLimits, Mode, SignConvention, SlidingSpec, assemble
from chebalance.friction import FilterKind, FrictionEstimator, measure_mu

from conftest import make_contact


def f_of(mu, fz=100.0):
    return (mu * fz, 0.0, fz)


def test_measure_examples():
    assert measure_mu((3.0, 4.0, 10.0)) == 0.5
    assert measure_mu((0.0, 0.0, 50.0)) == 0.0
    with pytest.raises(ValueError):
        measure_mu((1.0, 0.0, 0.0))


@pytest.mark.parametrize("kwargs", [{"gamma": 1.5}, {"gamma": -0.1}, {"fz_threshold": 0.0}, {"initial_guess": -1.0}])
def test_bad_parameters(kwargs):
    with pytest.raises(ValueError):
        FrictionEstimator(**kwargs)


def test_worked_filter_value():
    est = FrictionEstimator(gamma=0.8, mu_measured_prev=0.5).update(f_of(0.3))
    assert est.estimate == 0.46
    assert est.mu_measured_prev == 0.3


def test_two_tap_filter_blends_previous_raw_measurement():
    est = FrictionEstimator(gamma=0.9, initial_guess=0.5).update(f_of(0.1))
    assert est.estimate == pytest.approx(0.46)
    # next step blends the raw 0.1, not the filtered 0.46
    assert est.update(f_of(0.1)).estimate == pytest.approx(0.1)


def test_below_threshold_holds_state():
    est = FrictionEstimator(fz_threshold=5.0).update(f_of(0.3))
    held = est.update((1.0, 0.0, 3.0))
    assert held == est
    assert FrictionEstimator(fz_threshold=5.0).update_recursive((1.0, 0.0, 3.0)).mu_filtered is None


def test_gamma_zero_passes_measurement_through():
    for kind in FilterKind:
        est = FrictionEstimator(gamma=0.0, kind=kind).step(f_of(0.37))
        assert est.estimate == pytest.approx(0.37)


def test_gamma_one_freezes_recursive():
    est = FrictionEstimator(gamma=1.0, initial_guess=0.5, kind=FilterKind.RECURSIVE)
    for _ in range(10):
        est = est.step(f_of(0.1))
    assert est.estimate == 0.5


def test_gamma_one_two_tap_filter_lags_one_step():
    est = FrictionEstimator(gamma=1.0, initial_guess=0.5)
    est = est.update(f_of(0.1))
    assert est.estimate == 0.5
    est = est.update(f_of(0.2))
    assert est.estimate == pytest.approx(0.1)


def test_recursive_converges_in_44_steps():
    est = FrictionEstimator(gamma=0.9, initial_guess=0.2, kind=FilterKind.RECURSIVE)
    errs = []
    for _ in range(44):
        est = est.step(f_of(0.4))
        errs.append(abs(est.estimate - 0.4))
    # within 1 % of the initial 0.2 gap after 44 steps, not after 43
    assert errs[42] > 0.01 * 0.2
    assert errs[43] <= 0.01 * 0.2


def test_recursive_noise_std():
    gamma, sigma = 0.9, 0.05
    rng = np.random.default_rng(0)
    est = FrictionEstimator(gamma=gamma, initial_guess=0.4, kind=FilterKind.RECURSIVE)
    vals = np.empty(100_000)
    for k in range(vals.size):
        est = est.update_recursive(f_of(0.4 + sigma * rng.standard_normal()))
        vals[k] = est.estimate
    expected = sigma * math.sqrt((1 - gamma) / (1 + gamma))
    assert np.std(vals[1000:]) == pytest.approx(expected, rel=0.05)
    assert np.mean(vals[1000:]) == pytest.approx(0.4, abs=1e-3)


def test_two_tap_filter_noise_std():
    gamma, sigma = 0.9, 0.02
    rng = np.random.default_rng(1)
    est = FrictionEstimator(gamma=gamma, initial_guess=0.4)
    vals = np.empty(50_000)
    for k in range(vals.size):
        est = est.update(f_of(0.4 + sigma * rng.standard_normal()))
        vals[k] = est.estimate
    assert np.std(vals) == pytest.approx(sigma * math.hypot(gamma, 1 - gamma), rel=0.05)


@given(st.floats(0.0, 1.0), st.lists(st.floats(0.0, 2.0), min_size=1, max_size=30), st.floats(0.0, 2.0))
def test_estimate_stays_in_hull_of_inputs(gamma, mus, guess):
    for kind in FilterKind:
        est = FrictionEstimator(gamma=gamma, initial_guess=guess, kind=kind)
        for mu in mus:
            est = est.step(f_of(mu))
        lo, hi = min(mus + [guess]), max(mus + [guess])
        assert lo - 1e-12 <= est.estimate <= hi + 1e-12


def test_estimator_is_immutable():
    est = FrictionEstimator()
    est.update(f_of(0.2))
    assert est.mu_filtered is None


@pytest.mark.parametrize("sign", list(SignConvention))
def test_commanded_sliding_force_reproduces_mu(sign):
    """Loop closure: the solved sliding force measures back to the commanded coefficient."""
    lim = ContactLimits(mu=0.6, sigma_x=0.1, sigma_y=0.05, fz_min=0.0, fz_max=500.0)
    slide = make_contact("s", [0.2, 0.1, 0.0], mode=Mode.SLIDING, limits=lim,
                         sliding=SlidingSpec(np.array([0.3, -0.2]), 0.37, 150.0, sign))
    feet = [make_contact("a", [0.0, 0.1, 0.0], limits=lim), make_contact("b", [0.0, -0.1, 0.0], limits=lim)]
    b = assemble(40, 9.81, feet + [slide])
    sol = solve(augment(b, weights=Weights()))
    assert sol.optimal
    f = local_frame_wrench(sol, b.contacts[2]).force
    assert measure_mu(f) == pytest.approx(0.37, abs=1e-9)
    assert FrictionEstimator(gamma=0.0).update(f).estimate == pytest.approx(0.37, abs=1e-9)
