import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sbm.bernstein import (
    Family,
    PhiSpec,
    Transience,
    check_assumption_h,
    check_bernstein,
    check_complete_monotone,
    custom,
    ell_eval,
    log_plus_stable,
    log_power,
    parse_phi,
    phi_eval,
    phi_prime,
    relativistic,
    stable,
    stable_sum,
    transience_check,
)
from sbm.errors import DomainError, UnsupportedError


def test_phi_examples():
    assert phi_eval(stable(1.0), 4.0) == pytest.approx(2.0, rel=1e-14)
    assert phi_eval(relativistic(1.0), 3.0) == pytest.approx(1.0, rel=1e-14)
    assert phi_eval(stable_sum(1.0, 0.5), 1.0) == pytest.approx(2.0, rel=1e-14)


def test_phi_prime_examples():
    assert phi_prime(stable(1.0), 4.0) == pytest.approx(0.25, rel=1e-14)
    assert phi_prime(stable_sum(1.0, 0.5), 1.0) == pytest.approx(0.75, rel=1e-14)
    assert phi_prime(relativistic(1.0), 3.0) == pytest.approx(0.25, rel=1e-14)


def test_ell_examples():
    assert ell_eval(stable(1.0), 7.0) == pytest.approx(1.0)
    assert ell_eval(stable_sum(1.0, 0.5), 16.0) == pytest.approx(1.5, rel=1e-14)
    assert ell_eval(log_power(1.0, 0.5), math.e - 1) == pytest.approx(1.0, rel=1e-14)


def test_nonpositive_lambda_rejected():
    with pytest.raises(DomainError):
        phi_eval(stable(1.0), 0.0)
    with pytest.raises(DomainError):
        phi_prime(stable(1.0), -1.0)


@pytest.mark.parametrize("kwargs", [
    dict(family="stable", alpha=2.0),
    dict(family="stablesum", alpha=1.0, beta=1.5),
    dict(family="logpower", alpha=1.5, gamma=0.6),
    dict(family="logpowerneg", alpha=1.0, beta=1.0),
    dict(family="stable", alpha=1.0, drift=1.0),
])
def test_invalid_parameters(kwargs):
    with pytest.raises(DomainError):
        PhiSpec(**kwargs)


def test_parse_round_trip(families):
    for spec in families:
        assert parse_phi(str(spec)) == spec
    assert parse_phi("stablesum:a=1.2,b=0.6") == stable_sum(1.2, 0.6)
    with pytest.raises(DomainError):
        parse_phi("gamma:alpha=1")
    with pytest.raises(DomainError):
        parse_phi("stable:beta=1")
    with pytest.raises(UnsupportedError):
        parse_phi("custom:alpha=1")


def test_bernstein_property(families):
    grid = np.logspace(-4, 6, 60)
    for spec in families:
        res = check_bernstein(spec, grid, order=4)
        assert res.passed, (str(spec), res)


def test_phi_prime_matches_differences(families):
    lam = np.logspace(-2, 4, 25)
    h = 1e-5 * lam
    for spec in families:
        fd = (phi_eval(spec, lam + h) - phi_eval(spec, lam - h)) / (2 * h)
        np.testing.assert_allclose(phi_prime(spec, lam), fd, rtol=1e-6)


def test_assumption_h_envelope(families):
    for spec in families:
        rep = check_assumption_h(spec)
        assert rep.geometric_spread < 1.0001, str(spec)
        assert rep.passed


def test_complete_monotone_examples():
    grid = np.linspace(0.1, 10, 40)
    assert check_complete_monotone(lambda t: np.exp(-t), grid, 6).passed
    assert check_complete_monotone(lambda t: 1 / np.sqrt(np.pi * t), grid, 6).passed
    bad = check_complete_monotone(lambda t: np.sin(t) + 2, grid, 2)
    assert not bad.passed
    assert bad.worst_violation < 0


def test_complete_monotone_errors():
    with pytest.raises(DomainError):
        check_complete_monotone(np.exp, np.linspace(0, 1, 3), 4)
    with pytest.raises(DomainError):
        check_complete_monotone(np.exp, np.linspace(0, 1, 20), 7)
    with pytest.raises(DomainError):
        check_complete_monotone(np.exp, np.array([0.0, 2.0, 1.0, 3.0]), 1)


def test_transience_examples():
    assert transience_check(stable(1.0), 3).verdict is Transience.TRANSIENT
    assert transience_check(stable(1.0), 1).verdict is Transience.RECURRENT
    assert transience_check(stable(1.0), 2).verdict is Transience.TRANSIENT
    assert transience_check(relativistic(1.0), 2).verdict is Transience.RECURRENT
    assert transience_check(relativistic(1.0), 3).verdict is Transience.TRANSIENT


def test_transience_integral_diverges_when_recurrent():
    small = transience_check(stable(1.0), 1, eps=1e-4).integral
    smaller = transience_check(stable(1.0), 1, eps=1e-8).integral
    assert smaller > 1.9 * small
    conv = [transience_check(stable(1.0), 3, eps=e).integral for e in (1e-4, 1e-8)]
    assert conv[1] == pytest.approx(conv[0], rel=1e-3)


def test_log_plus_stable_flagged():
    res = transience_check(log_plus_stable(1.0), 2)
    assert res.verdict is Transience.TRANSIENT
    assert res.note
    assert transience_check(log_plus_stable(1.0), 1).verdict is Transience.RECURRENT


def test_custom_without_exponent_unsupported():
    spec = custom(1.0, np.sqrt)
    assert spec.family is Family.CUSTOM
    with pytest.raises(UnsupportedError):
        transience_check(spec, 2)


@settings(max_examples=60, deadline=None)
@given(alpha=st.floats(0.05, 1.95), lam=st.floats(1e-3, 1e5), ratio=st.floats(0.05, 0.95))
def test_phi_increasing_and_concave(alpha, lam, ratio):
    spec = stable_sum(alpha, ratio * alpha)
    a, b = phi_eval(spec, lam), phi_eval(spec, 2 * lam)
    assert b > a > 0
    assert b <= 2 * a * (1 + 1e-12)
