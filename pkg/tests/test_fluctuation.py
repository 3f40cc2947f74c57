import math

import numpy as np
import pytest

from sbm.bernstein import check_complete_monotone, log_power_neg, phi_eval, relativistic, stable, stable_sum
from sbm.errors import DomainError, NumericError, RangeError
from sbm.fluctuation import (
    ENVELOPE,
    build_fluctuation_table,
    check_chi_phi_envelope,
    check_renewal_asymptotics,
    chi_eval,
    log_chi,
    renewal_V,
    renewal_function,
    renewal_v,
)


@pytest.fixture(scope="module")
def stable_table():
    return build_fluctuation_table(stable(1.0), (1e-4, 1e2), 200)


def test_chi_stable_examples():
    assert chi_eval(stable(1.0), 4.0) == pytest.approx(2.0, rel=1e-6)
    assert chi_eval(stable(1.0), 1.0) == pytest.approx(1.0, rel=1e-6)
    lam = np.logspace(-3, 3, 13)
    np.testing.assert_allclose(chi_eval(stable(1.3), lam), lam**0.65, rtol=1e-10)


def test_chi_stablesum_envelope():
    spec = stable_sum(1.0, 0.5)
    val = chi_eval(spec, 10.0)
    root = math.sqrt(phi_eval(spec, 100.0))
    assert root / ENVELOPE <= val <= root * ENVELOPE


def test_chi_doubling_consistency():
    spec = relativistic(1.0)
    lam = np.logspace(-2, 2, 9)
    coarse = log_chi(spec, lam, rtol=1e-8)
    fine = log_chi(spec, lam, rtol=1e-13)
    np.testing.assert_allclose(np.exp(coarse), np.exp(fine), rtol=1e-8)


def test_chi_rejects_bad_lambda():
    with pytest.raises(DomainError):
        chi_eval(stable(1.0), 0.0)


def test_chi_non_convergence_carries_iterates():
    with pytest.raises(NumericError) as info:
        log_chi(stable_sum(1.0, 0.5), 3.0, rtol=1e-30)
    assert info.value.iterates is not None


@pytest.mark.parametrize("spec", [stable(1.0), relativistic(1.0), log_power_neg(1.0, 0.5)])
def test_envelope_reports(spec):
    rep = check_chi_phi_envelope(spec, np.logspace(-1, 2, 31))
    assert rep.passed
    assert 1 / ENVELOPE <= rep.ratio_min <= rep.ratio_max <= ENVELOPE
    if spec.family.value == "stable":
        assert rep.geometric_spread == pytest.approx(1.0, abs=1e-9)


def test_renewal_examples(stable_table):
    assert renewal_V(stable_table, 1.0) == pytest.approx(2 / math.sqrt(math.pi), rel=1e-3)
    assert renewal_V(stable_table, 0.25) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-3)
    assert renewal_V(stable_table, 0.0) == 0.0
    # below the table the power-law extension takes over
    assert renewal_V(stable_table, 1e-6) == pytest.approx(2e-3 / math.sqrt(math.pi), rel=1e-3)
    assert renewal_v(stable_table, 1.0) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-3)
    with pytest.raises(RangeError):
        renewal_V(stable_table, 1e3)
    with pytest.raises(RangeError):
        renewal_v(stable_table, 0.0)


def test_direct_renewal_matches_table(stable_table):
    t = np.array([0.01, 0.3, 7.0])
    np.testing.assert_allclose(renewal_function(stable(1.0), t), renewal_V(stable_table, t), rtol=1e-5)
    assert renewal_function(stable(1.0), 0.0) == 0.0


def test_table_invariants():
    spec = stable_sum(1.0, 0.5)
    tab = build_fluctuation_table(spec, (1e-4, 1e2), 200)
    assert tab.inversion == {"method": "gaver-stehfest", "order": 14}
    assert np.all(np.diff(tab.V_values) >= 0)
    assert np.all(np.diff(tab.v_values) <= 0)
    # V is the integral of v (trapezoid in log t on interior nodes)
    s = np.log(tab.grid)
    integ = tab.V_values[0] + np.concatenate(([0], np.cumsum(0.5 * np.diff(s) * (tab.v_values * tab.grid)[1:]
                                                         + 0.5 * np.diff(s) * (tab.v_values * tab.grid)[:-1])))
    np.testing.assert_allclose(integ[20:-20], tab.V_values[20:-20], rtol=5e-3)
    # dV/dt matches v at interior nodes
    dV = np.gradient(tab.V_values, tab.grid)
    np.testing.assert_allclose(dV[5:-5], tab.v_values[5:-5], rtol=1e-2)
    assert check_complete_monotone(tab.v_values, tab.grid, 4, rtol=1e-5).passed
    rep_V, rep_v = check_renewal_asymptotics(tab)
    assert rep_V.passed and rep_v.passed


def test_stable_asymptotics_constant(stable_table):
    rep_V, rep_v = check_renewal_asymptotics(stable_table)
    assert rep_V.geometric_spread < 1.005
    assert rep_v.geometric_spread < 1.005


def test_table_argument_checks():
    with pytest.raises(RangeError):
        build_fluctuation_table(stable(1.0), (1.0, 0.5), 50)
    with pytest.raises(RangeError):
        build_fluctuation_table(stable(1.0), (1e-2, 1.0), 8)


def test_table_csv(tmp_path, stable_table):
    path = stable_table.to_csv(tmp_path / "v.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "t,V,v"
    assert len(lines) == 201
