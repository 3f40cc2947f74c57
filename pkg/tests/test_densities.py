import math

import numpy as np
import pytest

from sbm import laplace
from sbm.bernstein import check_complete_monotone, log_power, phi_eval, relativistic, stable, stable_sum
from sbm.densities import (
    ZAHLE_FACTOR,
    build_density_table,
    check_density_asymptotics,
    check_mu_doubling,
    levy_density_mu,
    lower_zahle_constant,
    potential_density_u,
    zahle_upper_bound,
)
from sbm.errors import DomainError


def test_stable_u_and_mu():
    spec = stable(1.0)
    assert potential_density_u(spec, 1.0) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-12)
    assert potential_density_u(spec, 4.0) == pytest.approx(0.28209479, rel=1e-6)
    assert levy_density_mu(spec, 1.0) == pytest.approx(0.5 / math.sqrt(math.pi), rel=1e-12)
    assert levy_density_mu(spec, 4.0) == pytest.approx(0.035262, rel=1e-4)


@pytest.mark.parametrize("spec", [stable(1.0), stable(0.6), stable_sum(1.2, 0.6), relativistic(1.0)])
def test_inversion_agrees_with_closed_forms(spec):
    # the tempered tail e^(-t) is beyond what Stehfest resolves, so stop at t=1 there
    t = np.logspace(-3, 0 if spec.family.value == "relativistic" else 1, 9)
    np.testing.assert_allclose(levy_density_mu(spec, t, mode="inversion"), levy_density_mu(spec, t), rtol=1e-3)
    if spec.family.value == "stable":
        np.testing.assert_allclose(potential_density_u(spec, t, mode="inversion"), potential_density_u(spec, t),
                                   rtol=1e-3)


def test_zahle_bound():
    assert zahle_upper_bound(stable(1.0), 1.0) == pytest.approx(ZAHLE_FACTOR)
    assert ZAHLE_FACTOR == pytest.approx(1.58198, rel=1e-5)
    for spec in (stable(1.0), stable_sum(1.0, 0.5), relativistic(1.0), log_power(1.0, 0.5)):
        t = np.logspace(-4, 2, 40)
        assert np.all(potential_density_u(spec, t) <= zahle_upper_bound(spec, t))
    # stable lower constant is exactly 1/Gamma(rho)
    assert lower_zahle_constant(stable(1.0), np.logspace(-3, 1, 9)) == pytest.approx(1 / math.sqrt(math.pi))


def test_mu_doubling():
    near, far = check_mu_doubling(stable(1.0))
    np.testing.assert_allclose(near.ratios, 2**1.5, rtol=1e-12)
    assert far.ratios[0] <= 2**1.5 + 1e-12
    near, far = check_mu_doubling(relativistic(1.0))
    assert near.passed and far.passed
    assert np.all(far.ratios >= 1.0)
    assert math.isfinite(far.ratio_max)


def test_density_table_invariants(families):
    for spec in families:
        tab = build_density_table(spec, (1e-4, 1e2), 120)
        assert np.all(tab.u_values > 0) and np.all(tab.mu_values > 0)
        # inversion noise is ~1e-7 relative: allow that much slack
        assert np.all(np.diff(tab.u_values) <= 1e-6 * tab.u_values[1:]), str(spec)
        assert np.all(np.diff(tab.mu_values) <= 1e-6 * tab.mu_values[1:]), str(spec)
        assert np.all(tab.u_values <= zahle_upper_bound(spec, tab.grid))
        assert check_complete_monotone(tab.mu_values, tab.grid, 3, rtol=1e-5).passed, str(spec)
        small = tab.grid <= 1
        mass = np.trapezoid(np.minimum(1, tab.grid) * tab.mu_values * tab.grid, np.log(tab.grid))
        assert math.isfinite(mass) and mass > 0
        assert small.any()


def test_density_asymptotics(families):
    for spec in families:
        rep_u, rep_mu = check_density_asymptotics(spec)
        assert rep_u.passed and rep_mu.passed, str(spec)


def test_u_round_trip():
    spec = stable_sum(1.0, 0.5)
    t = np.logspace(-10, 3, 600)
    u = potential_density_u(spec, t)
    lam = np.array([1.0, 10.0, 100.0])
    np.testing.assert_allclose(laplace.laplace_transform_table(t, u, lam), 1 / phi_eval(spec, lam), rtol=5e-3)


def test_density_domain_error():
    with pytest.raises(DomainError):
        potential_density_u(stable(1.0), 0.0)


def test_density_csv(tmp_path):
    path = build_density_table(stable(1.0), (1e-2, 1.0), 20).to_csv(tmp_path / "d.csv")
    assert path.read_text().startswith("t,u,mu")
