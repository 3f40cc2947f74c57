import json
import math

import numpy as np
import pytest

from sbm.bernstein import log_power, phi_eval, relativistic, stable, stable_sum
from sbm.errors import DomainError, ReliabilityError, UnsupportedError
from sbm.geometry import ball, intervals
from sbm.montecarlo import (
    ExitTarget,
    McEstimate,
    PathParams,
    exit_into_domain_mc,
    extrapolate_dt,
    green_mc,
    harmonic_mc,
    rng,
    sample_subordinator_increment,
    simulate,
    step_position,
    target_radius,
)

CAUCHY = stable(1.0)
DISK = ball(1.0)


@pytest.mark.parametrize("spec", [stable(1.0), stable_sum(1.0, 0.5), relativistic(1.0), stable(1.6)])
@pytest.mark.parametrize("dt", [1e-3, 1e-2])
def test_laplace_calibration(spec, dt):
    s = sample_subordinator_increment(spec, dt, 100_000, seed=3)
    assert np.all(s > 0)
    e = np.exp(-s)
    want = math.exp(-dt * phi_eval(spec, 1.0))
    assert abs(e.mean() - want) < 3 * e.std() / math.sqrt(e.size) + 1e-12


def test_step_position_moments():
    x = step_position([0.0, 0.0], 1.0, 100_000, seed=5)
    var = x.var(axis=0)
    se = 2.0 * math.sqrt(2.0 / x.shape[0])
    assert np.all(np.abs(var - 2.0) < 3 * se)
    cov = np.mean(x[:, 0] * x[:, 1])
    assert abs(cov) < 3 * 2.0 / math.sqrt(x.shape[0])
    small = step_position([1.0], 1e-8, 1000, seed=1)
    assert np.max(np.abs(small - 1.0)) < 1e-3
    with pytest.raises(DomainError):
        step_position([0.0], 0.0)


def test_rng_streams_are_replayable():
    keys = rng.path_keys(7, np.arange(5))
    u = rng.uniform(keys, np.full(5, 3))
    assert np.all((u > 0) & (u < 1))
    np.testing.assert_array_equal(u[2:3], rng.uniform(rng.path_keys(7, [2]), [3]))
    assert len(set(u.tolist())) == 5


def test_path_params_validation():
    with pytest.raises(DomainError):
        PathParams(0.0, 10)
    with pytest.raises(DomainError):
        PathParams(1e-3, 0)
    with pytest.raises(DomainError):
        PathParams(1e-3, 10, seed=-1)
    assert PathParams(1e-2, 1).steps_cap == 5000
    assert PathParams(1e-2, 1, max_steps=7).steps_cap == 7


def test_unsamplable_family_rejected():
    with pytest.raises(UnsupportedError):
        sample_subordinator_increment(log_power(1.0, 0.5), 1e-2, 10)
    with pytest.raises(UnsupportedError):
        green_mc(log_power(1.0, 0.5), DISK, [0, 0], [0.5, 0], 0.05, PathParams(1e-2, 10))


def test_green_argument_checks():
    p = PathParams(1e-2, 10)
    with pytest.raises(DomainError):
        green_mc(CAUCHY, DISK, [0, 0], [0.98, 0], 0.05, p)
    with pytest.raises(DomainError):
        green_mc(CAUCHY, DISK, [2, 0], [0.5, 0], 0.05, p)
    assert target_radius(DISK, [0, 0], [0.5, 0]) == 0.05
    assert target_radius(DISK, [0, 0], [0.95, 0]) == pytest.approx(0.025)


def test_green_symmetry_and_monotonicity():
    p = PathParams(2e-3, 20_000, seed=11)
    x, y = [0.1, 0.0], [-0.2, 0.1]
    a = green_mc(CAUCHY, DISK, x, y, 0.05, p)
    b = green_mc(CAUCHY, DISK, y, x, 0.05, p)
    assert abs(a.mean - b.mean) < 3 * math.hypot(a.stderr, b.stderr)
    small = green_mc(CAUCHY, ball(0.5), x, y, 0.05, p)
    assert small.mean < a.mean + 3 * math.hypot(a.stderr, small.stderr)


def test_stderr_scales_with_paths():
    est = [green_mc(CAUCHY, DISK, [0, 0], [0.5, 0], 0.05, PathParams(1e-2, n, seed=2)) for n in (8000, 16000)]
    ratio = est[0].stderr / est[1].stderr
    assert abs(ratio / math.sqrt(2) - 1) < 0.2


def test_determinism():
    p = PathParams(1e-2, 5000, seed=9)
    a = green_mc(CAUCHY, DISK, [0, 0], [0.5, 0], 0.05, p)
    b = green_mc(CAUCHY, DISK, [0, 0], [0.5, 0], 0.05, p)
    assert (a.mean, a.stderr, a.config_hash) == (b.mean, b.stderr, b.config_hash)
    c = green_mc(CAUCHY, DISK, [0, 0], [0.5, 0], 0.05, PathParams(1e-2, 5000, seed=10))
    assert c.mean != a.mean and c.config_hash != a.config_hash


def test_chunking_does_not_change_sums():
    # paths beyond one chunk are keyed by their global index
    big = simulate(CAUCHY, DISK, [0, 0], PathParams(1e-2, 5000, seed=4))
    from sbm.montecarlo import core

    old = core.CHUNK
    try:
        core.CHUNK = 1000
        again = simulate(CAUCHY, DISK, [0, 0], PathParams(1e-2, 5000, seed=4))
    finally:
        core.CHUNK = old
    assert big.steps == again.steps
    assert big.tau_sum == pytest.approx(again.tau_sum, rel=1e-14)


def test_backends_agree(monkeypatch):
    p = PathParams(1e-2, 3000, seed=21)
    args = (relativistic(1.0), DISK, [0.2, 0.1], [-0.3, 0.0], 0.05, p)
    monkeypatch.setenv("SBM_NUMBA", "1")
    a = green_mc(*args)
    monkeypatch.setenv("SBM_NUMBA", "0")
    b = green_mc(*args)
    assert b.flags["backend"] == "numpy"
    assert abs(a.mean - b.mean) <= 3 * math.hypot(a.stderr, b.stderr)
    # identical random streams: only rare last-bit exit decisions may differ
    assert abs(a.mean - b.mean) <= 1e-2 * a.mean


def test_harmonic_trivial_cases():
    p = PathParams(1e-2, 2000, seed=1)
    assert harmonic_mc(CAUCHY, DISK, [0.3, 0.0], p).mean == 1.0
    out = harmonic_mc(CAUCHY, DISK, [0.9, 0.0], p, ExitTarget(in_D=True), piece=([0.0, 0.0], 0.5))
    assert out.mean == 1.0  # x outside the piece: exit at time 0 into D
    miss = harmonic_mc(CAUCHY, DISK, [0.9, 0.0], p, ExitTarget(in_D=False), piece=([0.0, 0.0], 0.5))
    assert miss.mean == 0.0


def test_exit_into_domain():
    prob, tau = exit_into_domain_mc(CAUCHY, DISK, [1.0, 0.0], 0.5, [0.75, 0.0], PathParams(1e-3, 4000, seed=2))
    assert 0 < prob.mean <= 1
    assert tau.mean > 0
    with pytest.raises(DomainError):
        exit_into_domain_mc(CAUCHY, DISK, [1.0, 0.0], 0.5, [0.0, 0.0], PathParams(1e-3, 10))


def test_one_dimensional_domain():
    est = green_mc(CAUCHY, intervals([(-1, 1)]), [0.0], [0.5], 0.05, PathParams(1e-2, 4000, seed=3))
    assert est.mean > 0


def test_reliability_flag_and_json(tmp_path):
    est = green_mc(CAUCHY, DISK, [0, 0], [0.5, 0], 0.05, PathParams(1e-3, 500, max_steps=5))
    assert not est.reliable
    with pytest.raises(ReliabilityError):
        est.check()
    path = est.write_json(tmp_path / "est.json")
    doc = json.loads(path.read_text())
    assert set(doc) == {"mean", "stderr", "n", "config_hash", "flags"}
    assert doc["n"] == 500


def test_extrapolation_is_linear_in_dt():
    coarse = McEstimate(1.1, 0.01, 10, "a", {"dt": 1e-2, "truncated_fraction": 0.0})
    fine = McEstimate(1.01, 0.01, 10, "b", {"dt": 1e-3, "truncated_fraction": 0.0})
    out = extrapolate_dt(coarse, fine)
    assert out.mean == pytest.approx(1.0)
    assert out.stderr > fine.stderr
    assert out.flags["dt_runs"] == [1e-2, 1e-3]
