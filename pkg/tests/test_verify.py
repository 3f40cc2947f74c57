import math

import numpy as np
import pytest

from sbm.bernstein import log_power, stable, stable_sum
from sbm.errors import CoverageError, DomainError, SingularInputError, UnsupportedError
from sbm.fluctuation import build_fluctuation_table
from sbm.geometry import annulus, ball, delta_D, make_setup, parse_domain
from sbm.kernels import KernelEvaluator, free_green_G
from sbm.montecarlo import PathParams, harmonic_mc
from sbm.montecarlo.core import ExitTarget
from sbm.verify import (
    GTable,
    SamplingPlan,
    green_pair,
    green_reports,
    levy_system_consistency,
    rhs_c11,
    rhs_kappa_fat,
    run_green_campaign,
    stratified_pairs,
    verify_theorem,
)

DISK = ball(1.0)


@pytest.fixture(scope="module")
def cauchy():
    spec = stable(1.0)
    return spec, build_fluctuation_table(spec), KernelEvaluator(spec, 2)


def test_rhs_saturated_bracket(cauchy):
    spec, table, ev = cauchy
    x, y = [1 / 3, 0.0], [-1 / 3, 0.0]
    rhs = rhs_c11(table, ev, DISK, x, y)
    assert rhs.V == pytest.approx(free_green_G(ev, 2 / 3), rel=1e-9)


def test_rhs_forms_agree_for_stable(cauchy):
    spec, table, ev = cauchy
    pairs = [([0.1, 0.2], [-0.5, 0.3]), ([0.9, 0.0], [0.0, 0.95]), ([0.0, 0.0], [0.0, 0.99]), ([0.3, 0.3], [0.31, 0.3])]
    ratios = []
    for x, y in pairs:
        r = rhs_c11(table, ev, DISK, x, y)
        assert r.ell == pytest.approx(r.phi, rel=1e-12)
        ratios.append(r.V / r.ell)
    # all three forms are the same power law up to the Riesz constant
    assert max(ratios) / min(ratios) < 1.05
    assert np.mean(ratios) == pytest.approx(1 / (2 * math.pi), rel=1e-3)


def test_rhs_decreases_toward_boundary(cauchy):
    spec, table, ev = cauchy
    x = np.array([0.0, 0.0])
    vals = []
    for depth in (0.3, 0.1, 0.03, 0.01, 0.001):
        y = np.array([1.0 - depth, 0.0])
        vals.append(rhs_c11(table, ev, DISK, x, y).V)
    assert all(b <= a * (1 + 1e-9) for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 0.1 * vals[0]


def test_rhs_errors(cauchy):
    spec, table, ev = cauchy
    with pytest.raises(SingularInputError):
        rhs_c11(table, ev, DISK, [0.1, 0.1], [0.1, 0.1])
    with pytest.raises(DomainError):
        rhs_c11(table, ev, DISK, [0.1, 0.1], [2.0, 0.0])


def test_rhs_recurrent_has_nan_V_form():
    spec = stable(1.0)
    dom = parse_domain("intervals:[-1,1]")
    r = rhs_c11(build_fluctuation_table(spec), KernelEvaluator(spec, 1), dom, [0.0], [0.5])
    assert math.isnan(r.V) and r.ell > 0


def test_g_table_lookup_and_kappa_rhs(cauchy):
    spec, table, ev = cauchy
    setup = make_setup(DISK)
    z0 = np.array(setup.z0)
    pts = np.array([[0.0, 0.5], [0.9, 0.0], [-0.5, 0.0]])
    g = GTable(z0, pts, np.array([0.3, 0.1, 5.0]), np.zeros(3), 0.5)
    assert g.g(z0) == 0.5
    assert g.g([-0.5, 0.0]) == 0.5  # capped
    with pytest.raises(CoverageError):
        g.g([0.7, 0.7])
    val, A, branch = rhs_kappa_fat(setup, g, ev, [0.0, 0.5], [0.9, 0.0])
    assert branch == "z0"
    np.testing.assert_allclose(A, z0)
    assert val == pytest.approx(0.3 * 0.1 / (0.25 * math.dist([0, 0.5], [0.9, 0])))
    with pytest.raises(SingularInputError):
        rhs_kappa_fat(setup, g, ev, [0.0, 0.5], [0.0, 0.5])


@pytest.mark.parametrize("dom", [DISK, annulus(0.5, 1.0), parse_domain("balls:c=(±0.75,0),r=0.2"),
                                 parse_domain("intervals:[0,1],[2,3]")])
def test_stratified_pairs(dom):
    plan = SamplingPlan(n_pairs=20, seed=4)
    pairs = stratified_pairs(dom, plan)
    assert len(pairs) == 20
    assert [p[2] for p in pairs[:4]] == list(plan.strata)
    for x, y, _ in pairs:
        assert delta_D(dom, x) > 0 and delta_D(dom, y) > 0
    again = stratified_pairs(dom, plan)
    assert all(np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1]) for a, b in zip(pairs, again))


def test_green_pair_starts_near_boundary():
    spec = stable(1.0)
    p = PathParams(1e-2, 3000, seed=1)
    a = green_pair(spec, DISK, [0.95, 0.0], [0.0, 0.0], p)
    b = green_pair(spec, DISK, [0.0, 0.0], [0.95, 0.0], p)
    assert a.mean == b.mean  # same run: start at the point nearer the boundary


def test_small_campaign_reports():
    spec = stable_sum(1.2, 0.6)
    run = run_green_campaign(spec, DISK, SamplingPlan(n_pairs=4, seed=1), PathParams(1e-2, 2000, seed=3))
    reps = green_reports(run)
    assert [r.claim_id for r in reps] == ["e:Gest21", "e:Gest21-alt1", "e:Gest21-forms", "e:Gest", "e:Gest/e:Gest21"]
    for r in reps:
        assert len(r.samples) == 4
        assert np.all(np.isfinite(r.ratios)) and np.all(r.ratios > 0)
    assert run.setup.g_cap == run.g_table.cap
    assert all(run.g_table.g(p) <= run.g_table.cap for p in run.g_table.points)


def test_verify_theorem_dispatch():
    with pytest.raises(DomainError):
        verify_theorem("nope", stable(1.0), DISK)
    with pytest.raises(UnsupportedError):
        verify_theorem("gest21", log_power(1.0, 0.5), DISK, SamplingPlan(2), PathParams(1e-2, 10))
    reps = verify_theorem("interior", stable(1.0), DISK, SamplingPlan(3, 2), PathParams(1e-2, 2000, 2))
    assert reps[0].claim_id == "lb-ub" and reps[0].passed


def test_levy_system_consistency():
    direct, via_levy = levy_system_consistency(stable(1.0), PathParams(1e-3, 20000, 3))
    assert abs(via_levy / direct.mean - 1) < 0.15


def test_harnack_sanity():
    # exit-into-annulus probability is harmonic in the unit disk
    spec = stable(1.0)
    tgt = ExitTarget(annuli=(([0.0, 0.0], 1.5, 2.0),))
    rng = np.random.default_rng(0)
    ratios = []
    for k in range(3):
        x0 = rng.uniform(-0.3, 0.3, 2)
        r = 0.4
        pts = [x0 + r / 2 * rng.uniform(-0.7, 0.7, 2) for _ in range(2)]
        v = [harmonic_mc(spec, DISK, p, PathParams(1e-2, 4000, 10 * k + i), tgt).mean for i, p in enumerate(pts)]
        ratios.append(max(v) / min(v))
    assert max(ratios) < 3.0
