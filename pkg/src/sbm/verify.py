"""Right-hand sides of the Green function, boundary Harnack and exit estimates,
and the empirical ratio checks that compare them with simulation.

Claim identifiers follow the labels of the estimates they test
(``e:Gest21``, ``e:Gest``, ``e:bhp-m-alt``, ``e:z1``, ``e:L:2`` ...).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_legendre

from .bernstein import SAMPLABLE, ell_eval, phi_eval
from .errors import CoverageError, DomainError, SingularInputError, UnsupportedError
from .fluctuation import build_fluctuation_table, renewal_V
from .geometry import (
    _as_points,
    delta_D,
    make_setup,
    pick_A,
    point_at_depth,
    r_xy,
)
from .kernels import KernelEvaluator, free_green_G, levy_kernel_j
from .montecarlo import ExitTarget, PathParams, exit_into_domain_mc, harmonic_mc, simulate, target_radius
from .geometry import ball_volume
from .report import RatioReport

MC_CAP = 100.0
QUAD_CAP = 10.0
CLAIMS = ("gest21", "gest", "bhp", "interior", "ge")


@dataclass(frozen=True)
class C11Rhs:
    ell: float
    phi: float
    V: float


def rhs_c11(table, ev, domain, x, y):
    """The three equivalent right-hand sides of the C^{1,1} Green estimate.

    ell-form and phi-form use ell and phi directly; the V-form is
    (1 ^ V(dx) V(dy) / V(|x-y|)^2) G(|x-y|) and is nan when (spec, d) is
    recurrent (no free Green function).
    """
    x = _as_points(domain, x)
    y = _as_points(domain, y)
    r = float(np.linalg.norm(x - y))
    if r == 0.0:
        raise SingularInputError("x and y coincide")
    dx, dy = float(delta_D(domain, x)), float(delta_D(domain, y))
    if dx <= 0 or dy <= 0:
        raise DomainError("x and y must lie in the domain")
    spec, d, a = ev.spec, ev.d, ev.spec.alpha
    ell_r, ell_x, ell_y = (float(ell_eval(spec, t**-2.0)) for t in (r, dx, dy))
    ell_form = min(1.0, (dx * dy) ** (a / 2) * ell_r / (math.sqrt(ell_x * ell_y) * r**a)) / (ell_r * r ** (d - a))
    phi_r, phi_x, phi_y = (float(phi_eval(spec, t**-2.0)) for t in (r, dx, dy))
    phi_form = min(1.0, phi_r / math.sqrt(phi_x * phi_y)) / (r**d * phi_r)
    if ev.transient:
        Vx, Vy, Vr = (float(renewal_V(table, t)) for t in (dx, dy, r))
        v_form = min(1.0, Vx * Vy / Vr**2) * float(free_green_G(ev, r))
    else:
        v_form = math.nan
    return C11Rhs(ell_form, phi_form, v_form)


@dataclass
class GTable:
    """g(p) = G_D(p, z0) ^ g_cap on a finite set of points (g(z0) = g_cap)."""

    z0: np.ndarray
    points: np.ndarray
    raw: np.ndarray
    stderr: np.ndarray
    cap: float

    def g(self, p):
        p = np.asarray(p, dtype=float).ravel()
        if np.linalg.norm(p - self.z0) < 1e-12:
            return self.cap
        dist = np.linalg.norm(self.points - p, axis=1)
        i = int(np.argmin(dist))
        if dist[i] > 1e-12:
            raise CoverageError(f"g table does not cover {p.tolist()}")
        return float(min(self.raw[i], self.cap))


def _unique_points(points, z0):
    out = []
    for p in points:
        p = np.asarray(p, dtype=float).ravel()
        if np.linalg.norm(p - z0) < 1e-12:
            continue
        if not any(np.linalg.norm(p - q) < 1e-12 for q in out):
            out.append(p)
    return out


def build_g_table(spec, setup, points, params):
    """Tabulate G_D(., z0) at ``points`` from a single run started at z0.

    The cap stands in for the interior bound on G_D(., z0): it is the largest
    estimate over tabulated points at distance >= delta_D(z0)/2 from z0,
    where 2d probe points on that sphere are always included.
    """
    dom = setup.domain
    z0 = np.asarray(setup.z0, dtype=float)
    half = float(delta_D(dom, z0)) / 2.0
    probes = [z0 + s * half * e for e in np.eye(dom.d) for s in (1.0, -1.0)]
    pts = _unique_points(list(points) + probes, z0)
    rings = [(p, 0.0, target_radius(dom, z0, p)) for p in pts]
    run = simulate(spec, dom, z0, params, rings)
    ests = [run.occupation(j, ball_volume(dom.d, rg[2])) for j, rg in enumerate(rings)]
    raw = np.array([e.mean for e in ests])
    far = np.array([np.linalg.norm(p - z0) >= half * (1 - 1e-12) for p in pts])
    cap = float(raw[far].max())
    return GTable(z0, np.array(pts), raw, np.array([e.stderr for e in ests]), cap)


def rhs_kappa_fat(setup, g_table, ev, x, y):
    """g(x) g(y) / (g(A)^2 |x-y|^(d-alpha) ell(|x-y|^-2)); returns (value, A, branch)."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    r = float(np.linalg.norm(x - y))
    if r == 0.0:
        raise SingularInputError("x and y coincide")
    A = pick_A(setup, x, y)
    branch = "z0" if r_xy(setup.domain, x, y) >= setup.eps1 else "local"
    gA = g_table.g(A)
    ell_r = float(ell_eval(ev.spec, r**-2.0))
    val = g_table.g(x) * g_table.g(y) / (gA**2 * r ** (ev.d - ev.spec.alpha) * ell_r)
    return val, A, branch


@dataclass(frozen=True)
class SamplingPlan:
    """Stratified pair plan; depths are fractions of the deepest depth of a piece."""

    n_pairs: int = 50
    seed: int = 0
    near: tuple = (0.02, 0.1)
    deep: tuple = (0.3, 0.8)
    strata: tuple = ("near-near", "near-deep", "deep-deep", "near-same-boundary-point")


def _max_depth(domain, piece):
    _, ri, ro = domain.pieces[piece]
    return ro if ri == 0 else (ro - ri) / 2.0


def _direction(rng, d):
    if d == 1:
        return np.array([rng.choice([-1.0, 1.0])])
    u = rng.standard_normal(d)
    return u / np.linalg.norm(u)


def _depth(rng, band, H):
    lo, hi = band
    return H * math.exp(rng.uniform(math.log(lo), math.log(hi)))


def _rotate_small(u, angle, rng):
    """Unit vector at the given angle from u (d >= 2)."""
    w = rng.standard_normal(u.size)
    w -= w.dot(u) * u
    w /= np.linalg.norm(w)
    return math.cos(angle) * u + math.sin(angle) * w


def stratified_pairs(domain, plan):
    """Deterministic list of (x, y, stratum) pairs."""
    rng = np.random.default_rng(plan.seed)
    out = []
    n_pieces = len(domain.pieces)
    while len(out) < plan.n_pairs:
        stratum = plan.strata[len(out) % len(plan.strata)]
        px, py = int(rng.integers(n_pieces)), int(rng.integers(n_pieces))
        Hx, Hy = _max_depth(domain, px), _max_depth(domain, py)
        u = _direction(rng, domain.d)
        if stratum == "near-near":
            x = point_at_depth(domain, _depth(rng, plan.near, Hx), u, px)
            y = point_at_depth(domain, _depth(rng, plan.near, Hy), _direction(rng, domain.d), py)
        elif stratum == "near-deep":
            x = point_at_depth(domain, _depth(rng, plan.near, Hx), u, px)
            y = point_at_depth(domain, Hy * rng.uniform(*plan.deep), _direction(rng, domain.d), py)
        elif stratum == "deep-deep":
            x = point_at_depth(domain, Hx * rng.uniform(*plan.deep), u, px)
            y = point_at_depth(domain, Hy * rng.uniform(*plan.deep), _direction(rng, domain.d), py)
        else:
            # both close to the same boundary point, slightly apart
            x = point_at_depth(domain, _depth(rng, plan.near, Hx), u, px)
            v = u if domain.d == 1 else _rotate_small(u, rng.uniform(0.02, 0.1) * Hx, rng)
            y = point_at_depth(domain, _depth(rng, plan.near, Hx), v, px)
        if np.linalg.norm(x - y) < 1e-3 * max(Hx, Hy):
            continue
        out.append((x, y, stratum))
    return out


def green_pair(spec, domain, x, y, params, rho_cap=0.05):
    """G_D(x, y) from paths started at the point nearer the boundary.

    G_D is symmetric, so the target ball sits at the deeper point where a
    larger radius fits.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    start, tgt = (x, y) if delta_D(domain, x) <= delta_D(domain, y) else (y, x)
    rho = target_radius(domain, start, tgt, rho_cap)
    run = simulate(spec, domain, start, params, [(tgt, 0.0, rho)])
    return run.occupation(0, ball_volume(domain.d, rho))


def _need_samplable(spec):
    if spec.family not in SAMPLABLE:
        raise UnsupportedError(f"claim needs simulation; {spec.family.value} has no exact sampler")


@dataclass
class GreenRun:
    """One simulation campaign shared by the Green function claims."""

    pairs: list
    estimates: list
    rhs: list
    kappa: list = field(default_factory=list)
    setup: object = None
    g_table: object = None


def run_green_campaign(spec, domain, plan, params, table=None, ev=None, with_kappa=True, g_paths_factor=5):
    _need_samplable(spec)
    table = table or build_fluctuation_table(spec)
    ev = ev or KernelEvaluator(spec, domain.d)
    if not ev.transient:
        raise UnsupportedError(f"{spec} is recurrent in d={domain.d}")
    pairs = stratified_pairs(domain, plan)
    ests, rhs = [], []
    for k, (x, y, _) in enumerate(pairs):
        p = PathParams(params.dt, params.n_paths, params.seed + 1000 * (k + 1), params.max_steps)
        ests.append(green_pair(spec, domain, x, y, p))
        rhs.append(rhs_c11(table, ev, domain, x, y))
    run = GreenRun(pairs, ests, rhs)
    if with_kappa:
        setup = make_setup(domain)
        pts = []
        for x, y, _ in pairs:
            pts += [x, y, pick_A(setup, x, y)]
        gp = PathParams(params.dt, params.n_paths * g_paths_factor, params.seed, params.max_steps)
        g_table = build_g_table(spec, setup, pts, gp)
        run.setup = setup.with_g_cap(g_table.cap)
        run.g_table = g_table
        run.kappa = [rhs_kappa_fat(setup, g_table, ev, x, y) for x, y, _ in pairs]
    return run


def _mc_meta(ests):
    return {
        "stderr": [e.stderr for e in ests],
        "unreliable": any(not e.reliable for e in ests),
        "config_hashes": [e.config_hash for e in ests],
    }


def green_reports(run, cap=MC_CAP):
    xs = [p[0] for p in run.pairs]
    ys = [p[1] for p in run.pairs]
    G = np.array([e.mean for e in run.estimates])
    Vf = np.array([r.V for r in run.rhs])
    Pf = np.array([r.phi for r in run.rhs])
    Lf = np.array([r.ell for r in run.rhs])
    meta = {"strata": [p[2] for p in run.pairs], **_mc_meta(run.estimates),
            "rhs_ell": Lf.tolist(), "rhs_phi": Pf.tolist(), "rhs_V": Vf.tolist()}
    reps = [
        RatioReport.from_values("e:Gest21", xs, ys, G, Vf, cap, meta),
        RatioReport.from_values("e:Gest21-alt1", xs, ys, G, Pf, cap, {"strata": meta["strata"]}),
        RatioReport.from_values("e:Gest21-forms", xs, ys, Vf, Lf, cap),
    ]
    if run.kappa:
        K = np.array([k[0] for k in run.kappa])
        kmeta = {"branch": [k[2] for k in run.kappa], "A": [np.asarray(k[1]).tolist() for k in run.kappa],
                 "g_cap": run.g_table.cap, "z0": list(run.setup.z0), "eps1": run.setup.eps1}
        reps.append(RatioReport.from_values("e:Gest", xs, ys, G, K, cap, kmeta))
        reps.append(RatioReport.from_values("e:Gest/e:Gest21", xs, ys, K, Vf, cap, kmeta))
    return reps


def bhp_points(domain, Q, r, n=20, depths=None):
    """Points of D cap B(Q, r/2) on a depth grid near the boundary point Q."""
    Q = np.asarray(Q, dtype=float)
    c, ri, ro = domain.pieces[0]
    normal = (c - Q) / np.linalg.norm(c - Q)
    if depths is None:
        depths = np.geomspace(0.025 * r, 0.4 * r, (n + 1) // 2)
    tangent = np.zeros(domain.d)
    if domain.d > 1:
        tangent[0], tangent[1] = -normal[1], normal[0]
    out = []
    for k, t in enumerate(depths):
        for off in (0.0, 0.15 * r):
            if len(out) >= n:
                break
            x = Q + t * normal + off * (1 if k % 2 else -1) * tangent
            if np.linalg.norm(x - Q) < r / 2 and delta_D(domain, x) > 0:
                out.append(x)
    return out


def verify_bhp(spec, domain, Q, r, params, n_points=20, table=None, cap=50.0):
    """u(x)/V(delta_D(x)) and the double ratio u/v on D cap B(Q, r/2).

    u is the probability that the exit from D cap B(Q, r) lands in
    D \\ B(Q, r); v that it lands in B(Q, r)^c \\ D.  Both are harmonic in
    D cap B(Q, r) and vanish on D^c cap B(Q, r).
    """
    _need_samplable(spec)
    table = table or build_fluctuation_table(spec)
    pts = bhp_points(domain, Q, r, n_points)
    u, v = [], []
    for k, x in enumerate(pts):
        p = PathParams(params.dt, params.n_paths, params.seed + 1000 * (k + 1), params.max_steps)
        run = simulate(spec, domain, x, p, (), ExitTarget(in_D=True), (Q, r))
        u.append(run.hit_probability())
        p2 = PathParams(params.dt, params.n_paths, params.seed + 1000 * (k + 1) + 1, params.max_steps)
        v.append(harmonic_mc(spec, domain, x, p2, ExitTarget(in_D=False, in_piece=False), (Q, r)))
    delta = np.array([delta_D(domain, x) for x in pts])
    Vd = np.asarray(renewal_V(table, delta))
    U = np.array([e.mean for e in u])
    W = np.array([e.mean for e in v])
    meta = {"delta": delta.tolist(), "Q": list(map(float, Q)), "r": r, **_mc_meta(u)}
    return [
        RatioReport.from_values("e:bhp-m-alt", pts, None, U, Vd, cap, meta),
        RatioReport.from_values("bhp-double-ratio", pts, None, U, W, cap, {"delta": delta.tolist(), **_mc_meta(v)}),
    ]


def verify_exit_trends(spec, domain, Q, r, params, fractions=(0.02, 0.05, 0.1, 0.15), table=None, cap=50.0):
    """Exit-into-D probability and mean exit time of D cap B(Q, r) against V(delta_D)."""
    _need_samplable(spec)
    table = table or build_fluctuation_table(spec)
    Q = np.asarray(Q, dtype=float)
    c = domain.pieces[0][0]
    normal = (c - Q) / np.linalg.norm(c - Q)
    pts = [Q + f * r * normal for f in fractions]
    prob, tau = [], []
    for k, x in enumerate(pts):
        p = PathParams(params.dt, params.n_paths, params.seed + 1000 * (k + 1), params.max_steps)
        a, b = exit_into_domain_mc(spec, domain, Q, r, x, p)
        prob.append(a)
        tau.append(b)
    delta = np.array([delta_D(domain, x) for x in pts])
    Vd = np.asarray(renewal_V(table, delta))
    return (
        RatioReport.from_values("e:L:2", pts, None, [e.mean for e in prob], Vd, cap,
                                {"delta": delta.tolist(), **_mc_meta(prob)}),
        RatioReport.from_values("e:L:3", pts, None, [e.mean for e in tau], Vd, cap,
                                {"delta": delta.tolist(), **_mc_meta(tau)}),
    )


def interior_pairs(domain, n, L1=2.0, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    H = _max_depth(domain, 0)
    while len(out) < n:
        x = point_at_depth(domain, H * rng.uniform(0.3, 0.9), _direction(rng, domain.d), 0)
        dx = delta_D(domain, x)
        step = dx / L1 * rng.uniform(0.2, 0.9)
        y = x + step * _direction(rng, domain.d)
        if min(dx, delta_D(domain, y)) >= L1 * np.linalg.norm(x - y):
            out.append((x, y))
    return out


def verify_interior(spec, domain, params, n_pairs=20, L1=2.0, seed=0, cap=MC_CAP):
    """G_D(x,y) |x-y|^d phi(|x-y|^-2) for pairs with L1 |x-y| <= delta_D(x) ^ delta_D(y)."""
    _need_samplable(spec)
    pairs = interior_pairs(domain, n_pairs, L1, seed)
    ests = []
    for k, (x, y) in enumerate(pairs):
        p = PathParams(params.dt, params.n_paths, params.seed + 1000 * (k + 1), params.max_steps)
        ests.append(green_pair(spec, domain, x, y, p))
    r = np.array([np.linalg.norm(x - y) for x, y in pairs])
    rhs = 1.0 / (r**domain.d * np.asarray(phi_eval(spec, r**-2.0)))
    return [RatioReport.from_values("lb-ub", [p[0] for p in pairs], [p[1] for p in pairs],
                                    [e.mean for e in ests], rhs, cap, {"L1": L1, **_mc_meta(ests)})]


def verify_ge(spec, domain, params, fractions=(0.01, 0.02, 0.05, 0.1, 0.2, 0.4), table=None, cap=MC_CAP,
              depth_fraction=None):
    """g(x) / (V(delta_D(x)) ^ 1) along depth grids toward the boundary."""
    _need_samplable(spec)
    table = table or build_fluctuation_table(spec)
    setup = make_setup(domain, depth_fraction=depth_fraction)
    H = _max_depth(domain, 0)
    pts = []
    for u in ([-1.0] + [0.0] * (domain.d - 1), [0.0, 1.0] + [0.0] * (domain.d - 2)):
        if domain.d == 1 and u[0] == 0.0:
            continue
        for f in fractions:
            pts.append(point_at_depth(domain, f * H, np.array(u[: domain.d]), 0))
    g_table = build_g_table(spec, setup, pts, params)
    g = np.array([g_table.g(p) for p in pts])
    delta = np.array([delta_D(domain, p) for p in pts])
    rhs = np.minimum(np.asarray(renewal_V(table, delta)), 1.0)
    meta = {"delta": delta.tolist(), "z0": list(setup.z0), "g_cap": g_table.cap}
    return [RatioReport.from_values("e:z1", pts, None, g, rhs, cap, meta)]


def levy_jump_rate(ev, s, r_in, r_out, n=64):
    """J(z, A) = int_A j(|z - y|) dy for the annulus A = {r_in < |y| < r_out} and |z| = s."""
    d = ev.d
    xr, wr = roots_legendre(n)
    rho = 0.5 * (r_out - r_in) * (xr + 1) + r_in
    wr = 0.5 * (r_out - r_in) * wr
    xt, wt = roots_legendre(2 * n)
    th = 0.5 * math.pi * (xt + 1)
    wt = 0.5 * math.pi * wt
    s = np.atleast_1d(np.asarray(s, dtype=float))
    R, T = np.meshgrid(rho, th, indexing="ij")
    W = np.outer(wr, wt)
    out = []
    for si in s:
        dist = np.sqrt(si**2 + R**2 - 2 * si * R * np.cos(T))
        jv = levy_kernel_j(ev, dist)
        if d == 2:
            out.append(2.0 * np.sum(W * jv * R))
        elif d == 3:
            out.append(2.0 * math.pi * np.sum(W * jv * R**2 * np.sin(T)))
        else:
            raise UnsupportedError("jump rates are implemented for d = 2, 3")
    return np.array(out)


def levy_system_consistency(spec, params, r_in=1.5, r_out=2.0, n_rings=40, d=2):
    """Exit into an annulus from the center of the unit ball, two ways.

    Direct: P_0(X at exit in A).  Via the Levy system: sum over rings of the
    simulated occupation time times the jump rate J(., A).
    """
    from .geometry import ball

    dom = ball(1.0, d=d)
    ev = KernelEvaluator(spec, d)
    edges = np.linspace(0.0, 1.0, n_rings + 1)
    rings = [(np.zeros(d), edges[k], edges[k + 1]) for k in range(n_rings)]
    x0 = np.zeros(d)
    direct = simulate(spec, dom, x0, params, (), ExitTarget(annuli=((np.zeros(d), r_in, r_out),)))
    occ_run = simulate(spec, dom, x0, PathParams(params.dt, params.n_paths, params.seed + 1, params.max_steps), rings)
    # midpoint in area measure
    mids = ((edges[:-1] ** d + edges[1:] ** d) / 2) ** (1.0 / d)
    J = levy_jump_rate(ev, mids, r_in, r_out)
    occ = occ_run.occ_sum / occ_run.n
    return direct.hit_probability(), float(np.dot(occ, J))


def verify_theorem(claim, spec, domain, plan=None, params=None, **kw):
    """Run one claim and return its list of RatioReports."""
    claim = claim.lower()
    plan = plan or SamplingPlan()
    params = params or PathParams(1e-3, 20000, plan.seed)
    if claim == "gest21":
        return green_reports(run_green_campaign(spec, domain, plan, params, with_kappa=False))[:3]
    if claim == "gest":
        return green_reports(run_green_campaign(spec, domain, plan, params, with_kappa=True))
    if claim == "bhp":
        Q = kw.get("Q")
        if Q is None:
            c, _, ro = domain.pieces[0]
            Q = c + ro * np.eye(domain.d)[0]
        return verify_bhp(spec, domain, Q, kw.get("r", 0.2), params)
    if claim == "interior":
        return verify_interior(spec, domain, params, n_pairs=plan.n_pairs, seed=plan.seed)
    if claim == "ge":
        return verify_ge(spec, domain, params)
    raise DomainError(f"unknown claim {claim!r}; expected one of {CLAIMS}")
