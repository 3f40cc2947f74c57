"""Killed subordinate Brownian motion: samplers and path estimators.

A path alternates subordinator increments dS over a fixed step dt with
Gaussian moves of per-coordinate variance 2 dS, and is killed at the first
grid time outside the domain.  Occupation of target rings is accumulated by
the left Riemann sum dt * sum_k 1(X_{t_k} in ring) over grid times strictly
before that exit, and the exit time is n * dt.

Paths are processed in fixed chunks; chunk sums are added in chunk order, so
an estimate depends only on (seed, parameters) and not on the backend's
scheduling.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..bernstein import Family
from ..errors import DomainError, ReliabilityError, UnsupportedError
from ..geometry import ball_volume, delta_D
from ._accel import backend_name, numba_enabled

CHUNK = 4096
RETRY_CAP = 10**6
UNRELIABLE_FRACTION = 0.01


def _kernels():
    if numba_enabled():
        from . import _kernels_numba as K
    else:
        from . import _kernels_numpy as K
    return K


@dataclass(frozen=True)
class PathParams:
    dt: float
    n_paths: int
    seed: int = 0
    max_steps: int = 0

    def __post_init__(self):
        if not self.dt > 0:
            raise DomainError("dt must be positive")
        if self.n_paths < 1:
            raise DomainError("n_paths must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must fit in 64 bits")

    @property
    def steps_cap(self):
        # default horizon: 50 time units
        return self.max_steps or int(math.ceil(50.0 / self.dt))


@dataclass
class McEstimate:
    mean: float
    stderr: float
    n: int
    config_hash: str
    flags: dict = field(default_factory=dict)

    @property
    def reliable(self):
        return not self.flags.get("unreliable", False)

    def check(self):
        if not self.reliable:
            raise ReliabilityError(
                f"{self.flags.get('truncated_fraction', 0):.2%} of paths hit max_steps ({self.config_hash})"
            )
        return self

    def to_dict(self):
        return asdict(self)

    def write_json(self, path):
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))
        return path


def _sampler_args(spec):
    if spec.family not in (Family.STABLE, Family.RELATIVISTIC, Family.STABLE_SUM):
        raise UnsupportedError(f"no exact sampler for family {spec.family.value}")
    rho1 = spec.alpha / 2.0
    if spec.family is Family.STABLE:
        return 0, rho1, rho1, 0.0
    if spec.family is Family.STABLE_SUM:
        return 2, rho1, spec.beta / 2.0, 0.0
    # phi = (lam + M)^rho - M^rho with M = m^(2/alpha): exponential tilt by M
    return 1, rho1, rho1, spec.mass ** (2.0 / spec.alpha)


def sample_subordinator_increment(spec, dt, n=1, seed=0):
    """n independent increments of S over dt (draw i uses stream i)."""
    fam, r1, r2, tilt = _sampler_args(spec)
    if not dt > 0:
        raise DomainError("dt must be positive")
    return _kernels().draw_increments(np.uint64(seed), int(n), fam, float(dt), r1, r2, tilt, RETRY_CAP)


def step_position(x, dS, n=1, seed=0):
    """x + sqrt(2 dS) Z for n independent standard Gaussian vectors Z."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if not dS > 0:
        raise DomainError("dS must be positive")
    z = _kernels().draw_gaussians(np.uint64(seed), int(n), x.size)
    return x[None, :] + math.sqrt(2.0 * dS) * z


@dataclass(frozen=True)
class ExitTarget:
    """Where the exit position must land: optional annuli, and inside/outside flags.

    ``in_D`` and ``in_piece`` are True/False to require membership or
    non-membership, None to ignore.
    """

    annuli: tuple = ()
    in_D: bool | None = None
    in_piece: bool | None = None

    def arrays(self, d):
        c = np.array([a[0] for a in self.annuli], dtype=float).reshape(-1, d)
        ri = np.array([a[1] for a in self.annuli], dtype=float)
        ro = np.array([a[2] for a in self.annuli], dtype=float)
        flag = lambda v: -1 if v is None else int(bool(v))  # noqa: E731
        return c, ri, ro, flag(self.in_D), flag(self.in_piece)


ANYWHERE = ExitTarget()


def _config_hash(**parts):
    blob = json.dumps({k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in parts.items()},
                      sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class PathRun:
    """Raw sums from one batch of paths."""

    n: int
    occ_sum: np.ndarray
    occ_sq: np.ndarray
    hit_sum: float
    tau_sum: float
    tau_sq: float
    truncated: int
    max_attempts: int
    steps: int
    config_hash: str
    dt: float
    backend: str

    def _flags(self):
        frac = self.truncated / self.n
        return {
            "dt": self.dt,
            "truncated_fraction": frac,
            "unreliable": frac > UNRELIABLE_FRACTION,
            "max_sampler_attempts": self.max_attempts,
            "mean_steps": self.steps / self.n,
            "backend": self.backend,
        }

    def _estimate(self, s, sq, scale=1.0):
        mean = s / self.n
        var = max(sq / self.n - mean * mean, 0.0) * self.n / max(self.n - 1, 1)
        return McEstimate(scale * mean, scale * math.sqrt(var / self.n), self.n, self.config_hash, self._flags())

    def occupation(self, j, volume=1.0):
        return self._estimate(float(self.occ_sum[j]), float(self.occ_sq[j]), 1.0 / volume)

    def hit_probability(self):
        return self._estimate(self.hit_sum, self.hit_sum)

    def exit_time(self):
        return self._estimate(self.tau_sum, self.tau_sq)


def simulate(spec, domain, x, params, rings=(), target=ANYWHERE, piece=None):
    """Run ``params.n_paths`` killed paths from x.

    ``rings`` is a sequence of (center, r_in, r_out) occupation targets,
    ``piece`` an optional ball (Q, r) intersected with the domain, and
    ``target`` the exit set whose hit probability is recorded.
    """
    fam, r1, r2, tilt = _sampler_args(spec)
    d = domain.d
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (d,):
        raise DomainError(f"start point must have {d} coordinates")
    dom_c, dom_ri, dom_ro = domain.arrays()
    if piece is None:
        piece_c, piece_r = np.zeros(d), -1.0
    else:
        piece_c, piece_r = np.asarray(piece[0], dtype=float).reshape(d), float(piece[1])
    occ_c = np.array([np.ravel(r[0]) for r in rings], dtype=float).reshape(-1, d)
    occ_ri = np.array([r[1] for r in rings], dtype=float)
    occ_ro = np.array([r[2] for r in rings], dtype=float)
    ex_c, ex_ri, ex_ro, need_D, need_piece = target.arrays(d)
    chash = _config_hash(spec=str(spec), domain=str(domain), x=x, dt=params.dt, n=params.n_paths,
                         seed=params.seed, max_steps=params.steps_cap, rings=[occ_c, occ_ri, occ_ro],
                         target=[ex_c, ex_ri, ex_ro, need_D, need_piece], piece=[piece_c, piece_r])
    K = _kernels()
    m = occ_c.shape[0]
    occ_sum, occ_sq, stats = np.zeros(m), np.zeros(m), np.zeros(6)
    for p0 in range(0, params.n_paths, CHUNK):
        p1 = min(p0 + CHUNK, params.n_paths)
        o, o2, st = K.run_paths(
            np.uint64(params.seed), p0, p1, x, float(params.dt), params.steps_cap, fam, r1, r2, tilt, RETRY_CAP,
            dom_c, dom_ri, dom_ro, piece_c, piece_r, occ_c, occ_ri, occ_ro, ex_c, ex_ri, ex_ro, need_D, need_piece,
        )
        occ_sum += o
        occ_sq += o2
        stats[[0, 1, 2, 3, 5]] += st[[0, 1, 2, 3, 5]]
        stats[4] = max(stats[4], st[4])
    return PathRun(params.n_paths, occ_sum, occ_sq, float(stats[0]), float(stats[1]), float(stats[2]),
                   int(stats[3]), int(stats[4]), int(stats[5]), chash, float(params.dt), backend_name())


def target_radius(domain, x, y, cap=0.05):
    """Default target radius min(cap, delta_D(y)/2, |x-y|/3)."""
    dist = float(np.linalg.norm(np.asarray(x, float) - np.asarray(y, float)))
    return min(cap, float(delta_D(domain, y)) / 2.0, dist / 3.0 if dist > 0 else math.inf)


def extrapolate_dt(coarse, fine):
    """Linear-in-dt extrapolation of two estimates to dt = 0 (independent runs)."""
    h1, h2 = coarse.flags["dt"], fine.flags["dt"]
    w1 = -h2 / (h1 - h2)
    w2 = h1 / (h1 - h2)
    mean = w1 * coarse.mean + w2 * fine.mean
    stderr = math.hypot(w1 * coarse.stderr, w2 * fine.stderr)
    flags = {
        "dt": 0.0,
        "dt_runs": [h1, h2],
        "dt_means": [coarse.mean, fine.mean],
        "dt_stderrs": [coarse.stderr, fine.stderr],
        "unreliable": (not coarse.reliable) or (not fine.reliable),
        "truncated_fraction": max(coarse.flags["truncated_fraction"], fine.flags["truncated_fraction"]),
        "backend": fine.flags.get("backend"),
    }
    chash = _config_hash(coarse=coarse.config_hash, fine=fine.config_hash)
    return McEstimate(mean, stderr, fine.n, chash, flags)


def _green_targets(domain, x, ys, rhos):
    out = []
    for y, rho in zip(ys, rhos):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if not rho > 0:
            raise DomainError("target radius must be positive")
        if float(delta_D(domain, y)) < rho:
            raise DomainError(f"B(y, {rho}) is not contained in the domain")
        out.append((y, 0.0, float(rho)))
    if float(delta_D(domain, x)) <= 0:
        raise DomainError("x must lie in the domain")
    return out


def green_mc_multi(spec, domain, x, ys, rhos, params, extrapolate=False, coarse_factor=10.0):
    """Ball-averaged Green function G_D(x, y) for many y from one set of paths.

    With ``extrapolate`` a second independent run at dt * coarse_factor (seed
    + 1) is combined linearly to remove the O(dt) exit-detection bias.
    """
    rings = _green_targets(domain, x, ys, rhos)
    vols = [ball_volume(domain.d, r[2]) for r in rings]
    fine = simulate(spec, domain, x, params, rings)
    ests = [fine.occupation(j, v) for j, v in enumerate(vols)]
    if not extrapolate:
        return ests
    cparams = PathParams(params.dt * coarse_factor, params.n_paths, params.seed + 1,
                         int(math.ceil(params.steps_cap / coarse_factor)))
    coarse = simulate(spec, domain, x, cparams, rings)
    return [extrapolate_dt(coarse.occupation(j, v), e) for j, (v, e) in enumerate(zip(vols, ests))]


def green_mc(spec, domain, x, y, rho, params, extrapolate=False, coarse_factor=10.0):
    """(1/|B(y,rho)|) E_x int_0^tau 1_{B(y,rho)}(X_t) dt by Riemann sums."""
    return green_mc_multi(spec, domain, x, [y], [rho], params, extrapolate, coarse_factor)[0]


def harmonic_mc(spec, domain, x, params, target=ANYWHERE, piece=None):
    """P_x(X at the exit of D (cap B(Q, r) if ``piece``) lands in ``target``)."""
    return simulate(spec, domain, x, params, (), target, piece).hit_probability()


def exit_into_domain_mc(spec, domain, Q, r, x, params):
    """(P_x(exit of B(Q,r) cap D lands in D), E_x[exit time]) as two estimates."""
    if float(delta_D(domain, x)) <= 0 or np.linalg.norm(np.asarray(x, float) - np.asarray(Q, float)) >= r:
        raise DomainError("x must lie in B(Q, r) cap D")
    run = simulate(spec, domain, x, params, (), ExitTarget(in_D=True), (Q, r))
    return run.hit_probability(), run.exit_time()
