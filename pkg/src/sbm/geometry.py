"""Test domains with closed-form boundary distance.

Every bounded shape here is a disjoint union of annular pieces
``(center, r_in, r_out)``; a ball is an annulus with ``r_in = 0`` and a d=1
interval is a one-dimensional ball.  That single representation is also what
the Monte Carlo kernels consume.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, SbmError


@dataclass(frozen=True)
class Domain:
    kind: str
    d: int
    centers: tuple
    r_in: tuple
    r_out: tuple
    height: float | None = None
    label: str = ""

    def __post_init__(self):
        if self.kind == "slab":
            if not (self.height and self.height > 0):
                raise DomainError("slab height must be positive")
            return
        if not self.centers:
            raise DomainError("domain needs at least one piece")
        for c, ri, ro in zip(self.centers, self.r_in, self.r_out):
            if len(c) != self.d:
                raise DomainError(f"center {c} is not {self.d}-dimensional")
            if not 0 <= ri < ro:
                raise DomainError(f"need 0 <= r_in < r_out, got {ri}, {ro}")
        if self.d == 1 and any(ri > 0 for ri in self.r_in):
            raise DomainError("annuli are not available in d=1")
        if self.separation() <= 0:
            raise DomainError("pieces must be separated by a positive distance")

    def __str__(self):
        return self.label or self.kind

    @property
    def pieces(self):
        return [(np.asarray(c, dtype=float), ri, ro) for c, ri, ro in zip(self.centers, self.r_in, self.r_out)]

    def separation(self):
        """Smallest gap between two pieces (inf for a single piece)."""
        gap = math.inf
        ps = self.pieces
        for i in range(len(ps)):
            for k in range(i + 1, len(ps)):
                ci, _, ri = ps[i]
                ck, _, rk = ps[k]
                if ps[i][1] > 0 or ps[k][1] > 0:
                    raise DomainError("annuli cannot be combined with other pieces")
                gap = min(gap, float(np.linalg.norm(ci - ck)) - ri - rk)
        return gap

    @property
    def c11_radius(self):
        """Radius R of the uniform interior/exterior ball condition."""
        if self.kind == "slab":
            return self.height / 2.0
        R = math.inf
        for _, ri, ro in self.pieces:
            R = min(R, ro if ri == 0 else min(ri, (ro - ri) / 2.0))
        return min(R, self.separation() / 2.0)

    @property
    def kappa_fat(self):
        """(R1, kappa): C^{1,1} sets with radius R are (R, 1/2)-fat."""
        return self.c11_radius, 0.5

    @property
    def diameter(self):
        if self.kind == "slab":
            return math.inf
        pts = [c for c, _, _ in self.pieces]
        return max(float(np.linalg.norm(a - b)) + ra + rb
                   for a, (_, _, ra) in zip(pts, self.pieces) for b, (_, _, rb) in zip(pts, self.pieces))

    def arrays(self):
        """(centers, r_in, r_out) as float arrays for the simulation kernels."""
        if self.kind == "slab":
            raise DomainError("the slab is only used for generator tests")
        return (np.asarray(self.centers, dtype=float).reshape(-1, self.d),
                np.asarray(self.r_in, dtype=float), np.asarray(self.r_out, dtype=float))


def ball(radius=1.0, center=None, d=2):
    center = tuple(float(c) for c in (center if center is not None else [0.0] * d))
    return Domain("ball", len(center), (center,), (0.0,), (float(radius),),
                  label=f"ball:r={radius:g}" + ("" if not any(center) else f",c={center}"))


def disjoint_balls(centers, radius):
    cs = tuple(tuple(float(v) for v in c) for c in centers)
    radii = radius if np.ndim(radius) else [radius] * len(cs)
    return Domain("balls", len(cs[0]), cs, (0.0,) * len(cs), tuple(float(r) for r in radii),
                  label=f"balls:n={len(cs)}")


def annulus(inner, outer, d=2, center=None):
    center = tuple(float(c) for c in (center if center is not None else [0.0] * d))
    return Domain("annulus", d, (center,), (float(inner),), (float(outer),),
                  label=f"annulus:ri={inner:g},ro={outer:g}")


def intervals(bounds):
    bounds = sorted((float(a), float(b)) for a, b in bounds)
    for a, b in bounds:
        if not a < b:
            raise DomainError(f"empty interval [{a}, {b}]")
    return Domain("intervals", 1, tuple(((a + b) / 2,) for a, b in bounds), (0.0,) * len(bounds),
                  tuple((b - a) / 2 for a, b in bounds),
                  label="intervals:" + ",".join(f"[{a:g},{b:g}]" for a, b in bounds))


def slab(height, d=2):
    """{0 < x_d < height}; unbounded, used only to host generator profiles."""
    return Domain("slab", d, (), (), (), height=float(height), label=f"slab:h={height:g}")


_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"


def _kv(body):
    out = {}
    for key, val in re.findall(r"(\w+)=(\([^)]*\)|[^,]+)", body):
        out[key] = val.strip()
    return out


def _point(text):
    """Parse '(a,b)' where a component may carry a '±' prefix; returns a list of points."""
    comps = [c.strip() for c in text.strip("()").split(",")]
    opts = [[float(c[1:]), -float(c[1:])] if c.startswith("±") else [float(c)] for c in comps]
    pts = [[]]
    for o in opts:
        pts = [p + [v] for p in pts for v in o]
    return pts


def parse_domain(text, d=2):
    """Build a Domain from strings like ``ball:r=1``, ``annulus:ri=0.5,ro=1``,
    ``balls:c=(±0.75,0),r=0.2``, ``intervals:[0,1],[2,3]`` or ``slab:h=1``."""
    kind, _, body = text.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "intervals":
            pairs = re.findall(rf"\[\s*({_NUM})\s*,\s*({_NUM})\s*\]", body)
            if not pairs:
                raise DomainError(f"no intervals in {text!r}")
            return replace(intervals(pairs), label=text)
        kv = _kv(body)
        if "d" in kv:
            d = int(kv["d"])
        if kind == "ball":
            center = _point(kv["c"])[0] if "c" in kv else None
            return replace(ball(float(kv.get("r", 1.0)), center, d), label=text)
        if kind == "annulus":
            return replace(annulus(float(kv["ri"]), float(kv["ro"]), d), label=text)
        if kind == "balls":
            centers = []
            for chunk in re.findall(r"\([^)]*\)", body):
                centers.extend(_point(chunk))
            return replace(disjoint_balls(centers, float(kv["r"])), label=text)
        if kind == "slab":
            return replace(slab(float(kv.get("h", 1.0)), d), label=text)
    except (KeyError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"cannot parse domain {text!r}: {exc}") from None
    raise DomainError(f"unknown domain kind {kind!r}")


def _as_points(domain, x):
    x = np.asarray(x, dtype=float)
    if domain.d == 1 and x.ndim == 0:
        x = x[None]
    if x.shape[-1] != domain.d:
        raise DomainError(f"points must have last axis {domain.d}")
    return x


def delta_D(domain, x):
    """Distance from x to the complement of the domain (0 outside), vectorized."""
    x = _as_points(domain, x)
    if domain.kind == "slab":
        h = x[..., -1]
        out = np.maximum(np.minimum(h, domain.height - h), 0.0)
    else:
        out = np.zeros(x.shape[:-1])
        for c, ri, ro in domain.pieces:
            rho = np.linalg.norm(x - c, axis=-1)
            inner = rho - ri if ri > 0 else np.inf
            out = np.maximum(out, np.maximum(np.minimum(ro - rho, inner), 0.0))
    return float(out) if out.ndim == 0 else out


def dist_to_D(domain, x):
    """Distance from x to the closure of the domain (0 inside)."""
    x = _as_points(domain, x)
    if domain.kind == "slab":
        h = x[..., -1]
        out = np.maximum(np.maximum(-h, h - domain.height), 0.0)
    else:
        out = np.full(x.shape[:-1], np.inf)
        for c, ri, ro in domain.pieces:
            rho = np.linalg.norm(x - c, axis=-1)
            out = np.minimum(out, np.maximum(np.maximum(ri - rho, rho - ro), 0.0))
    return float(out) if out.ndim == 0 else out


def contains(domain, x):
    return np.asarray(delta_D(domain, x)) > 0


def r_xy(domain, x, y):
    """delta_D(x) v delta_D(y) v |x - y| for x, y in the domain."""
    dx, dy = delta_D(domain, x), delta_D(domain, y)
    if np.any(np.asarray(dx) <= 0) or np.any(np.asarray(dy) <= 0):
        raise DomainError("x and y must lie in the domain")
    dist = np.linalg.norm(_as_points(domain, x) - _as_points(domain, y), axis=-1)
    out = np.maximum(np.maximum(dx, dy), dist)
    return float(out) if np.ndim(out) == 0 else out


def _piece_of(domain, x):
    """Index of the piece containing (or, outside, nearest to) x."""
    best, best_d = 0, math.inf
    for i, (c, ri, ro) in enumerate(domain.pieces):
        rho = float(np.linalg.norm(x - c))
        dist = max(ri - rho, rho - ro, 0.0)
        if dist < best_d:
            best, best_d = i, dist
    return best


def _unit(v, fallback):
    n = float(np.linalg.norm(v))
    return v / n if n > 0 else fallback


def deepest_point(domain, near):
    """Point of maximal delta_D in the piece of ``near``, closest to ``near``."""
    near = _as_points(domain, near)
    c, ri, ro = domain.pieces[_piece_of(domain, near)]
    if ri == 0:
        return c.copy()
    e1 = np.zeros(domain.d)
    e1[0] = 1.0
    return c + (ri + ro) / 2.0 * _unit(near - c, e1)


def point_at_depth(domain, depth, direction, piece=0):
    """Point of the given piece at distance ``depth`` from its outer sphere along ``direction``."""
    c, ri, ro = domain.pieces[piece]
    u = _unit(np.asarray(direction, dtype=float), None)
    if u is None:
        raise DomainError("direction must be non-zero")
    if not 0 < depth <= (ro - ri if ri > 0 else ro):
        raise DomainError(f"depth {depth} not attainable in piece {piece}")
    return c + (ro - depth) * u


def boundary_points(domain, n, seed=0):
    """Deterministic sample of n points on the boundary with outward unit normals."""
    rng = np.random.default_rng(seed)
    pts, normals = [], []
    spheres = []
    for c, ri, ro in domain.pieces:
        spheres.append((c, ro, 1.0))
        if ri > 0:
            spheres.append((c, ri, -1.0))
    for k in range(n):
        c, r, sign = spheres[k % len(spheres)]
        u = rng.standard_normal(domain.d)
        u /= np.linalg.norm(u)
        pts.append(c + r * u)
        normals.append(sign * u)
    return np.array(pts), np.array(normals)


def uniform_ball_check(domain, n=200, seed=0, rtol=1e-9):
    """Verify interior and exterior tangent balls of radius R at sampled boundary points.

    The interior ball B(Q - R n, R) must lie in the domain and the exterior
    ball B(Q + R n, R) in its complement; for these shapes both reduce to a
    distance test on the ball center.
    """
    R = domain.c11_radius
    Q, nrm = boundary_points(domain, n, seed)
    inner_ok = np.asarray(delta_D(domain, Q - R * nrm)) >= R * (1 - rtol)
    outer_ok = np.asarray(dist_to_D(domain, Q + R * nrm)) >= R * (1 - rtol)
    return bool(np.all(inner_ok) and np.all(outer_ok))


@dataclass(frozen=True)
class KappaFatSetup:
    """Reference point z0 and the scales entering the kappa-fat estimate."""

    domain: Domain
    z0: tuple
    R3: float
    kappa: float
    eps1: float
    g_cap: float | None = None

    def __post_init__(self):
        dz = delta_D(self.domain, np.asarray(self.z0))
        if not self.kappa * self.R3 < dz < self.R3:
            raise DomainError(f"delta_D(z0)={dz} outside ({self.kappa * self.R3}, {self.R3})")
        if not math.isclose(self.eps1, self.kappa * self.R3 / 24.0, rel_tol=1e-15):
            raise DomainError("eps1 must equal kappa R3 / 24")

    def with_g_cap(self, cap):
        return replace(self, g_cap=float(cap))


def make_setup(domain, R3=None, z0=None, depth_fraction=None):
    """KappaFatSetup with z0 at depth ((1 + kappa)/2) R3 unless given.

    ``depth_fraction`` moves z0 to depth ``depth_fraction * R3`` instead, used
    to report the sensitivity of the estimate to the choice of z0.
    """
    R1, kappa = domain.kappa_fat
    R3 = float(R1 if R3 is None else R3)
    if z0 is None:
        frac = (1.0 + kappa) / 2.0 if depth_fraction is None else depth_fraction
        c, ri, ro = domain.pieces[0]
        e1 = np.zeros(domain.d)
        e1[0] = 1.0
        z0 = point_at_depth(domain, frac * R3, e1, 0)
    return KappaFatSetup(domain, tuple(float(v) for v in np.ravel(z0)), R3, kappa, kappa * R3 / 24.0)


def pick_A(setup, x, y, steps=256):
    """Point A with delta_D(A) > (kappa/2) r(x,y) and |x-A| v |y-A| < 5 r(x,y).

    Returns z0 when r(x,y) >= eps1; otherwise searches along the ray from the
    midpoint of x and y toward the deepest point of its piece.
    """
    dom = setup.domain
    x = _as_points(dom, x)
    y = _as_points(dom, y)
    r = r_xy(dom, x, y)
    if r >= setup.eps1:
        return np.asarray(setup.z0, dtype=float)
    m = (x + y) / 2.0
    target = deepest_point(dom, m)
    e1 = np.zeros(dom.d)
    e1[0] = -1.0
    u = _unit(target - m, e1)
    span = min(5.0 * r, float(np.linalg.norm(target - m)))
    for t in np.linspace(0.0, span, steps + 1):
        A = m + t * u
        if delta_D(dom, A) > setup.kappa * r / 2.0 and max(np.linalg.norm(x - A), np.linalg.norm(y - A)) < 5.0 * r:
            return A
    raise SbmError("no admissible A found; unsupported geometry")


def in_gz1(setup, x, y, A):
    """Membership predicate of the admissible set for A."""
    dom = setup.domain
    r = r_xy(dom, x, y)
    if r >= setup.eps1:
        return bool(np.allclose(A, setup.z0))
    return bool(delta_D(dom, A) > setup.kappa * r / 2.0
                and max(np.linalg.norm(np.asarray(x) - A), np.linalg.norm(np.asarray(y) - A)) < 5.0 * r)


def ball_volume(d, r):
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0) * r**d
