"""Levy kernel j, free Green function G and the principal-value generator.

Both kernels are Gaussian mixtures over the subordinator densities,

    j(r) = int_0^inf (4 pi t)^(-d/2) exp(-r^2 / 4t) mu(t) dt,
    G(r) = int_0^inf (4 pi t)^(-d/2) exp(-r^2 / 4t) u(t) dt,

evaluated after the change of variables s = r^2/(4t), x = log s.  In x the
integrand is analytic in a strip and decays double-exponentially to the right
and exponentially to the left, so the plain trapezoid rule converges
geometrically; the left tail beyond the last node is added analytically from
the local exponential decay rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as gamma_fn

from .bernstein import Transience, transience_check
from .densities import has_closed_mu, has_closed_u, levy_density_mu, potential_density_u
from .errors import DomainError, NumericError, UnsupportedError
from .quadrature import tanh_sinh
from .report import RatioReport

X_RIGHT = math.log(80.0)


@dataclass(frozen=True)
class KernelEvaluator:
    """Kernel quadrature settings for one exponent in dimension ``d``."""

    spec: object
    d: int
    rtol: float | None = None
    step: float = 0.25
    max_halvings: int = 4

    def tol(self, closed):
        # inversion-based densities carry ~1e-7 relative noise
        if self.rtol is not None:
            return self.rtol
        return 1e-10 if closed else 1e-6

    @property
    def transient(self):
        return transience_check(self.spec, self.d).verdict is Transience.TRANSIENT


def _mixture(ev, density, r, rtol, return_error=False):
    r = np.asarray(r, dtype=float)
    if np.any(~(r > 0)):
        raise DomainError("r must be positive")
    shape = r.shape
    r = r.ravel()
    d = ev.d
    r2 = r[:, None] ** 2

    def integrand(x):
        s = np.exp(x)[None, :]
        t = r2 / (4.0 * s)
        return (math.pi * r2) ** (-d / 2.0) * s ** (d / 2.0) * np.exp(-s) * density(t) * r2 / (4.0 * s)

    h = ev.step
    # tempered densities put the mass near s ~ r, so the right end grows with r
    x_right = X_RIGHT + max(0.0, math.log(float(r.max())))
    x_lo = -30.0
    # extend the left end until the analytic tail correction is negligible
    while True:
        x = np.arange(x_right, x_lo - h / 2, -h)[::-1]
        f = integrand(x)
        total = h * (f.sum(axis=1) - 0.5 * (f[:, 0] + f[:, -1]))
        with np.errstate(divide="ignore", invalid="ignore"):
            rate = (np.log(f[:, 1]) - np.log(f[:, 0])) / h
            tail = np.where(rate > 0, f[:, 0] / np.where(rate > 0, rate, 1.0), np.inf)
        # an underflowed end node (tempered densities) has no tail left
        tail = np.where(f[:, 0] == 0.0, 0.0, tail)
        if np.all(tail <= 1e-3 * rtol * np.abs(total)) or x_lo < -400:
            break
        x_lo -= 40.0
    if not np.all(np.isfinite(tail)):
        raise NumericError("kernel integrand does not decay at t -> infinity (recurrent?)")
    value = total + tail
    for _ in range(ev.max_halvings):
        mid = x[:-1] + h / 2
        fm = integrand(mid)
        h /= 2
        refined = 0.5 * value + h * fm.sum(axis=1)
        err = np.abs(refined - value)
        value = refined
        x = np.sort(np.concatenate([x, mid]))
        if np.all(err <= rtol * np.abs(value)):
            break
    else:
        raise NumericError("kernel quadrature did not converge", iterates=(value - err, value))
    value = value.reshape(shape)
    err = err.reshape(shape)
    if value.ndim == 0:
        value, err = float(value), float(err)
    return (value, err) if return_error else value


def levy_kernel_j(ev, r, return_error=False):
    """Levy density j(r) of the d-dimensional subordinate Brownian motion."""
    return _mixture(ev, lambda t: levy_density_mu(ev.spec, t), r, ev.tol(has_closed_mu(ev.spec)), return_error)


def free_green_G(ev, r, return_error=False):
    """Whole-space Green function G(r); only defined for transient (spec, d)."""
    if not ev.transient:
        raise UnsupportedError(f"{ev.spec} is recurrent in d={ev.d}; no free Green function")
    return _mixture(ev, lambda t: potential_density_u(ev.spec, t), r, ev.tol(has_closed_u(ev.spec)), return_error)


def riesz_green(alpha, d, r):
    """Green function of the isotropic alpha-stable process (d > alpha)."""
    c = gamma_fn((d - alpha) / 2.0) / (2.0**alpha * math.pi ** (d / 2.0) * gamma_fn(alpha / 2.0))
    return c * np.asarray(r, dtype=float) ** (alpha - d)


def stable_levy_kernel(alpha, d, r):
    """Levy density of the isotropic alpha-stable process with symbol |xi|^alpha."""
    c = alpha * 2.0 ** (alpha - 1.0) * gamma_fn((d + alpha) / 2.0) / (
        math.pi ** (d / 2.0) * gamma_fn(1.0 - alpha / 2.0)
    )
    return c * np.asarray(r, dtype=float) ** (-d - alpha)


def projected_kernel(ev, s):
    """int over R^(d-1) of j_d(sqrt(|z|^2 + s^2)) dz, computed from j_d.

    Subordination predicts this equals the d=1 kernel of the same
    subordinator; used to confirm the dimensional reduction behind
    :func:`apply_generator`.
    """
    d = ev.d
    if d == 1:
        return levy_kernel_j(ev, s)
    s = float(s)
    area = 2.0 * math.pi ** ((d - 1) / 2.0) / gamma_fn((d - 1) / 2.0)

    def f(theta, dl, dr):
        # |z| = s tan(theta); dr = pi/2 - theta, so sec(theta) = 1/sin(dr)
        sec = 1.0 / np.sin(dr)
        tan = np.sin(theta) * sec
        return levy_kernel_j(ev, s * sec) * (s * tan) ** (d - 2) * s * sec**2

    val, _, _ = tanh_sinh(f, 0.0, math.pi / 2.0, rtol=1e-9, max_level=7)
    return area * val


def check_kernel_asymptotics(ev, r_grid=None, cap=10.0, doubling_cap=1e3):
    """Spreads of G(r) r^d phi(r^-2) and j(r) r^d / phi(r^-2) on (0, 1].

    Also returns the doubling ratios j(r)/j(2r) on (0, 1) and j(r)/j(r+1)
    on (1, 20).  The G report is None when (spec, d) is recurrent.
    """
    from .bernstein import phi_eval

    if r_grid is None:
        r_grid = np.logspace(-4, 0, 41)
    r = np.asarray(r_grid, dtype=float)
    phi = np.asarray(phi_eval(ev.spec, r**-2.0))
    j = levy_kernel_j(ev, r)
    rep_j = RatioReport.from_values("t:Jorigin", r, None, j, phi / r**ev.d, cap)
    rep_G = None
    if ev.transient:
        G = free_green_G(ev, r)
        rep_G = RatioReport.from_values("t:Gorigin", r, None, G, 1.0 / (r**ev.d * phi), cap)
    near = r[r < 1.0]
    rep_h1 = RatioReport.from_values("H:1", near, None, j[r < 1.0], levy_kernel_j(ev, 2 * near), doubling_cap)
    far = np.logspace(0, math.log10(20.0), 15)[1:]
    rep_h2 = RatioReport.from_values(
        "H:2", far, None, levy_kernel_j(ev, far), levy_kernel_j(ev, far + 1), doubling_cap
    )
    return rep_G, rep_j, rep_h1, rep_h2


@dataclass
class GeneratorResult:
    value: float
    trace: list
    taylor_bound: float
    richardson_exponent: float


DEFAULT_EPS = (1e-1, 1e-2, 1e-3, 1e-4)
S_FAR = 1e8


def _segment(f, fx, x, j1, a, b, sym, f_rtol):
    """int_a^b [f(x+s) + f(x-s) - 2 f(x)] j1(s) ds in the variable y = log s.

    The absolute tolerance is the noise floor implied by evaluating f to
    relative accuracy ``f_rtol``: cancellation in the second difference
    cannot resolve the integral below that.
    """
    la, lb = math.log(a), math.log(b)
    floor = 10.0 * f_rtol * max(abs(fx), 1e-300) * float(j1(a)) * a * (lb - la)

    def g(y, dl, dr):
        s = np.exp(y)
        plus = f(x + s)
        if sym:
            # x - s = (x - b) + b (1 - e^{-dr}): exact even when b = x
            minus = f((x - b) - b * np.expm1(-dr))
        else:
            minus = f(x - s)
        return (plus + minus - 2.0 * fx) * j1(s) * s

    val, err, _ = tanh_sinh(g, la, lb, rtol=1e-9, atol=max(floor, 1e-12), min_level=3, max_level=8)
    return float(val), g


def apply_generator(ev, f, x_d, eps_schedule=DEFAULT_EPS, breakpoints=(0.0,), fpp=None, f_rtol=1e-7):
    """Principal-value generator applied to a profile of the last coordinate.

    Computes I(eps) = int_{|s|>eps} (f(x+s) - f(x)) j_1(|s|) ds for each eps in
    the schedule (j_1 is the one-dimensional kernel of the same subordinator,
    to which the d-dimensional integral reduces for such profiles), then
    extrapolates eps -> 0 assuming I(eps) = I(0) - C eps^(2-alpha).
    ``breakpoints`` are the points where f is not smooth; ``f_rtol`` is the
    relative accuracy of f (Laplace-inverted profiles carry ~1e-7).

    The Taylor bound |f''(x)| int_0^eps s^2 j_1(s) ds for the last eps is
    reported as an independent size estimate of the excluded core.
    """
    x = float(x_d)
    if not x > 0:
        raise DomainError("x_d must be positive")
    eps = sorted(eps_schedule, reverse=True)
    ev1 = KernelEvaluator(ev.spec, 1, rtol=ev.rtol, step=ev.step)

    def j1(s):
        return levy_kernel_j(ev1, s)

    f_arr = lambda y: np.asarray(f(np.asarray(y, dtype=float)), dtype=float)  # noqa: E731
    fx = float(f_arr(np.array([x]))[0])
    kinks = sorted({abs(b - x) for b in breakpoints if abs(b - x) > 0})

    def integral(a, b):
        cuts = [a] + [k for k in kinks if a < k < b] + [b]
        total = 0.0
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            val, _ = _segment(f_arr, fx, x, j1, lo, hi, hi <= x, f_rtol)
            total += val
        return total

    # outer part [eps_0, S_FAR] plus a power-law tail beyond S_FAR
    outer = integral(eps[0], S_FAR)
    ys = np.log(S_FAR) + np.array([-0.5, 0.0])
    s_end = np.exp(ys)
    g_end = (f_arr(x + s_end) + f_arr(x - s_end) - 2 * fx) * j1(s_end) * s_end
    tail = 0.0
    if np.all(g_end != 0) and np.sign(g_end[0]) == np.sign(g_end[1]):
        rate = (math.log(abs(g_end[0])) - math.log(abs(g_end[1]))) / 0.5
        if rate <= 0:
            raise NumericError("generator integrand does not decay at infinity")
        tail = g_end[1] / rate
    values = [outer + tail]
    for e_prev, e in zip(eps[:-1], eps[1:]):
        values.append(values[-1] + integral(e, e_prev))
    trace = list(zip(eps, values))
    incr = np.abs(np.diff(values))
    if len(incr) >= 2 and incr[-1] > 2.0 * incr[-2] and incr[-1] > 1e-3 * max(abs(fx), 1.0):
        raise NumericError("generator trace is not Cauchy", iterates=values[-2:])
    p = 2.0 - ev.spec.alpha
    if len(values) >= 2:
        q = (eps[-2] / eps[-1]) ** p
        value = values[-1] + (values[-1] - values[-2]) / (q - 1.0)
    else:
        value = values[-1]
    if fpp is None:
        hstep = min(x / 4.0, 1e-2)
        pts = f_arr(np.array([x - hstep, x, x + hstep]))
        fpp = (pts[0] - 2 * pts[1] + pts[2]) / hstep**2
    core, _, _ = tanh_sinh(
        lambda y, dl, dr: np.exp(3 * y) * j1(np.exp(y)),
        math.log(eps[-1]) - 40.0,
        math.log(eps[-1]),
        rtol=1e-8,
    )
    return GeneratorResult(float(value), trace, float(abs(fpp) * core), p)
