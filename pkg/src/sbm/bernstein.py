"""Complete Bernstein functions used as subordinator Laplace exponents.

A :class:`PhiSpec` names one Laplace exponent phi together with its index
``alpha`` and slowly varying part ``ell`` (so that phi(lam) = lam**(alpha/2)
* ell(lam) for the built-in families).  Everything here is vectorized over
numpy arrays of lambda.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, UnsupportedError
from .report import RatioReport


class Family(str, enum.Enum):
    STABLE = "stable"
    RELATIVISTIC = "relativistic"
    STABLE_SUM = "stablesum"
    LOG_POWER = "logpower"
    LOG_POWER_NEG = "logpowerneg"
    CUSTOM = "custom"


# families that have an exact sampler for their subordinator increments
SAMPLABLE = (Family.STABLE, Family.RELATIVISTIC, Family.STABLE_SUM)


@dataclass(frozen=True)
class PhiSpec:
    """Laplace exponent of a driftless, unkilled subordinator.

    ``beta`` is the second stable index for ``stablesum`` and the negative
    log-exponent for ``logpowerneg``; ``gamma`` is the log-exponent for
    ``logpower``; ``mass`` is the relativistic mass (1 by default).  Custom
    exponents pass callables plus the index ``alpha`` and optionally the
    small-lambda power ``small_exponent`` (needed for transience checks).
    """

    family: Family
    alpha: float
    beta: Optional[float] = None
    gamma: Optional[float] = None
    mass: float = 1.0
    drift: float = 0.0
    killing: float = 0.0
    phi_fn: Optional[Callable] = field(default=None, compare=False, repr=False)
    phi_prime_fn: Optional[Callable] = field(default=None, compare=False, repr=False)
    ell_fn: Optional[Callable] = field(default=None, compare=False, repr=False)
    small_exponent: Optional[float] = None
    label: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        a = self.alpha
        if not 0.0 < a < 2.0:
            raise DomainError(f"alpha must lie in (0, 2), got {a}")
        if self.drift != 0.0 or self.killing != 0.0:
            raise DomainError("only driftless, unkilled subordinators are supported")
        fam = self.family
        if fam is Family.STABLE_SUM:
            if self.beta is None or not 0.0 < self.beta < a:
                raise DomainError(f"stablesum needs 0 < beta < alpha, got beta={self.beta}")
        elif fam is Family.LOG_POWER:
            if self.gamma is None or not 0.0 < self.gamma < 2.0 - a:
                raise DomainError(f"logpower needs 0 < gamma < 2 - alpha, got gamma={self.gamma}")
        elif fam is Family.LOG_POWER_NEG:
            # beta == alpha would give phi(0+) = 1, i.e. a killed subordinator
            if self.beta is None or not 0.0 < self.beta < a:
                raise DomainError(f"logpowerneg needs 0 < beta < alpha, got beta={self.beta}")
        elif fam is Family.RELATIVISTIC:
            if not self.mass > 0:
                raise DomainError("relativistic mass must be positive")
        elif fam is Family.CUSTOM:
            if self.phi_fn is None:
                raise DomainError("custom family needs phi_fn")

    def __str__(self):
        if self.family is Family.CUSTOM:
            return self.label or f"custom:alpha={self.alpha:g}"
        parts = [f"alpha={self.alpha:g}"]
        if self.beta is not None:
            parts.append(f"beta={self.beta:g}")
        if self.gamma is not None:
            parts.append(f"gamma={self.gamma:g}")
        if self.family is Family.RELATIVISTIC and self.mass != 1.0:
            parts.append(f"m={self.mass:g}")
        return f"{self.family.value}:" + ",".join(parts)

    @property
    def samplable(self):
        return self.family in SAMPLABLE

    def with_alpha(self, alpha):
        return replace(self, alpha=alpha)


def stable(alpha):
    return PhiSpec(Family.STABLE, alpha)


def relativistic(alpha, mass=1.0):
    return PhiSpec(Family.RELATIVISTIC, alpha, mass=mass)


def stable_sum(alpha, beta):
    return PhiSpec(Family.STABLE_SUM, alpha, beta=beta)


def log_power(alpha, gamma):
    return PhiSpec(Family.LOG_POWER, alpha, gamma=gamma)


def log_power_neg(alpha, beta):
    return PhiSpec(Family.LOG_POWER_NEG, alpha, beta=beta)


def custom(alpha, phi, phi_prime=None, ell=None, small_exponent=None, label=None):
    return PhiSpec(
        Family.CUSTOM,
        alpha,
        phi_fn=phi,
        phi_prime_fn=phi_prime,
        ell_fn=ell,
        small_exponent=small_exponent,
        label=label,
    )


_PARAM_ALIASES = {"a": "alpha", "alpha": "alpha", "b": "beta", "beta": "beta",
                  "g": "gamma", "gamma": "gamma", "m": "mass", "mass": "mass"}


def parse_phi(text):
    """Parse ``family:key=value,...`` into a :class:`PhiSpec`.

    >>> parse_phi("stablesum:alpha=1.2,beta=0.6")
    PhiSpec(family=<Family.STABLE_SUM: 'stablesum'>, alpha=1.2, beta=0.6, gamma=None, mass=1.0, drift=0.0, killing=0.0, small_exponent=None, label=None)
    """
    name, _, rest = text.strip().partition(":")
    try:
        fam = Family(name.strip().lower())
    except ValueError:
        raise DomainError(f"unknown phi family {name!r}") from None
    if fam is Family.CUSTOM:
        raise UnsupportedError("custom exponents cannot be given as strings")
    kwargs = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise DomainError(f"malformed phi parameter {item!r}")
        key = _PARAM_ALIASES.get(key.strip().lower())
        if key is None:
            raise DomainError(f"unknown phi parameter in {item!r}")
        kwargs[key] = float(val)
    if "alpha" not in kwargs:
        raise DomainError("phi spec needs alpha")
    return PhiSpec(fam, **kwargs)


def _check_lambda(lam):
    lam = np.asarray(lam, dtype=float)
    if np.any(~(lam > 0)):
        raise DomainError("lambda must be positive")
    return lam


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def _rel_scale(spec):
    return spec.mass ** (2.0 / spec.alpha)


def phi_eval(spec, lam):
    """phi(lam) from the family's closed form."""
    lam = _check_lambda(lam)
    a2 = spec.alpha / 2.0
    fam = spec.family
    if fam is Family.STABLE:
        out = lam**a2
    elif fam is Family.RELATIVISTIC:
        M = _rel_scale(spec)
        out = spec.mass * np.expm1(a2 * np.log1p(lam / M))
    elif fam is Family.STABLE_SUM:
        out = lam**a2 + lam ** (spec.beta / 2.0)
    elif fam is Family.LOG_POWER:
        out = lam**a2 * np.log1p(lam) ** (spec.gamma / 2.0)
    elif fam is Family.LOG_POWER_NEG:
        out = lam**a2 * np.log1p(lam) ** (-spec.beta / 2.0)
    else:
        out = np.asarray(spec.phi_fn(lam), dtype=float)
    return _out(out)


# Relative step for the custom-family central difference: cube root of the
# double-precision epsilon balances truncation against rounding error.
CUSTOM_DIFF_STEP = np.finfo(float).eps ** (1.0 / 3.0)


def phi_prime(spec, lam):
    """Derivative of phi; closed form for built-in families."""
    lam = _check_lambda(lam)
    a2 = spec.alpha / 2.0
    fam = spec.family
    if fam is Family.STABLE:
        out = a2 * lam ** (a2 - 1.0)
    elif fam is Family.RELATIVISTIC:
        M = _rel_scale(spec)
        out = a2 * spec.mass / M * (1.0 + lam / M) ** (a2 - 1.0)
    elif fam is Family.STABLE_SUM:
        b2 = spec.beta / 2.0
        out = a2 * lam ** (a2 - 1.0) + b2 * lam ** (b2 - 1.0)
    elif fam in (Family.LOG_POWER, Family.LOG_POWER_NEG):
        e = spec.gamma / 2.0 if fam is Family.LOG_POWER else -spec.beta / 2.0
        L = np.log1p(lam)
        out = a2 * lam ** (a2 - 1.0) * L**e + e * lam**a2 * L ** (e - 1.0) / (1.0 + lam)
    elif spec.phi_prime_fn is not None:
        out = np.asarray(spec.phi_prime_fn(lam), dtype=float)
    else:
        h = CUSTOM_DIFF_STEP * lam
        out = (np.asarray(spec.phi_fn(lam + h)) - np.asarray(spec.phi_fn(lam - h))) / (2.0 * h)
    return _out(out)


def ell_eval(spec, lam):
    """Slowly varying part ell(lam) = phi(lam) / lam**(alpha/2)."""
    lam = _check_lambda(lam)
    a2 = spec.alpha / 2.0
    fam = spec.family
    if fam is Family.STABLE:
        out = np.ones_like(lam)
    elif fam is Family.STABLE_SUM:
        out = 1.0 + lam ** ((spec.beta - spec.alpha) / 2.0)
    elif fam is Family.LOG_POWER:
        out = np.log1p(lam) ** (spec.gamma / 2.0)
    elif fam is Family.LOG_POWER_NEG:
        out = np.log1p(lam) ** (-spec.beta / 2.0)
    elif fam is Family.CUSTOM and spec.ell_fn is not None:
        out = np.asarray(spec.ell_fn(lam), dtype=float)
    else:
        out = np.asarray(phi_eval(spec, lam)) / lam**a2
    return _out(out)


def _log_log1p_exp(s):
    """log(log(1 + e**s)) without underflow for very negative s."""
    s = np.asarray(s, dtype=float)
    out = np.empty_like(s)
    lo = s < -30.0
    hi = s > 35.0
    mid = ~(lo | hi)
    out[lo] = s[lo]
    out[hi] = np.log(s[hi] + np.log1p(np.exp(-s[hi])))
    out[mid] = np.log(np.log1p(np.exp(s[mid])))
    return out


def log_phi_of_log(spec, s):
    """log phi(e**s), accurate for |s| in the hundreds.

    The ladder-height quadrature evaluates phi at arguments that under- or
    overflow double precision near the ends of its interval, so it works with
    log-arguments throughout.
    """
    s = np.asarray(s, dtype=float)
    a2 = spec.alpha / 2.0
    fam = spec.family
    if fam is Family.STABLE:
        return a2 * s
    if fam is Family.STABLE_SUM:
        return np.logaddexp(a2 * s, spec.beta / 2.0 * s)
    if fam is Family.LOG_POWER:
        return a2 * s + spec.gamma / 2.0 * _log_log1p_exp(s)
    if fam is Family.LOG_POWER_NEG:
        return a2 * s - spec.beta / 2.0 * _log_log1p_exp(s)
    if fam is Family.RELATIVISTIC:
        # phi = m * expm1(a2 * log1p(lam / M)); log1p(lam/M) = exp(log_log1p_exp(s - log M))
        M = _rel_scale(spec)
        sl = s - math.log(M)
        L = np.exp(_log_log1p_exp(sl))
        out = np.empty_like(s)
        small = sl < -30.0
        # expm1(a2 * L) ~ a2 * L for tiny L; log L ~ sl there
        out[small] = math.log(spec.mass * a2) + sl[small]
        out[~small] = np.log(spec.mass * np.expm1(a2 * L[~small]))
        return out
    lam = np.exp(s)
    with np.errstate(divide="ignore"):
        return np.log(np.asarray(spec.phi_fn(lam), dtype=float))


def small_lambda_exponent(spec):
    """Power p with phi(lam) ~ c * lam**p as lam -> 0."""
    fam = spec.family
    a2 = spec.alpha / 2.0
    if fam is Family.STABLE:
        return a2
    if fam is Family.RELATIVISTIC:
        return 1.0
    if fam is Family.STABLE_SUM:
        return min(spec.alpha, spec.beta) / 2.0
    if fam is Family.LOG_POWER:
        return a2 + spec.gamma / 2.0
    if fam is Family.LOG_POWER_NEG:
        return a2 - spec.beta / 2.0
    if spec.small_exponent is None:
        raise UnsupportedError("custom exponent has no declared small-lambda exponent")
    return float(spec.small_exponent)


@dataclass(frozen=True)
class MonotoneCheck:
    passed: bool
    worst_violation: float
    failed_order: Optional[int]


def divided_differences(f_values, grid, order):
    """Divided differences f[x_i, ..., x_{i+n}] for n = 0..order."""
    x = np.asarray(grid, dtype=float)
    d = np.asarray(f_values, dtype=float)
    out = [d]
    for n in range(1, order + 1):
        d = (d[1:] - d[:-1]) / (x[n:] - x[:-n])
        out.append(d)
    return out


MAX_MONOTONE_ORDER = 6


def check_complete_monotone(f, grid, order, rtol=1e-9, bernstein=False):
    """Check sign alternation of divided differences of ``f`` up to ``order``.

    For a completely monotone f the n-th divided difference carries the sign
    of (-1)**n exactly (mean value theorem), so any sign error beyond the
    relative rounding allowance ``rtol`` is a genuine violation.  With
    ``bernstein=True`` the check is for a Bernstein function instead: f >= 0
    and the n-th difference has sign (-1)**(n-1) for n >= 1.

    Returns the worst signed violation, normalized by the largest magnitude
    at the offending order (negative means violated).
    """
    if order > MAX_MONOTONE_ORDER:
        raise DomainError(f"order is capped at {MAX_MONOTONE_ORDER}")
    x = np.asarray(grid, dtype=float)
    if x.ndim != 1 or np.any(np.diff(x) <= 0):
        raise DomainError("grid must be strictly increasing")
    if x.size < order + 2:
        raise DomainError(f"grid too short for order {order}")
    vals = f(x) if callable(f) else f
    dds = divided_differences(vals, x, order)
    worst = math.inf
    failed = None
    for n, d in enumerate(dds):
        sign = (-1.0) ** (n - 1 if bernstein and n >= 1 else n)
        signed = sign * d
        scale = np.max(np.abs(d))
        if scale == 0:
            continue
        rel = float(np.min(signed) / scale)
        if rel < worst:
            worst = rel
        if failed is None and rel < -rtol:
            failed = n
    return MonotoneCheck(failed is None, worst, failed)


def check_bernstein(spec, grid, order=4, rtol=1e-9):
    """phi > 0, phi' > 0 and Bernstein sign pattern on ``grid``."""
    grid = np.asarray(grid, dtype=float)
    phi = phi_eval(spec, grid)
    dphi = phi_prime(spec, grid)
    if np.any(phi <= 0) or np.any(dphi <= 0):
        return MonotoneCheck(False, -1.0, 0)
    return check_complete_monotone(phi, grid, order, rtol=rtol, bernstein=True)


def check_assumption_h(spec, grid=None, cap=1.0001):
    """Ratio phi / (lam**(alpha/2) ell) over lambda in [1, 1e6]."""
    if grid is None:
        grid = np.logspace(0.0, 6.0, 121)
    grid = np.asarray(grid, dtype=float)
    lhs = np.asarray(phi_eval(spec, grid))
    rhs = grid ** (spec.alpha / 2.0) * np.asarray(ell_eval(spec, grid))
    return RatioReport.from_values("H/e:reg-var", grid, None, lhs, rhs, cap)


class Transience(str, enum.Enum):
    TRANSIENT = "transient"
    RECURRENT = "recurrent"


@dataclass(frozen=True)
class TransienceResult:
    verdict: Transience
    integral: float
    small_exponent: float
    note: str = ""


def transience_check(spec, d, eps=1e-8):
    """Chung-Fuchs criterion: transient iff int_0 lam**(d/2-1)/phi(lam) < inf.

    The verdict compares the small-lambda power of phi with d/2; the
    integral over [eps, 1] is returned as a diagnostic (it grows without
    bound as eps -> 0 exactly when the process is recurrent).
    """
    if d < 1:
        raise DomainError("dimension must be >= 1")
    p = small_lambda_exponent(spec)
    verdict = Transience.TRANSIENT if d / 2.0 > p else Transience.RECURRENT
    # integrate in log-lambda: int lam**(d/2) / phi(lam) dlog(lam)
    s = np.linspace(math.log(eps), 0.0, 4001)
    lam = np.exp(s)
    g = lam ** (d / 2.0) / np.asarray(phi_eval(spec, lam))
    integral = float(np.trapezoid(g, s))
    note = ""
    if spec.family is Family.CUSTOM and spec.label == "log_plus_stable" and d == 2:
        note = ("phi = log(1+lam) + lam**(alpha/2) behaves like lam**(alpha/2) "
                "near 0, so the criterion gives transience in d=2 although the "
                "process is sometimes described as recurrent there")
    return TransienceResult(verdict, integral, p, note)


def log_plus_stable(alpha):
    """phi(lam) = log(1 + lam) + lam**(alpha/2) as a custom exponent."""
    a2 = alpha / 2.0
    return custom(
        alpha,
        lambda lam: np.log1p(lam) + lam**a2,
        lambda lam: 1.0 / (1.0 + lam) + a2 * lam ** (a2 - 1.0),
        small_exponent=a2,
        label="log_plus_stable",
    )
