"""Potential density u and Levy density mu of the subordinator.

u is the inverse Laplace transform of 1/phi and t*mu(t) that of phi'.
Where an elementary closed form exists it is the primary evaluator:

* stable: u(t) = t^(rho-1)/Gamma(rho), mu(t) = rho/Gamma(1-rho) t^(-1-rho);
* stablesum: mu is the sum of the two stable densities;
* relativistic: mu is the exponentially tempered stable density
  (rho/Gamma(1-rho)) t^(-1-rho) e^(-M t), M = m^(2/alpha).

Everything else goes through Gaver-Stehfest; ``mode="inversion"`` forces the
inversion path so closed forms can serve as oracles.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import gamma as gamma_fn

from . import laplace
from .bernstein import Family, phi_eval, phi_prime
from .errors import DomainError
from .report import RatioReport

ZAHLE_FACTOR = 1.0 / (1.0 - math.exp(-1.0))


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise DomainError("t must be positive")
    return t


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def _stable_mu(rho, t):
    return rho / gamma_fn(1.0 - rho) * t ** (-1.0 - rho)


def has_closed_u(spec):
    return spec.family is Family.STABLE


def has_closed_mu(spec):
    return spec.family in (Family.STABLE, Family.STABLE_SUM, Family.RELATIVISTIC)


def potential_density_u(spec, t, mode="auto"):
    t = _check_t(t)
    if mode == "auto" and has_closed_u(spec):
        rho = spec.alpha / 2.0
        return _out(t ** (rho - 1.0) / gamma_fn(rho))
    return _out(laplace.invert(lambda lam: 1.0 / phi_eval(spec, lam), t))


def levy_density_mu(spec, t, mode="auto"):
    t = _check_t(t)
    if mode == "auto" and has_closed_mu(spec):
        rho = spec.alpha / 2.0
        if spec.family is Family.STABLE:
            return _out(_stable_mu(rho, t))
        if spec.family is Family.STABLE_SUM:
            return _out(_stable_mu(rho, t) + _stable_mu(spec.beta / 2.0, t))
        M = spec.mass ** (2.0 / spec.alpha)
        # phi = m((1 + lam/M)^rho - 1) = (m / M^rho) ((M + lam)^rho - M^rho)
        return _out(spec.mass * M**-rho * _stable_mu(rho, t) * np.exp(-M * t))
    return _out(laplace.invert(lambda lam: phi_prime(spec, lam), t) / t)


@dataclass(frozen=True)
class DensityTable:
    spec: object
    grid: np.ndarray
    u_values: np.ndarray
    mu_values: np.ndarray

    def to_csv(self, path):
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "u", "mu"])
            for row in zip(self.grid, self.u_values, self.mu_values):
                w.writerow([repr(float(c)) for c in row])
        return path


def build_density_table(spec, t_range=(1e-4, 1e2), nodes=200, mode="auto"):
    grid = np.logspace(math.log10(t_range[0]), math.log10(t_range[1]), nodes)
    return DensityTable(spec, grid, potential_density_u(spec, grid, mode), levy_density_mu(spec, grid, mode))


def zahle_upper_bound(spec, t):
    """(1 - 1/e)^-1 t^-1 psi(1/t) with psi = 1/phi: an upper bound for u."""
    t = _check_t(t)
    return _out(ZAHLE_FACTOR / (t * np.asarray(phi_eval(spec, 1.0 / t))))


def check_mu_doubling(spec, K=1.0, grid=None, tail=None, cap=1e3):
    """sup mu(t)/mu(2t) on (0, K) and sup mu(t)/mu(t+1) on (1, t_max).

    Both suprema must be finite; the returned reports carry ``cap`` as the
    policy bound asserted by the test suite.
    """
    if grid is None:
        grid = np.logspace(-4, math.log10(K), 60, endpoint=False)
    if tail is None:
        tail = np.logspace(0, 2, 40)[1:]
    grid = np.asarray(grid, dtype=float)
    tail = np.asarray(tail, dtype=float)
    near = RatioReport.from_values(
        "e:mu-at-zero", grid, None, levy_density_mu(spec, grid), levy_density_mu(spec, 2 * grid), cap
    )
    far = RatioReport.from_values(
        "e:mu-at-infty", tail, None, levy_density_mu(spec, tail), levy_density_mu(spec, tail + 1), cap
    )
    return near, far


def check_density_asymptotics(spec, t=None, cap=10.0):
    """Spreads of u(t) t phi(1/t) and mu(t) t / phi(1/t) for t in [1e-4, 1]."""
    if t is None:
        t = np.logspace(-4, 0, 81)
    t = np.asarray(t, dtype=float)
    phi_inv = np.asarray(phi_eval(spec, 1.0 / t))
    u = potential_density_u(spec, t)
    mu = levy_density_mu(spec, t)
    rep_u = RatioReport.from_values("e:behofu", t, None, u, 1.0 / (t * phi_inv), cap)
    rep_mu = RatioReport.from_values("e:behofmu", t, None, mu, phi_inv / t, cap)
    return rep_u, rep_mu


def lower_zahle_constant(spec, t):
    """Empirical infimum of u(t) t phi(1/t): the stand-in for the existential lower constant."""
    t = _check_t(t)
    return float(np.min(potential_density_u(spec, t) * t * phi_eval(spec, 1.0 / t)))
