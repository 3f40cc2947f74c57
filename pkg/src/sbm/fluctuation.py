"""Ladder-height exponent chi, renewal function V and its density v.

chi is computed from phi by the Fristedt-type integral

    chi(lam) = exp( (1/pi) int_0^inf log phi(lam^2 theta^2) / (1 + theta^2) dtheta ),

which after theta = tan(u) becomes (1/pi) int_0^{pi/2} log phi(lam^2 tan^2 u) du:
a finite interval with integrable logarithmic endpoint singularities.
V and v are then recovered by Laplace inversion of 1/(lam chi) and 1/chi.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import laplace
from .bernstein import log_phi_of_log, phi_eval
from .errors import NumericError, RangeError
from .quadrature import tanh_sinh
from .report import RatioReport

CHI_RTOL = 1e-12
ENVELOPE = math.exp(math.pi / 2.0)


def _as_array(lam):
    lam = np.asarray(lam, dtype=float)
    if np.any(~(lam > 0)):
        from .errors import DomainError

        raise DomainError("lambda must be positive")
    return lam


def log_chi(spec, lam, rtol=CHI_RTOL, return_info=False):
    lam = _as_array(lam)
    shape = lam.shape
    two_log_lam = 2.0 * np.log(lam.ravel())[:, None]

    def integrand(u, dl, dr):
        # tan(u) = sin(dl) / sin(dr) with dl = u, dr = pi/2 - u
        log_tan = np.log(np.sin(dl)) - np.log(np.sin(dr))
        return log_phi_of_log(spec, two_log_lam + 2.0 * log_tan[None, :])

    val, err, level = tanh_sinh(integrand, 0.0, math.pi / 2.0, rtol=rtol, atol=rtol)
    out = (val / math.pi).reshape(shape)
    if return_info:
        return out, {"level": level, "max_abs_change": float(np.max(err) / math.pi)}
    return out


def chi_eval(spec, lam, rtol=CHI_RTOL):
    """Laplace exponent of the ladder-height process, vectorized over lam.

    Raises :class:`NumericError` (with the last two iterates) if successive
    tanh-sinh levels disagree by more than ``rtol``.
    """
    out = np.exp(log_chi(spec, lam, rtol=rtol))
    return float(out) if out.ndim == 0 else out


def renewal_function(spec, t, order=laplace.STEHFEST_ORDER):
    """V(t) by direct Laplace inversion of 1/(lam chi(lam)) (no table)."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    if np.any(pos):
        out[pos] = laplace.invert(lambda lam: 1.0 / (lam * chi_eval(spec, lam)), t[pos], order)
    return float(out) if out.ndim == 0 else out


def renewal_density(spec, t, order=laplace.STEHFEST_ORDER):
    """v(t) by direct Laplace inversion of 1/chi(lam)."""
    t = _as_array(t)
    return laplace.invert(lambda lam: 1.0 / chi_eval(spec, lam), t, order)


@dataclass(frozen=True)
class FluctuationTable:
    """V and v tabulated on a log grid with log-log monotone interpolation."""

    spec: object
    grid: np.ndarray
    V_values: np.ndarray
    v_values: np.ndarray
    inversion: dict
    chi_quadrature: dict
    _V_interp: object = field(repr=False, compare=False, default=None)
    _v_interp: object = field(repr=False, compare=False, default=None)

    @property
    def t_min(self):
        return float(self.grid[0])

    @property
    def t_max(self):
        return float(self.grid[-1])

    def V(self, t):
        return renewal_V(self, t)

    def v(self, t):
        return renewal_v(self, t)

    def to_csv(self, path):
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "V", "v"])
            for row in zip(self.grid, self.V_values, self.v_values):
                w.writerow([repr(float(c)) for c in row])
        return path


# relative size of inversion noise tolerated before a reversal counts
MONOTONE_RTOL = 1e-6


def _check_monotone(values, increasing, what):
    d = np.diff(values) / values[1:]
    bad = d < -MONOTONE_RTOL if increasing else d > MONOTONE_RTOL
    # three consecutive nodes out of order means the inversion broke down
    if np.any(bad[:-1] & bad[1:]):
        i = int(np.argmax(bad[:-1] & bad[1:]))
        raise NumericError(f"{what} not monotone around node {i}", iterates=values[i : i + 3])


def build_fluctuation_table(spec, t_range=(1e-4, 1e2), nodes=200, order=laplace.STEHFEST_ORDER):
    t_min, t_max = t_range
    if not 0 < t_min < t_max:
        raise RangeError("need 0 < t_min < t_max")
    if nodes < 16:
        raise RangeError("need at least 16 nodes")
    grid = np.logspace(math.log10(t_min), math.log10(t_max), nodes)
    lam = laplace.stehfest_nodes(grid, order)
    lchi, info = log_chi(spec, lam, return_info=True)
    chi = np.exp(lchi)
    w = laplace.stehfest_coefficients(order)
    scale = math.log(2.0) / grid
    V = scale * ((1.0 / (lam * chi)) @ w)
    v = scale * ((1.0 / chi) @ w)
    if np.any(V <= 0) or np.any(v <= 0):
        raise NumericError("inversion produced non-positive values")
    _check_monotone(V, True, "V")
    _check_monotone(v, False, "v")
    # isolated single-node wobbles are clamped to the neighbour value
    V = np.maximum.accumulate(V)
    v = np.minimum.accumulate(v)
    logt = np.log(grid)
    V_interp = PchipInterpolator(logt, np.log(V), extrapolate=False)
    v_interp = PchipInterpolator(logt, np.log(v), extrapolate=False)
    return FluctuationTable(
        spec=spec,
        grid=grid,
        V_values=V,
        v_values=v,
        inversion={"method": "gaver-stehfest", "order": order},
        chi_quadrature={"method": "tanh-sinh", **info, "rtol": CHI_RTOL},
        _V_interp=V_interp,
        _v_interp=v_interp,
    )


def _sqrt_phi_ratio(spec, t_anchor, t):
    """sqrt(phi(t_anchor^-2) / phi(t^-2)): the V scaling between two times."""
    return np.sqrt(phi_eval(spec, t_anchor**-2.0) / phi_eval(spec, t**-2.0))


def renewal_V(table, t):
    """V(t) from the table; below t_min the V ~ phi(t^-2)^(-1/2) law is used."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise RangeError("t must be non-negative")
    if np.any(t > table.t_max * (1 + 1e-12)):
        raise RangeError(f"t beyond table range {table.t_max}")
    t = np.minimum(t, table.t_max)
    out = np.zeros_like(t)
    inside = t >= table.t_min
    out[inside] = np.exp(table._V_interp(np.log(t[inside])))
    below = (t > 0) & ~inside
    if np.any(below):
        out[below] = table.V_values[0] * _sqrt_phi_ratio(table.spec, table.t_min, t[below])
    return float(out) if out.ndim == 0 else out


def renewal_v(table, t):
    """v(t) from the table; below t_min v ~ t^-1 phi(t^-2)^(-1/2)."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise RangeError("t must be positive")
    if np.any(t > table.t_max * (1 + 1e-12)):
        raise RangeError(f"t beyond table range {table.t_max}")
    t = np.minimum(t, table.t_max)
    out = np.empty_like(t)
    inside = t >= table.t_min
    out[inside] = np.exp(table._v_interp(np.log(t[inside])))
    below = ~inside
    if np.any(below):
        tb = t[below]
        out[below] = table.v_values[0] * (table.t_min / tb) * _sqrt_phi_ratio(table.spec, table.t_min, tb)
    return float(out) if out.ndim == 0 else out


def check_chi_phi_envelope(spec, grid, raise_on_violation=False):
    """chi(lam) / sqrt(phi(lam^2)) must lie in [e^-pi/2, e^pi/2] for all lam."""
    grid = _as_array(grid).ravel()
    lhs = np.asarray(chi_eval(spec, grid))
    rhs = np.sqrt(np.asarray(phi_eval(spec, grid**2)))
    report = RatioReport.from_values("e:chi-and-phi", grid, None, lhs, rhs, cap=ENVELOPE**2)
    ratio = report.ratios
    bad = (ratio < 1.0 / ENVELOPE) | (ratio > ENVELOPE) | ~np.isfinite(ratio)
    report.passed = bool(not np.any(bad))
    report.meta["envelope"] = [1.0 / ENVELOPE, ENVELOPE]
    report.meta["violations"] = grid[bad].tolist()
    if raise_on_violation and np.any(bad):
        raise NumericError(f"chi/sqrt(phi) outside envelope at lambda={grid[bad].tolist()}")
    return report


def check_renewal_asymptotics(table, t_hi=1.0, cap=10.0):
    """Spread of V(t) sqrt(phi(t^-2)) and v(t) t sqrt(phi(t^-2)) on [t_min, t_hi]."""
    t = table.grid[table.grid <= t_hi]
    root_phi = np.sqrt(np.asarray(phi_eval(table.spec, t**-2.0)))
    V = table.V_values[: t.size]
    v = table.v_values[: t.size]
    rep_V = RatioReport.from_values("e:behofV", t, None, V, 1.0 / root_phi, cap)
    rep_v = RatioReport.from_values("e:behofv", t, None, v, 1.0 / (t * root_phi), cap)
    return rep_V, rep_v
