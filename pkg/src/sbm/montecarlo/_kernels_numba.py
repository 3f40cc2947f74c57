"""Compiled path loops.  Mirrors the numpy fallback draw for draw."""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_ONE = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0


@njit(cache=True)
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def _key(seed, path):
    return _mix(_mix(seed + _GAMMA) + path * _GAMMA)


@njit(cache=True)
def _uniform(key, k):
    z = _mix(key + (k + _ONE) * _GAMMA)
    return (float(z >> np.uint64(11)) + 0.5) * _INV53


@njit(cache=True)
def _kanter(rho, u1, u2):
    # positive stable variate with Laplace transform exp(-lam^rho)
    U = math.pi * u1
    E = -math.log(u2)
    logA = (rho / (1.0 - rho)) * math.log(math.sin(rho * U)) + math.log(math.sin((1.0 - rho) * U)) \
        - math.log(math.sin(U)) / (1.0 - rho)
    return math.exp((1.0 - rho) / rho * (logA - math.log(E)))


@njit(cache=True)
def _increment(key, k, fam, dt, rho1, rho2, tilt, retry_cap):
    """One subordinator increment; returns (dS, new counter, attempts)."""
    if fam == 0:
        s = dt ** (1.0 / rho1) * _kanter(rho1, _uniform(key, k), _uniform(key, k + _ONE))
        return s, k + np.uint64(2), 1
    if fam == 2:
        s = dt ** (1.0 / rho1) * _kanter(rho1, _uniform(key, k), _uniform(key, k + _ONE))
        s += dt ** (1.0 / rho2) * _kanter(rho2, _uniform(key, k + np.uint64(2)), _uniform(key, k + np.uint64(3)))
        return s, k + np.uint64(4), 1
    attempts = 0
    while True:
        attempts += 1
        s = dt ** (1.0 / rho1) * _kanter(rho1, _uniform(key, k), _uniform(key, k + _ONE))
        u = _uniform(key, k + np.uint64(2))
        k = k + np.uint64(3)
        if u < math.exp(-tilt * s) or attempts >= retry_cap:
            return s, k, attempts


@njit(cache=True)
def _gauss(key, k, d, out):
    """Fill out[:d] with standard normals by Box-Muller; returns the new counter."""
    i = 0
    while i < d:
        u1 = _uniform(key, k)
        u2 = _uniform(key, k + _ONE)
        k = k + np.uint64(2)
        r = math.sqrt(-2.0 * math.log(u1))
        out[i] = r * math.cos(2.0 * math.pi * u2)
        if i + 1 < d:
            out[i + 1] = r * math.sin(2.0 * math.pi * u2)
        i += 2
    return k


@njit(cache=True)
def _in_annuli(x, c, ri, ro):
    d = x.shape[0]
    for p in range(c.shape[0]):
        d2 = 0.0
        for i in range(d):
            t = x[i] - c[p, i]
            d2 += t * t
        if d2 < ro[p] * ro[p] and (ri[p] == 0.0 or d2 > ri[p] * ri[p]):
            return True
    return False


@njit(cache=True)
def _inside(x, dom_c, dom_ri, dom_ro, piece_c, piece_r):
    if not _in_annuli(x, dom_c, dom_ri, dom_ro):
        return False
    if piece_r > 0.0:
        d2 = 0.0
        for i in range(x.shape[0]):
            t = x[i] - piece_c[i]
            d2 += t * t
        return d2 < piece_r * piece_r
    return True


@njit(cache=True)
def run_paths(seed, p0, p1, x0, dt, max_steps, fam, rho1, rho2, tilt, retry_cap,
              dom_c, dom_ri, dom_ro, piece_c, piece_r,
              occ_c, occ_ri, occ_ro, ex_c, ex_ri, ex_ro, need_D, need_piece):
    d = x0.shape[0]
    m = occ_c.shape[0]
    occ_sum = np.zeros(m)
    occ_sq = np.zeros(m)
    # hit_sum, tau_sum, tau_sq, n_truncated, max_attempts, steps
    stats = np.zeros(6)
    occ = np.zeros(m)
    x = np.empty(d)
    z = np.empty(d + 1)
    for p in range(p0, p1):
        key = _key(seed, np.uint64(p))
        k = np.uint64(0)
        for i in range(d):
            x[i] = x0[i]
        occ[:] = 0.0
        n = 0
        alive = _inside(x, dom_c, dom_ri, dom_ro, piece_c, piece_r)
        while alive and n < max_steps:
            for j in range(m):
                d2 = 0.0
                for i in range(d):
                    t = x[i] - occ_c[j, i]
                    d2 += t * t
                if d2 < occ_ro[j] * occ_ro[j] and d2 >= occ_ri[j] * occ_ri[j]:
                    occ[j] += dt
            s, k, att = _increment(key, k, fam, dt, rho1, rho2, tilt, retry_cap)
            if att > stats[4]:
                stats[4] = att
            k = _gauss(key, k, d, z)
            sd = math.sqrt(2.0 * s)
            for i in range(d):
                x[i] += sd * z[i]
            n += 1
            alive = _inside(x, dom_c, dom_ri, dom_ro, piece_c, piece_r)
        stats[5] += n
        if alive:
            stats[3] += 1.0
            hit = 0.0
        else:
            hit = 1.0
            if ex_c.shape[0] > 0 and not _in_annuli(x, ex_c, ex_ri, ex_ro):
                hit = 0.0
            if need_D >= 0 and _in_annuli(x, dom_c, dom_ri, dom_ro) != (need_D == 1):
                hit = 0.0
            if need_piece >= 0 and piece_r > 0.0:
                d2 = 0.0
                for i in range(d):
                    t = x[i] - piece_c[i]
                    d2 += t * t
                if (d2 < piece_r * piece_r) != (need_piece == 1):
                    hit = 0.0
        tau = n * dt
        stats[0] += hit
        stats[1] += tau
        stats[2] += tau * tau
        for j in range(m):
            occ_sum[j] += occ[j]
            occ_sq[j] += occ[j] * occ[j]
    return occ_sum, occ_sq, stats


@njit(cache=True)
def draw_increments(seed, n, fam, dt, rho1, rho2, tilt, retry_cap):
    out = np.empty(n)
    for p in range(n):
        key = _key(seed, np.uint64(p))
        s, k, att = _increment(key, np.uint64(0), fam, dt, rho1, rho2, tilt, retry_cap)
        out[p] = s
    return out


@njit(cache=True)
def draw_gaussians(seed, n, d):
    out = np.empty((n, d))
    z = np.empty(d + 1)
    for p in range(n):
        key = _key(seed, np.uint64(p))
        _gauss(key, np.uint64(0), d, z)
        for i in range(d):
            out[p, i] = z[i]
    return out
