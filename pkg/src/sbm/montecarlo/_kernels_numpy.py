"""Pure-numpy path loops, vectorized over the paths of a chunk.

Uses the same counter layout as the compiled kernels, so both backends
consume identical random streams; only last-bit differences in the
transcendental functions separate them.
"""

from __future__ import annotations

import numpy as np

from . import rng


def _kanter(rho, u1, u2):
    U = np.pi * u1
    E = -np.log(u2)
    logA = (rho / (1.0 - rho)) * np.log(np.sin(rho * U)) + np.log(np.sin((1.0 - rho) * U)) \
        - np.log(np.sin(U)) / (1.0 - rho)
    return np.exp((1.0 - rho) / rho * (logA - np.log(E)))


def _increment(keys, k, fam, dt, rho1, rho2, tilt, retry_cap):
    u = lambda j: rng.uniform(keys, k + np.uint64(j))  # noqa: E731
    if fam == 0:
        return dt ** (1.0 / rho1) * _kanter(rho1, u(0), u(1)), k + np.uint64(2), np.ones(keys.size, int)
    if fam == 2:
        s = dt ** (1.0 / rho1) * _kanter(rho1, u(0), u(1)) + dt ** (1.0 / rho2) * _kanter(rho2, u(2), u(3))
        return s, k + np.uint64(4), np.ones(keys.size, int)
    s = np.empty(keys.size)
    attempts = np.zeros(keys.size, int)
    k = k.copy()
    todo = np.arange(keys.size)
    while todo.size:
        kk, kt = keys[todo], k[todo]
        prop = dt ** (1.0 / rho1) * _kanter(rho1, rng.uniform(kk, kt), rng.uniform(kk, kt + np.uint64(1)))
        acc = rng.uniform(kk, kt + np.uint64(2))
        k[todo] = kt + np.uint64(3)
        attempts[todo] += 1
        done = (acc < np.exp(-tilt * prop)) | (attempts[todo] >= retry_cap)
        s[todo[done]] = prop[done]
        todo = todo[~done]
    return s, k, attempts


def _gauss(keys, k, d):
    out = np.empty((keys.size, d))
    i = 0
    while i < d:
        u1 = rng.uniform(keys, k)
        u2 = rng.uniform(keys, k + np.uint64(1))
        k = k + np.uint64(2)
        r = np.sqrt(-2.0 * np.log(u1))
        out[:, i] = r * np.cos(2.0 * np.pi * u2)
        if i + 1 < d:
            out[:, i + 1] = r * np.sin(2.0 * np.pi * u2)
        i += 2
    return out, k


def _in_annuli(x, c, ri, ro):
    if c.shape[0] == 0:
        return np.zeros(x.shape[0], bool)
    d2 = ((x[:, None, :] - c[None, :, :]) ** 2).sum(-1)
    return np.any((d2 < ro**2) & ((ri == 0.0) | (d2 > ri**2)), axis=1)


def _in_piece(x, piece_c, piece_r):
    return ((x - piece_c) ** 2).sum(-1) < piece_r * piece_r


def _inside(x, dom_c, dom_ri, dom_ro, piece_c, piece_r):
    ok = _in_annuli(x, dom_c, dom_ri, dom_ro)
    if piece_r > 0.0:
        ok &= _in_piece(x, piece_c, piece_r)
    return ok


def run_paths(seed, p0, p1, x0, dt, max_steps, fam, rho1, rho2, tilt, retry_cap,
              dom_c, dom_ri, dom_ro, piece_c, piece_r,
              occ_c, occ_ri, occ_ro, ex_c, ex_ri, ex_ro, need_D, need_piece):
    n_p = p1 - p0
    d = x0.shape[0]
    m = occ_c.shape[0]
    keys = rng.path_keys(seed, np.arange(p0, p1, dtype=np.uint64))
    k = np.zeros(n_p, dtype=np.uint64)
    x = np.tile(x0, (n_p, 1))
    occ = np.zeros((n_p, m))
    steps = np.zeros(n_p, dtype=np.int64)
    max_att = 0
    alive = _inside(x, dom_c, dom_ri, dom_ro, piece_c, piece_r)
    idx = np.nonzero(alive)[0]
    while idx.size:
        xa = x[idx]
        if m:
            d2 = ((xa[:, None, :] - occ_c[None, :, :]) ** 2).sum(-1)
            occ[idx] += dt * ((d2 < occ_ro**2) & (d2 >= occ_ri**2))
        s, kn, att = _increment(keys[idx], k[idx], fam, dt, rho1, rho2, tilt, retry_cap)
        max_att = max(max_att, int(att.max()))
        z, kn = _gauss(keys[idx], kn, d)
        k[idx] = kn
        xa = xa + np.sqrt(2.0 * s)[:, None] * z
        x[idx] = xa
        steps[idx] += 1
        still = _inside(xa, dom_c, dom_ri, dom_ro, piece_c, piece_r)
        alive[idx] = still
        idx = idx[still & (steps[idx] < max_steps)]
    hit = ~alive
    if ex_c.shape[0] > 0:
        hit &= _in_annuli(x, ex_c, ex_ri, ex_ro)
    if need_D >= 0:
        hit &= _in_annuli(x, dom_c, dom_ri, dom_ro) == (need_D == 1)
    if need_piece >= 0 and piece_r > 0.0:
        hit &= _in_piece(x, piece_c, piece_r) == (need_piece == 1)
    tau = steps * dt
    stats = np.array([
        float(hit.sum()), float(tau.sum()), float((tau * tau).sum()),
        float(alive.sum()), float(max_att), float(steps.sum()),
    ])
    return occ.sum(0), (occ * occ).sum(0), stats


def draw_increments(seed, n, fam, dt, rho1, rho2, tilt, retry_cap):
    keys = rng.path_keys(seed, np.arange(n, dtype=np.uint64))
    s, _, _ = _increment(keys, np.zeros(n, dtype=np.uint64), fam, dt, rho1, rho2, tilt, retry_cap)
    return s


def draw_gaussians(seed, n, d):
    keys = rng.path_keys(seed, np.arange(n, dtype=np.uint64))
    z, _ = _gauss(keys, np.zeros(n, dtype=np.uint64), d)
    return z
