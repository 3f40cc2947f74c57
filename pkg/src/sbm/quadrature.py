"""Double-exponential quadrature helpers.

The integrands in this package are analytic with (integrable) logarithmic
or algebraic endpoint singularities, which is the setting where the
tanh-sinh rule converges geometrically in the number of nodes.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NumericError

T_MAX = 4.5


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def tanh_sinh_nodes(level, t_max=T_MAX):
    """Nodes on (0, 1) for step ``h = 2**-level``.

    Returns ``(left, right, weight)``: distances of each node to 0 and to 1
    (each computed without cancellation) and the quadrature weights.
    """
    h = 2.0**-level
    n = int(math.ceil(t_max / h))
    t = h * np.arange(-n, n + 1)
    z = math.pi * np.sinh(t)
    left = _sigmoid(z)
    right = _sigmoid(-z)
    weight = h * math.pi * np.cosh(t) * left * right
    keep = (left > 0) & (right > 0) & (weight > 0)
    return left[keep], right[keep], weight[keep]


def tanh_sinh(f, a, b, rtol=1e-12, atol=1e-300, min_level=3, max_level=9):
    """Integrate ``f`` over (a, b) by step halving of the tanh-sinh rule.

    ``f(x, dl, dr)`` receives the nodes and their distances to ``a`` and to
    ``b``; it may return an array whose last axis runs over nodes, in which
    case the integral is vectorized over the leading axes.  Convergence is
    declared when two successive levels agree to ``rtol``; otherwise a
    :class:`NumericError` carries the last two iterates.

    Returns ``(value, error_estimate, level)``.
    """
    width = b - a
    prev = older = None
    for level in range(min_level, max_level + 1):
        left, right, w = tanh_sinh_nodes(level)
        dl = width * left
        dr = width * right
        x = a + dl
        vals = np.asarray(f(x, dl, dr), dtype=float)
        cur = width * (vals @ w)
        if prev is not None:
            err = np.abs(cur - prev)
            tol = np.maximum(rtol * np.abs(cur), atol)
            if np.all(err <= tol):
                return cur, err, level
        older, prev = prev, cur
    raise NumericError(
        f"tanh-sinh did not converge to rtol={rtol} by level {max_level}",
        iterates=(older, prev),
    )
