"""Shared numerical kernels: embedded Runge-Kutta 5(4), finite-difference
weights on arbitrary nodes, and Chebyshev-type grids with barycentric
evaluation.

The integrator is a plain Dormand-Prince pair working on (possibly complex)
numpy vectors; it propagates the 5th-order solution and controls the step
with the embedded 4th-order error estimate.
"""

from __future__ import annotations

import numpy as np

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = (
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
)
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
                187 / 2100, 1 / 40])


def rk45(f, t0, y0, t1, rtol=1e-11, atol=1e-12, max_steps=1_000_000, h0=None):
    """Integrate dy/dt = f(t, y) from t0 to t1, returning y(t1).

    Works for real or complex state vectors; t may run backwards.
    """
    y = np.array(y0, copy=True)
    t = float(t0)
    t1 = float(t1)
    if t1 == t:
        return y
    direction = 1.0 if t1 > t else -1.0
    span = abs(t1 - t)
    h = direction * (h0 if h0 is not None else min(1e-2 * span, 1e-3))
    k1 = np.asarray(f(t, y))
    steps = 0
    while (t1 - t) * direction > 0:
        steps += 1
        if steps > max_steps:
            raise RuntimeError(f"rk45: step limit exceeded at t={t}")
        if (t + h - t1) * direction > 0:
            h = t1 - t
        ks = [k1]
        for i in range(1, 7):
            yi = y + h * sum(a * k for a, k in zip(_A[i], ks))
            ks.append(np.asarray(f(t + _C[i] * h, yi)))
        y5 = y + h * sum(b * k for b, k in zip(_B5, ks) if b != 0.0)
        err_vec = h * sum((b5 - b4) * k for b5, b4, k in zip(_B5, _B4, ks))
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
        err = float(np.sqrt(np.mean(np.abs(err_vec / scale) ** 2))) + 1e-300
        if err <= 1.0:
            t = t1 if abs(t + h - t1) < 1e-15 * span else t + h
            y = y5
            k1 = ks[6]  # FSAL
        h *= min(5.0, max(0.2, 0.9 * err ** -0.2))
    return y


def rk45_path(f, ts, y0, rtol=1e-11, atol=1e-12):
    """Integrate through the node sequence ts, returning y at every node."""
    out = [np.array(y0, copy=True)]
    for a, b in zip(ts[:-1], ts[1:]):
        out.append(rk45(f, a, out[-1], b, rtol=rtol, atol=atol))
    return out


def fd_weights(nodes, x0, order):
    """Fornberg weights for the `order`-th derivative at x0 over `nodes`."""
    nodes = np.asarray(nodes)
    n = len(nodes)
    w = np.zeros((order + 1, n), dtype=nodes.dtype)
    w[0, 0] = 1.0
    c1 = 1.0
    c4 = nodes[0] - x0
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = nodes[i] - x0
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    w[k, i] = c1 * (k * w[k - 1, i - 1] - c5 * w[k, i - 1]) / c2
                w[0, i] = -c1 * c5 * w[0, i - 1] / c2
            for k in range(mn, 0, -1):
                w[k, j] = (c4 * w[k, j] - k * w[k - 1, j]) / c3
            w[0, j] = c4 * w[0, j] / c3
        c1 = c2
    return w[order]


def stencil5(xs, k):
    """Index window for a 5-point stencil centred as well as possible on k."""
    n = len(xs)
    lo = min(max(k - 2, 0), n - 5)
    return slice(lo, lo + 5)


def cos_nodes(a, b, n):
    """n nodes on [a, b] with Chebyshev-like clustering toward both ends."""
    k = np.arange(n)
    return a + (b - a) * (1.0 - np.cos(np.pi * k / (n - 1))) / 2.0


def barycentric(nodes, values, t):
    """Barycentric interpolation on cos_nodes grids (weights (-1)^k, halved ends).

    `values` has shape (m, n); returns shape (m,) at scalar t.
    """
    nodes = np.asarray(nodes)
    n = len(nodes)
    w = np.ones(n)
    w[1::2] = -1.0
    w[0] *= 0.5
    w[-1] *= 0.5
    d = t - nodes
    hit = np.nonzero(np.abs(d) < 1e-15)[0]
    if hit.size:
        return np.asarray(values)[:, hit[0]]
    q = w / d
    return np.asarray(values) @ q / np.sum(q)
