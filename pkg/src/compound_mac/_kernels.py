"""Compiled hot path for the policy search.

Evaluates the worst-state bounds ``(a, b, c, d)`` straight from a logit
vector.  The numpy implementation in :mod:`compound_mac.regions` is the
reference; the test suite checks that both agree.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

_TINY = 1e-15


@njit(cache=True)
def _softmax_into(theta, start, groups, width, out):
    # each group has width-1 free logits followed by an implicit zero
    k = start
    for g in range(groups):
        m = 0.0
        for i in range(width - 1):
            if theta[k + i] > m:
                m = theta[k + i]
        s = 0.0
        for i in range(width - 1):
            e = math.exp(theta[k + i] - m)
            out[g * width + i] = e
            s += e
        e = math.exp(-m)
        out[g * width + width - 1] = e
        s += e
        for i in range(width):
            out[g * width + i] /= s
        k += width - 1
    return k


@njit(cache=True)
def _plogp(p):
    return -p * math.log2(p) if p > _TINY else 0.0


@njit(cache=True)
def theta_bounds(theta, u, n1, n2, idx1, idx2, w, row_entropy):
    """Worst-state ``(a, b, c, d)`` for the policy encoded by ``theta``."""
    s_count, xs, ys, zs = w.shape
    p0 = np.empty(u)
    k1 = np.empty(n1 * u * xs)
    k2 = np.empty(n2 * u * ys)
    k = _softmax_into(theta, 0, 1, u, p0)
    k = _softmax_into(theta, k, n1 * u, xs, k1)
    _softmax_into(theta, k, n2 * u, ys, k2)

    best = np.full(4, np.inf)
    z_xu = np.empty(zs)
    z_yu = np.empty(zs)
    z_u = np.empty(zs)
    z = np.empty(zs)
    for s in range(s_count):
        o1 = idx1[s] * u * xs
        o2 = idx2[s] * u * ys
        h_xyu = 0.0
        h_xu = 0.0
        h_yu = 0.0
        h_u = 0.0
        for j in range(zs):
            z[j] = 0.0
        for a in range(u):
            pu = p0[a]
            for j in range(zs):
                z_u[j] = 0.0
            for x in range(xs):
                px = k1[o1 + a * xs + x]
                for j in range(zs):
                    z_xu[j] = 0.0
                for y in range(ys):
                    py = k2[o2 + a * ys + y]
                    h_xyu += pu * px * py * row_entropy[s, x, y]
                    for j in range(zs):
                        z_xu[j] += py * w[s, x, y, j]
                hx = 0.0
                for j in range(zs):
                    hx += _plogp(z_xu[j])
                    z_u[j] += px * z_xu[j]
                h_xu += pu * px * hx
            for y in range(ys):
                py = k2[o2 + a * ys + y]
                for j in range(zs):
                    acc = 0.0
                    for x in range(xs):
                        acc += k1[o1 + a * xs + x] * w[s, x, y, j]
                    z_yu[j] = acc
                hy = 0.0
                for j in range(zs):
                    hy += _plogp(z_yu[j])
                h_yu += pu * py * hy
            hu = 0.0
            for j in range(zs):
                hu += _plogp(z_u[j])
                z[j] += pu * z_u[j]
            h_u += pu * hu
        h_z = 0.0
        for j in range(zs):
            h_z += _plogp(z[j])
        vals = (h_yu - h_xyu, h_xu - h_xyu, h_u - h_xyu, h_z - h_xyu)
        for i in range(4):
            v = max(vals[i], 0.0)
            if v < best[i]:
                best[i] = v
    return best


@njit(cache=True)
def support(raw, cm, c1, c2, w):
    """Support value of one policy polytope (see ``RatePolytope.maximizer``)."""
    a, b, c, d = raw[0], raw[1], raw[2], raw[3]
    if cm:
        s = min(c, d)
        base = w[0] * d
        w1 = max(w[1] - w[0], 0.0)
        w2 = max(w[2] - w[0], 0.0)
    else:
        a += c1
        b += c2
        s = min(c + c1 + c2, d)
        base = 0.0
        w1 = w[0]
        w2 = w[1]
    a = min(a, s)
    b = min(b, s)
    v = max(0.0, w1 * a, w2 * b)
    v = max(v, w1 * a + w2 * min(b, s - a))
    v = max(v, w1 * min(a, s - b) + w2 * b)
    return base + v
