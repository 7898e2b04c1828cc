"""WFG1-9 test problems (Huband, Hingston, Barone and While).

The native WFG domain is ``z_i in [0, 2i]``; the first step of every problem
divides by the upper bound, so a unit-cube input ``x`` is exactly the
normalised ``y = z / z_max`` the transformations start from.

Position variables are split into ``M - 1`` groups with boundaries
``floor(i * k / (M - 1))``, which reproduces the usual equal-width groups
when ``k`` is divisible by ``M - 1`` and still covers every position
variable otherwise. WFG2/3 pair up the distance variables; with an odd
``l`` the final unpaired variable is ignored.
"""

from __future__ import annotations

import numpy as np

def _correct(y):
    return np.clip(y, 0.0, 1.0)


# ------------------------------------------------------------------ transformations


def s_linear(y, A):
    return _correct(np.abs(y - A) / np.abs(np.floor(A - y) + A))


def s_deceptive(y, A, B, C):
    t1 = np.floor(y - A + B) * (1.0 - C + (A - B) / B) / (A - B)
    t2 = np.floor(A + B - y) * (1.0 - C + (1.0 - A - B) / B) / (1.0 - A - B)
    return _correct(1.0 + (np.abs(y - A) - B) * (t1 + t2 + 1.0 / B))


def s_multi(y, A, B, C):
    t = np.abs(y - C) / (2.0 * (np.floor(C - y) + C))
    return _correct((1.0 + np.cos((4.0 * A + 2.0) * np.pi * (0.5 - t)) + 4.0 * B * t**2) / (B + 2.0))


def b_poly(y, alpha):
    return _correct(y**alpha)


def b_flat(y, A, B, C):
    t1 = np.minimum(0.0, np.floor(y - B)) * A * (B - y) / B
    t2 = np.minimum(0.0, np.floor(C - y)) * (1.0 - A) * (y - C) / (1.0 - C)
    return _correct(A + t1 - t2)


def b_param(y, u, A, B, C):
    v = A - (1.0 - 2.0 * u) * np.abs(np.floor(0.5 - u) + A)
    return _correct(y ** (B + (C - B) * v))


def r_sum(y, w):
    w = np.asarray(w, dtype=float)
    return _correct(y @ w / w.sum())


def r_nonsep(y, A):
    n = y.shape[1]
    total = np.zeros(len(y))
    for j in range(n):
        total += y[:, j]
        for k in range(A - 1):
            total += np.abs(y[:, j] - y[:, (1 + j + k) % n])
    denom = n / A * np.ceil(A / 2.0) * (1.0 + 2.0 * A - 2.0 * np.ceil(A / 2.0))
    return _correct(total / denom)


# ------------------------------------------------------------------ shapes


def _shape_linear(x, m, n_obj):
    M = n_obj
    if m == 1:
        return np.prod(x[:, : M - 1], axis=1)
    if m < M:
        return np.prod(x[:, : M - m], axis=1) * (1.0 - x[:, M - m])
    return 1.0 - x[:, 0]


def _shape_convex(x, m, n_obj):
    M = n_obj
    c = 1.0 - np.cos(x * np.pi / 2)
    if m == 1:
        return np.prod(c[:, : M - 1], axis=1)
    if m < M:
        return np.prod(c[:, : M - m], axis=1) * (1.0 - np.sin(x[:, M - m] * np.pi / 2))
    return 1.0 - np.sin(x[:, 0] * np.pi / 2)


def _shape_concave(x, m, n_obj):
    M = n_obj
    s = np.sin(x * np.pi / 2)
    if m == 1:
        return np.prod(s[:, : M - 1], axis=1)
    if m < M:
        return np.prod(s[:, : M - m], axis=1) * np.cos(x[:, M - m] * np.pi / 2)
    return np.cos(x[:, 0] * np.pi / 2)


def _shape_mixed(x0, alpha=1.0, A=5.0):
    t = 2.0 * A * np.pi
    return (1.0 - x0 - np.cos(t * x0 + np.pi / 2) / t) ** alpha


def _shape_disc(x0, alpha=1.0, beta=1.0, A=5.0):
    return 1.0 - x0**alpha * np.cos(A * x0**beta * np.pi) ** 2


# ------------------------------------------------------------------ helpers


def _groups(k, n_obj):
    return [((i * k) // (n_obj - 1), ((i + 1) * k) // (n_obj - 1)) for i in range(n_obj - 1)]


def _reduce_sum(y, k, n_obj, weights=None):
    n = y.shape[1]
    w = np.ones(n) if weights is None else weights
    cols = [r_sum(y[:, a:b], w[a:b]) for a, b in _groups(k, n_obj)]
    cols.append(r_sum(y[:, k:], w[k:n]))
    return np.column_stack(cols)


def _reduce_nonsep(y, k, n_obj):
    cols = [r_nonsep(y[:, a:b], b - a) for a, b in _groups(k, n_obj)]
    cols.append(r_nonsep(y[:, k:], y.shape[1] - k))
    return np.column_stack(cols)


def _objectives(t, n_obj, shape, degenerate=False, last=None):
    A = np.ones(n_obj - 1)
    if degenerate:
        A[1:] = 0.0
    xM = t[:, -1]
    x = np.column_stack([np.maximum(xM, A[i]) * (t[:, i] - 0.5) + 0.5 for i in range(n_obj - 1)])
    F = np.empty((len(t), n_obj))
    for m in range(1, n_obj + 1):
        if m == n_obj and last is not None:
            h = last(x[:, 0])
        else:
            h = shape(x, m, n_obj)
        F[:, m - 1] = xM + 2.0 * m * h
    return F


def _nonsep_pairs(y, k):
    l = y.shape[1] - k
    cols = [y[:, :k]]
    for i in range(l // 2):
        cols.append(r_nonsep(y[:, k + 2 * i: k + 2 * i + 2], 2)[:, None])
    return np.hstack(cols)


# ------------------------------------------------------------------ problems


def wfg1(y, n_obj, k):
    y = y.copy()
    y[:, k:] = s_linear(y[:, k:], 0.35)
    y[:, k:] = b_flat(y[:, k:], 0.8, 0.75, 0.85)
    y = b_poly(y, 0.02)
    t = _reduce_sum(y, k, n_obj, weights=2.0 * np.arange(1, y.shape[1] + 1))
    return _objectives(t, n_obj, _shape_convex, last=_shape_mixed)


def wfg2(y, n_obj, k):
    y = y.copy()
    y[:, k:] = s_linear(y[:, k:], 0.35)
    y = _nonsep_pairs(y, k)
    t = _reduce_sum(y, k, n_obj)
    return _objectives(t, n_obj, _shape_convex, last=_shape_disc)


def wfg3(y, n_obj, k):
    y = y.copy()
    y[:, k:] = s_linear(y[:, k:], 0.35)
    y = _nonsep_pairs(y, k)
    t = _reduce_sum(y, k, n_obj)
    return _objectives(t, n_obj, _shape_linear, degenerate=True)


def wfg4(y, n_obj, k):
    y = s_multi(y, 30.0, 10.0, 0.35)
    return _objectives(_reduce_sum(y, k, n_obj), n_obj, _shape_concave)


def wfg5(y, n_obj, k):
    y = s_deceptive(y, 0.35, 0.001, 0.05)
    return _objectives(_reduce_sum(y, k, n_obj), n_obj, _shape_concave)


def wfg6(y, n_obj, k):
    y = y.copy()
    y[:, k:] = s_linear(y[:, k:], 0.35)
    return _objectives(_reduce_nonsep(y, k, n_obj), n_obj, _shape_concave)


_BP = (0.98 / 49.98, 0.02, 50.0)


def wfg7(y, n_obj, k):
    y = y.copy()
    n = y.shape[1]
    for i in range(k):
        u = r_sum(y[:, i + 1:], np.ones(n - i - 1))
        y[:, i] = b_param(y[:, i], u, *_BP)
    y[:, k:] = s_linear(y[:, k:], 0.35)
    return _objectives(_reduce_sum(y, k, n_obj), n_obj, _shape_concave)


def wfg8(y, n_obj, k):
    y = y.copy()
    n = y.shape[1]
    orig = y.copy()
    for i in range(k, n):
        u = r_sum(orig[:, :i], np.ones(i))
        y[:, i] = b_param(orig[:, i], u, *_BP)
    y[:, k:] = s_linear(y[:, k:], 0.35)
    return _objectives(_reduce_sum(y, k, n_obj), n_obj, _shape_concave)


def wfg9(y, n_obj, k):
    y = y.copy()
    n = y.shape[1]
    orig = y.copy()
    for i in range(n - 1):
        u = r_sum(orig[:, i + 1:], np.ones(n - i - 1))
        y[:, i] = b_param(orig[:, i], u, *_BP)
    y[:, :k] = s_deceptive(y[:, :k], 0.35, 0.001, 0.05)
    y[:, k:] = s_multi(y[:, k:], 30.0, 95.0, 0.35)
    return _objectives(_reduce_nonsep(y, k, n_obj), n_obj, _shape_concave)


WFG = {1: wfg1, 2: wfg2, 3: wfg3, 4: wfg4, 5: wfg5, 6: wfg6, 7: wfg7, 8: wfg8, 9: wfg9}
