"""DTLZ1-7 test problems (Deb, Thiele, Laumanns and Zitzler).

All functions take a ``(n, d)`` array in the unit cube (the native DTLZ
domain) and return an ``(n, M)`` array of objectives to minimise.
"""

from __future__ import annotations

import numpy as np


def _g_rastrigin(xm):
    k = xm.shape[1]
    return 100.0 * (k + np.sum((xm - 0.5) ** 2 - np.cos(20.0 * np.pi * (xm - 0.5)), axis=1))


def _g_sphere(xm):
    return np.sum((xm - 0.5) ** 2, axis=1)


def _linear_front(xp, g, n_obj):
    n = len(g)
    F = np.empty((n, n_obj))
    for i in range(n_obj):
        f = 0.5 * (1.0 + g)
        f = f * np.prod(xp[:, : n_obj - 1 - i], axis=1)
        if i > 0:
            f = f * (1.0 - xp[:, n_obj - 1 - i])
        F[:, i] = f
    return F


def _spherical_front(theta, g, n_obj):
    # theta are angles in [0, pi/2]
    n = len(g)
    F = np.empty((n, n_obj))
    for i in range(n_obj):
        f = 1.0 + g
        f = f * np.prod(np.cos(theta[:, : n_obj - 1 - i]), axis=1)
        if i > 0:
            f = f * np.sin(theta[:, n_obj - 1 - i])
        F[:, i] = f
    return F


def dtlz1(X, n_obj):
    xp, xm = X[:, : n_obj - 1], X[:, n_obj - 1 :]
    return _linear_front(xp, _g_rastrigin(xm), n_obj)


def dtlz2(X, n_obj):
    xp, xm = X[:, : n_obj - 1], X[:, n_obj - 1 :]
    return _spherical_front(xp * np.pi / 2, _g_sphere(xm), n_obj)


def dtlz3(X, n_obj):
    xp, xm = X[:, : n_obj - 1], X[:, n_obj - 1 :]
    return _spherical_front(xp * np.pi / 2, _g_rastrigin(xm), n_obj)


def dtlz4(X, n_obj, alpha=100.0):
    xp, xm = X[:, : n_obj - 1], X[:, n_obj - 1 :]
    return _spherical_front(xp**alpha * np.pi / 2, _g_sphere(xm), n_obj)


def _degenerate_angles(xp, g):
    theta = np.empty_like(xp)
    theta[:, 0] = xp[:, 0] * np.pi / 2
    if xp.shape[1] > 1:
        gg = g[:, None]
        theta[:, 1:] = np.pi / (4.0 * (1.0 + gg)) * (1.0 + 2.0 * gg * xp[:, 1:])
    return theta


def dtlz5(X, n_obj):
    xp, xm = X[:, : n_obj - 1], X[:, n_obj - 1 :]
    g = _g_sphere(xm)
    return _spherical_front(_degenerate_angles(xp, g), g, n_obj)


def dtlz6(X, n_obj):
    xp, xm = X[:, : n_obj - 1], X[:, n_obj - 1 :]
    g = np.sum(xm**0.1, axis=1)
    return _spherical_front(_degenerate_angles(xp, g), g, n_obj)


def dtlz7(X, n_obj):
    xp, xm = X[:, : n_obj - 1], X[:, n_obj - 1 :]
    g = 1.0 + 9.0 / xm.shape[1] * np.sum(xm, axis=1)
    h = n_obj - np.sum(xp / (1.0 + g[:, None]) * (1.0 + np.sin(3.0 * np.pi * xp)), axis=1)
    return np.column_stack([xp, (1.0 + g) * h])


DTLZ = {1: dtlz1, 2: dtlz2, 3: dtlz3, 4: dtlz4, 5: dtlz5, 6: dtlz6, 7: dtlz7}
