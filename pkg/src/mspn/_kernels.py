"""Hot numeric loops, JIT-compiled with numba when available.

Setting the environment variable ``MSPN_NO_NUMBA`` (to any non-empty
value) before import forces the pure-numpy fallbacks. ``NUMBA_ENABLED``
reports which path is active. Both paths implement the same arithmetic
in the same order, so results agree; ``benchmarks/bench_kernels.py``
times them against each other and checks that agreement.
"""

from __future__ import annotations

import os

import numpy as np

NUMBA_ENABLED = not os.environ.get("MSPN_NO_NUMBA", "")

if NUMBA_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a hard dependency
        NUMBA_ENABLED = False


def _pava_impl(values, weights):
    # pool-adjacent-violators for a weighted least-squares nondecreasing fit;
    # merged blocks take the weighted mean of their members
    n = values.shape[0]
    level = np.empty(n)
    weight = np.empty(n)
    size = np.empty(n, dtype=np.int64)
    nb = 0
    for i in range(n):
        level[nb] = values[i]
        weight[nb] = weights[i]
        size[nb] = 1
        nb += 1
        while nb > 1 and level[nb - 2] > level[nb - 1]:
            tot = weight[nb - 2] + weight[nb - 1]
            level[nb - 2] = (
                weight[nb - 2] * level[nb - 2] + weight[nb - 1] * level[nb - 1]
            ) / tot
            weight[nb - 2] = tot
            size[nb - 2] += size[nb - 1]
            nb -= 1
    out = np.empty(n)
    pos = 0
    for b in range(nb):
        for _ in range(size[b]):
            out[pos] = level[b]
            pos += 1
    return out


def _dp_fill_impl(seg_ll):
    # seg_ll[q, p-1] holds the log-likelihood of one bin spanning boundary q
    # to boundary p; fill f[p, j] = best score splitting boundaries 0..p into
    # j bins, with back[p, j] the start boundary of the last bin
    n_bounds = seg_ll.shape[0]
    f = np.full((n_bounds + 1, n_bounds + 1), -np.inf)
    back = np.zeros((n_bounds + 1, n_bounds + 1), dtype=np.int64)
    f[0, 0] = 0.0
    for j in range(1, n_bounds + 1):
        for p in range(j, n_bounds + 1):
            best = -np.inf
            arg = j - 1
            for q in range(j - 1, p):
                v = f[q, j - 1] + seg_ll[q, p - 1]
                if v > best:
                    best = v
                    arg = q
            f[p, j] = best
            back[p, j] = arg
    return f, back


def _dp_fill_numpy(seg_ll):
    n_bounds = seg_ll.shape[0]
    f = np.full((n_bounds + 1, n_bounds + 1), -np.inf)
    back = np.zeros((n_bounds + 1, n_bounds + 1), dtype=np.int64)
    f[0, 0] = 0.0
    for j in range(1, n_bounds + 1):
        for p in range(j, n_bounds + 1):
            cand = f[j - 1 : p, j - 1] + seg_ll[j - 1 : p, p - 1]
            a = int(np.argmax(cand))
            f[p, j] = cand[a]
            back[p, j] = a + j - 1
    return f, back


def _lloyd_impl(points, centroids, max_iter, tol):
    m, d = points.shape
    k = centroids.shape[0]
    cent = centroids.copy()
    labels = np.zeros(m, dtype=np.int64)
    for _ in range(max_iter):
        for i in range(m):
            best = 0
            best_d = np.inf
            for c in range(k):
                acc = 0.0
                for t in range(d):
                    diff = points[i, t] - cent[c, t]
                    acc += diff * diff
                if acc < best_d:
                    best_d = acc
                    best = c
            labels[i] = best
        new_cent = np.zeros((k, d))
        counts = np.zeros(k)
        for i in range(m):
            c = labels[i]
            counts[c] += 1.0
            for t in range(d):
                new_cent[c, t] += points[i, t]
        shift = 0.0
        for c in range(k):
            if counts[c] > 0.0:
                acc = 0.0
                for t in range(d):
                    new_cent[c, t] /= counts[c]
                    diff = new_cent[c, t] - cent[c, t]
                    acc += diff * diff
                if acc > shift:
                    shift = acc
            else:
                for t in range(d):
                    new_cent[c, t] = cent[c, t]
        cent = new_cent
        if np.sqrt(shift) < tol:
            break
    for i in range(m):
        best = 0
        best_d = np.inf
        for c in range(k):
            acc = 0.0
            for t in range(d):
                diff = points[i, t] - cent[c, t]
                acc += diff * diff
            if acc < best_d:
                best_d = acc
                best = c
        labels[i] = best
    return labels


def _lloyd_numpy(points, centroids, max_iter, tol):
    cent = centroids.copy()
    for _ in range(max_iter):
        d2 = ((points[:, None, :] - cent[None, :, :]) ** 2).sum(axis=2)
        labels = np.argmin(d2, axis=1)
        new_cent = cent.copy()
        shift = 0.0
        for c in range(cent.shape[0]):
            member = labels == c
            if member.any():
                new_cent[c] = points[member].sum(axis=0) / member.sum()
                shift = max(shift, float(((new_cent[c] - cent[c]) ** 2).sum()))
        cent = new_cent
        if np.sqrt(shift) < tol:
            break
    d2 = ((points[:, None, :] - cent[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)


if NUMBA_ENABLED:
    pava_nondecreasing = njit(cache=True)(_pava_impl)
    dp_fill = njit(cache=True)(_dp_fill_impl)
    lloyd = njit(cache=True)(_lloyd_impl)
else:
    pava_nondecreasing = _pava_impl
    dp_fill = _dp_fill_numpy
    lloyd = _lloyd_numpy
