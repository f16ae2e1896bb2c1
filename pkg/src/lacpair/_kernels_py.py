"""Pure-Python/numpy implementations of the hot kernels.

Every function here has a twin in ``_kernels.pyx`` with the same signature
and the same integer results.  The compiled module is preferred at import
time (see ``kernels.py``); this one is the fallback and the reference.
"""
from __future__ import annotations

from bisect import bisect_left, bisect_right

import numpy as np

# scan slack for candidate windows; the final decision always uses the
# exact predicate, so this only needs to dominate a few ulps
SLACK = 1e-12


def circle_dist(a, b):
    d = np.abs(a - b)
    return np.minimum(d, 1.0 - d)


def count_pairs_direct(theta, h):
    """Ordered pairs m != n with circle distance < h, by brute force."""
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    n = theta.shape[0]
    total = 0
    block = 1024
    for start in range(0, n, block):
        rows = theta[start:start + block]
        d = circle_dist(rows[:, None], theta[None, :])
        hit = d < h
        idx = np.arange(start, start + rows.shape[0])
        hit[idx - start, idx] = False
        total += int(np.count_nonzero(hit))
    return total


def _fwd(u, i, k):
    # forward distance from sorted position i to k on the circle
    return u[k] - u[i] if k > i else (u[k] + 1.0) - u[i]


def count_pairs_sorted(theta, h):
    """Ordered pairs with circle distance < h via a sorted sliding window."""
    u = np.sort(np.asarray(theta, dtype=np.float64))
    n = u.shape[0]
    ext = np.concatenate([u, u + 1.0])
    # candidate window ends: first position with ext - u[i] > h + slack
    ends = np.searchsorted(ext, u + (h + SLACK), side="right")
    total = 0
    for i in range(n):
        ui = u[i]
        for q in range(i + 1, min(ends[i], i + n)):
            k = q if q < n else q - n
            d = abs(ui - u[k])
            if min(d, 1.0 - d) >= h:
                continue
            f_ik = _fwd(u, i, k)
            f_ki = _fwd(u, k, i)
            if f_ik < f_ki or (f_ik == f_ki and i < k):
                total += 1
    return 2 * total


def smooth_sum_sorted(theta, N, kind, s, support):
    """Sum over ordered pairs m != n and images j of f(N (theta_n - theta_m + j)).

    ``kind``: 0 indicator (|x| < s/2), 1 triangle (1 - |x|/s), 2 gaussian
    (exp(-x^2 / 2 s^2)); ``support`` is the half-width beyond which f is
    treated as zero.  f must be even.
    """
    u = np.sort(np.asarray(theta, dtype=np.float64))
    n = u.shape[0]
    w = support / N
    copies = int(np.ceil(w)) + 1
    ext = np.concatenate([u + j for j in range(copies + 1)])
    ends = np.searchsorted(ext, u + w, side="left")
    acc = 0.0
    for i in range(n):
        ui = u[i]
        q = np.arange(i + 1, ends[i])
        if q.size == 0:
            continue
        q = q[(q % n) != i]
        x = N * (ext[q] - ui)
        acc += 2.0 * float(np.sum(_profile(kind, s, x)))
    return acc


def _profile(kind, s, x):
    if kind == 0:
        return (np.abs(x) < 0.5 * s).astype(np.float64)
    if kind == 1:
        return np.maximum(0.0, 1.0 - np.abs(x) / s)
    if kind == 2:
        return np.exp(-0.5 * (x / s) ** 2)
    raise ValueError(f"unknown window kind {kind}")


def close_pairs(f, pid, nmul, core, gaps, kappa, err, E):
    """Count ordered pairs (i, j), i flagged in ``core``, with |v_i - v_j| < K.

    The element values are v = nmul * gaps[pid] / Q for integer gaps, so the
    condition reads |nmul_i D_i - nmul_j D_j| <= kappa, kappa being the
    largest integer below K Q.  When the gaps carry an error of at most
    ``err`` each, pairs are settled as certainly in or out where possible;
    ``E`` bounds err * (n_i + n_j) over all pairs.  Unsettled pairs are
    returned for escalation.  ``f`` (float values, ascending) is unused here
    beyond the shared signature.
    """
    n = len(pid)
    keys = [int(nmul[i]) * gaps[int(pid[i])] for i in range(n)]
    order = sorted(range(n), key=keys.__getitem__)
    sk = [keys[i] for i in order]
    total = 0
    undecided = []
    has_in = kappa >= E
    for i in order:
        if not core[i]:
            continue
        ki = keys[i]
        a_c = bisect_left(sk, ki - kappa - E)
        b_c = bisect_right(sk, ki + kappa + E)
        if has_in:
            a_in = bisect_left(sk, ki - (kappa - E))
            b_in = bisect_right(sk, ki + (kappa - E))
            total += b_in - a_in
            if E == 0:
                continue
            cands = list(range(a_c, a_in)) + list(range(b_in, b_c))
        else:
            cands = range(a_c, b_c)
        ni = int(nmul[i])
        for q in cands:
            j = order[q]
            if j == i:
                total += 1
                continue
            diff = abs(ki - keys[j])
            e = err * (ni + int(nmul[j]))
            if diff + e <= kappa:
                total += 1
            elif diff - e >= kappa + 1:
                pass
            else:
                undecided.append((i, j))
    return total, undecided
