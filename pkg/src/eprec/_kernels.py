"""Compiled scanning kernels (numba).

All indices here are 0-based.  A search for ``pat`` in ``text`` between
``lo`` and ``stop`` reports the first start ``i >= lo`` whose full window
``text[i:i+len(pat)]`` ends at or before ``stop``, or -1.
"""

import numpy as np
from numba import njit

EXHAUSTED = -1


@njit(cache=True, nogil=True)
def failure_function(pat):
    n = pat.shape[0]
    fail = np.zeros(n, dtype=np.int64)
    q = 0
    for i in range(1, n):
        c = pat[i]
        while q > 0 and pat[q] != c:
            q = fail[q - 1]
        if pat[q] == c:
            q += 1
        fail[i] = q
    return fail


@njit(cache=True, nogil=True)
def kmp_find(text, pat, fail, lo, stop):
    n = pat.shape[0]
    if stop > text.shape[0]:
        stop = text.shape[0]
    if lo < 0:
        lo = 0
    if n == 0:
        return lo if lo <= stop else -1
    q = 0
    for i in range(lo, stop):
        c = text[i]
        while q > 0 and pat[q] != c:
            q = fail[q - 1]
        if pat[q] == c:
            q += 1
        if q == n:
            return i - n + 1
    return -1


@njit(cache=True, nogil=True)
def find(text, pat, lo, stop):
    return kmp_find(text, pat, failure_function(pat), lo, stop)


@njit(cache=True, nogil=True)
def reversed_prefix(x, n, theta):
    out = np.empty(n, dtype=np.uint8)
    for i in range(n):
        out[i] = theta[x[n - 1 - i]]
    return out


@njit(cache=True, nogil=True)
def match_curve_kernel(x, n_max, theta):
    """First non-overlapping starts of the n-prefix and its reversal.

    Returns two arrays of 0-based starts for n = 1..n_max (-1 = none in data).
    Uses that starts of prefix occurrences are nondecreasing in n and that
    starts of reversed-prefix occurrences drop by at most one per step.
    """
    N = x.shape[0]
    starts = np.full(n_max, -1, dtype=np.int64)
    rstarts = np.full(n_max, -1, dtype=np.int64)
    fail_all = failure_function(x[:n_max])
    s = 0
    alive = True
    rs = 0
    ralive = True
    for n in range(1, n_max + 1):
        if alive:
            lo = max(n, s)
            i = kmp_find(x, x[:n], fail_all[:n], lo, N)
            if i < 0:
                alive = False
            else:
                starts[n - 1] = i
                s = i
        if ralive:
            pat = reversed_prefix(x, n, theta)
            lo = max(n, rs - 1)
            i = kmp_find(x, pat, failure_function(pat), lo, N)
            if i < 0:
                ralive = False
            else:
                rstarts[n - 1] = i
                rs = i
    return starts, rstarts


@njit(cache=True, nogil=True)
def match_length_kernel(x, m, theta, use_reversal):
    """Advance n while the (reversed) n-prefix recurs within offset m.

    Returns the last such n (0 if none), or EXHAUSTED when the data cannot
    decide whether the first failing n recurs within offset m.  When no
    window of length n fits after the prefix at all (2n > len), the result
    is capped at n - 1.
    """
    N = x.shape[0]
    L = 0
    s = 0
    n = 1
    while True:
        if 2 * n > N:
            return L
        last_start = n + m - 1
        stop = last_start + n
        if use_reversal:
            pat = reversed_prefix(x, n, theta)
            lo = max(n, s - 1)
            i = kmp_find(x, pat, failure_function(pat), lo, stop)
        else:
            lo = max(n, s)
            i = kmp_find(x, x[:n], failure_function(x[:n]), lo, stop)
        if i >= 0:
            L = n
            s = i
            n += 1
            continue
        if stop <= N:
            return L
        return EXHAUSTED


@njit(cache=True, nogil=True)
def markov_walk(u, pi, P):
    """Inverse-CDF Markov sampling: one uniform per emitted symbol."""
    length = u.shape[0]
    k = pi.shape[0]
    out = np.empty(length, dtype=np.uint8)
    if length == 0:
        return out
    out[0] = _pick(pi, u[0], k)
    for t in range(1, length):
        out[t] = _pick(P[out[t - 1]], u[t], k)
    return out


@njit(cache=True, nogil=True)
def _pick(p, u, k):
    acc = 0.0
    last = 0
    for j in range(k):
        if p[j] > 0.0:
            last = j
            acc += p[j]
            if u < acc:
                return j
    return last


@njit(cache=True, nogil=True)
def pmp_walk(u, pi, Pa, Pa1):
    """Sample a PMP measure with a unit-sum forward vector.

    ``Pa`` has shape (A, d, d), ``Pa1`` the row sums of each ``Pa[a]``.
    """
    length = u.shape[0]
    A = Pa.shape[0]
    d = pi.shape[0]
    out = np.empty(length, dtype=np.uint8)
    v = pi.copy()
    probs = np.empty(A)
    w = np.empty(d)
    for t in range(length):
        for a in range(A):
            acc = 0.0
            for i in range(d):
                acc += v[i] * Pa1[a, i]
            probs[a] = acc
        total = probs.sum()
        for a in range(A):
            probs[a] /= total
        a = _pick(probs, u[t], A)
        out[t] = a
        norm = 0.0
        for j in range(d):
            acc = 0.0
            for i in range(d):
                acc += v[i] * Pa[a, i, j]
            w[j] = acc
            norm += acc
        for j in range(d):
            v[j] = w[j] / norm
    return out
