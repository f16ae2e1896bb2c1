# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the kernels in ``_kernels_py``.

Same signatures, same integer results.  ``close_pairs`` works on exact
scaled integers stored as little-endian 32-bit limbs.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, exp, ceil
from libc.stdint cimport uint8_t, uint32_t, uint64_t, int64_t

cnp.import_array()

cdef double SLACK = 1e-12
cdef double GROUP_REL = 2.0 ** -44


def count_pairs_direct(const double[::1] theta, double h):
    cdef Py_ssize_t n = theta.shape[0], i, j
    cdef double d
    cdef int64_t total = 0
    for i in range(n):
        for j in range(i + 1, n):
            d = fabs(theta[i] - theta[j])
            if d > 1.0 - d:
                d = 1.0 - d
            if d < h:
                total += 1
    return 2 * total


cdef inline double _fwd(double[::1] u, Py_ssize_t i, Py_ssize_t k) noexcept:
    if k > i:
        return u[k] - u[i]
    return (u[k] + 1.0) - u[i]


def count_pairs_sorted(theta, double h):
    cdef double[::1] u = np.sort(np.asarray(theta, dtype=np.float64))
    cdef Py_ssize_t n = u.shape[0], i, q, k
    cdef double ui, d, bound, f_ik, f_ki, v
    cdef int64_t total = 0
    for i in range(n):
        ui = u[i]
        bound = ui + (h + SLACK)
        q = i + 1
        while q < i + n:
            k = q if q < n else q - n
            v = u[k] if q < n else u[k] + 1.0
            if v > bound:
                break
            d = fabs(ui - u[k])
            if d > 1.0 - d:
                d = 1.0 - d
            if d < h:
                f_ik = _fwd(u, i, k)
                f_ki = _fwd(u, k, i)
                if f_ik < f_ki or (f_ik == f_ki and i < k):
                    total += 1
            q += 1
    return 2 * total


cdef inline double _profile(int kind, double s, double x) noexcept:
    if kind == 0:
        return 1.0 if fabs(x) < 0.5 * s else 0.0
    if kind == 1:
        x = 1.0 - fabs(x) / s
        return x if x > 0.0 else 0.0
    return exp(-0.5 * (x / s) * (x / s))


def smooth_sum_sorted(theta, int N, int kind, double s, double support):
    if kind < 0 or kind > 2:
        raise ValueError(f"unknown window kind {kind}")
    cdef double[::1] u = np.sort(np.asarray(theta, dtype=np.float64))
    cdef Py_ssize_t n = u.shape[0], i, q, k, j
    cdef double w = support / N
    cdef Py_ssize_t copies = <Py_ssize_t>ceil(w) + 1
    cdef Py_ssize_t top = n * (copies + 1)
    cdef double ui, e, acc = 0.0, row
    for i in range(n):
        ui = u[i]
        row = 0.0
        q = i + 1
        while q < top:
            k = q % n
            j = q // n
            e = u[k] + j
            if e >= ui + w:
                break
            if k != i:
                row += _profile(kind, s, N * (e - ui))
            q += 1
        acc += 2.0 * row
    return acc


# -- exact close-pair counting ------------------------------------------------

cdef inline void _mul_small(const uint32_t* a, int L, uint64_t m, uint32_t* out) noexcept nogil:
    # out[0:L+2] = a[0:L] * m
    cdef uint64_t carry = 0, t
    cdef int k
    for k in range(L):
        t = <uint64_t>a[k] * (m & 0xFFFFFFFFu) + carry
        out[k] = <uint32_t>(t & 0xFFFFFFFFu)
        carry = t >> 32
    out[L] = <uint32_t>(carry & 0xFFFFFFFFu)
    out[L + 1] = <uint32_t>(carry >> 32)


cdef inline int _cmp(const uint32_t* a, const uint32_t* b, int W) noexcept nogil:
    cdef int k = W - 1
    while k >= 0:
        if a[k] != b[k]:
            return 1 if a[k] > b[k] else -1
        k -= 1
    return 0


cdef inline void _sub(const uint32_t* a, const uint32_t* b, int W, uint32_t* out) noexcept nogil:
    # out = a - b, requires a >= b
    cdef int64_t borrow = 0, t
    cdef int k
    for k in range(W):
        t = <int64_t>a[k] - <int64_t>b[k] - borrow
        if t < 0:
            t += <int64_t>0x100000000
            borrow = 1
        else:
            borrow = 0
        out[k] = <uint32_t>t


cdef inline void _add(const uint32_t* a, const uint32_t* b, int W, uint32_t* out) noexcept nogil:
    cdef uint64_t carry = 0, t
    cdef int k
    for k in range(W):
        t = <uint64_t>a[k] + <uint64_t>b[k] + carry
        out[k] = <uint32_t>(t & 0xFFFFFFFFu)
        carry = t >> 32


cdef inline void _add_small(const uint32_t* a, int W, uint64_t m, uint32_t* out) noexcept nogil:
    cdef uint64_t carry = m, t
    cdef int k
    for k in range(W):
        t = <uint64_t>a[k] + (carry & 0xFFFFFFFFu)
        carry = (carry >> 32) + (t >> 32)
        out[k] = <uint32_t>(t & 0xFFFFFFFFu)


cdef void _merge_sort(int64_t* idx, int64_t* tmp, Py_ssize_t n, uint32_t* keys, int W) noexcept nogil:
    # stable bottom-up merge sort of idx[0:n] by the limb keys
    cdef Py_ssize_t width = 1, lo, mid, hi, i, j, k
    cdef int64_t* src = idx
    cdef int64_t* dst = tmp
    cdef int64_t* sw
    while width < n:
        lo = 0
        while lo < n:
            mid = lo + width
            if mid > n:
                mid = n
            hi = lo + 2 * width
            if hi > n:
                hi = n
            i = lo
            j = mid
            k = lo
            while i < mid and j < hi:
                if _cmp(&keys[src[j] * W], &keys[src[i] * W], W) < 0:
                    dst[k] = src[j]
                    j += 1
                else:
                    dst[k] = src[i]
                    i += 1
                k += 1
            while i < mid:
                dst[k] = src[i]
                i += 1
                k += 1
            while j < hi:
                dst[k] = src[j]
                j += 1
                k += 1
            lo = hi
        sw = src
        src = dst
        dst = sw
        width *= 2
    if src != idx:
        for k in range(n):
            idx[k] = src[k]


def close_pairs(const double[::1] f, const int64_t[::1] pid, const int64_t[::1] nmul,
                const uint8_t[::1] core, const uint32_t[:, ::1] gaps, const uint32_t[::1] kappa,
                uint64_t err, uint64_t E):
    """See ``_kernels_py.close_pairs``; ``gaps`` and ``kappa`` are limb arrays.

    ``gaps`` has shape (npairs, L) and ``kappa`` has W >= L + 2 limbs, the
    working width of every key.
    """
    cdef int L = gaps.shape[1]
    cdef int W = kappa.shape[0]
    if W < L + 2:
        raise ValueError("kappa must carry at least L + 2 limbs")
    cdef Py_ssize_t n = f.shape[0], i, j, k, q, g0, a_c = 0, a_in = 0, b_in = 0, b_c = 0
    cdef cnp.ndarray[uint32_t, ndim=1] keys_arr = np.zeros(n * W, dtype=np.uint32)
    cdef uint32_t* keys = <uint32_t*>keys_arr.data
    cdef cnp.ndarray[int64_t, ndim=1] perm_arr = np.arange(n, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] tmp_arr = np.empty(max(n, 1), dtype=np.int64)
    cdef int64_t* perm = <int64_t*>perm_arr.data
    cdef int64_t* tmp = <int64_t*>tmp_arr.data
    cdef cnp.ndarray[uint32_t, ndim=1] work = np.zeros(8 * W, dtype=np.uint32)
    cdef uint32_t* t_in = <uint32_t*>work.data          # kappa - E (valid when has_in)
    cdef uint32_t* t_c = t_in + W                       # kappa + E
    cdef uint32_t* lo_c = t_in + 2 * W
    cdef uint32_t* lo_in = t_in + 3 * W
    cdef uint32_t* hi_in = t_in + 4 * W
    cdef uint32_t* hi_c = t_in + 5 * W
    cdef uint32_t* dd = t_in + 6 * W
    cdef uint32_t* tt = t_in + 7 * W
    cdef uint32_t* ki
    cdef uint32_t* kj
    cdef int has_in, neg_c, neg_in, c
    cdef uint64_t e
    cdef int64_t total = 0
    und_i = []
    und_j = []
    with nogil:
        for i in range(n):
            _mul_small(&gaps[pid[i], 0], L, <uint64_t>nmul[i], &keys[i * W])
        # exact order inside runs of nearly equal floats; across runs the
        # float order already agrees with the exact one
        g0 = 0
        for i in range(1, n + 1):
            if i == n or f[i] - f[i - 1] > GROUP_REL * f[i]:
                if i - g0 > 1:
                    _merge_sort(&perm[g0], tmp, i - g0, keys, W)
                g0 = i
        _add_small(&kappa[0], W, E, t_c)
        has_in = 1
        for k in range(W):
            tt[k] = 0
        _add_small(tt, W, E, tt)
        if _cmp(&kappa[0], tt, W) < 0:
            has_in = 0
        else:
            _sub(&kappa[0], tt, W, t_in)
    for q in range(n):
        i = perm[q]
        if not core[i]:
            continue
        ki = &keys[i * W]
        neg_c = _cmp(ki, t_c, W) < 0
        if not neg_c:
            _sub(ki, t_c, W, lo_c)
        _add(ki, t_c, W, hi_c)
        if has_in:
            neg_in = _cmp(ki, t_in, W) < 0
            if not neg_in:
                _sub(ki, t_in, W, lo_in)
            _add(ki, t_in, W, hi_in)
        # a_c: first position with key >= ki - (kappa + E)
        if not neg_c:
            while a_c < n and _cmp(&keys[perm[a_c] * W], lo_c, W) < 0:
                a_c += 1
        while b_c < n and _cmp(&keys[perm[b_c] * W], hi_c, W) <= 0:
            b_c += 1
        if has_in:
            if not neg_in:
                while a_in < n and _cmp(&keys[perm[a_in] * W], lo_in, W) < 0:
                    a_in += 1
            while b_in < n and _cmp(&keys[perm[b_in] * W], hi_in, W) <= 0:
                b_in += 1
            total += b_in - a_in
        if E == 0 and has_in:
            continue
        j = a_c
        while j < b_c:
            if has_in and j == a_in:
                j = b_in
                continue
            if perm[j] == i:
                total += 1
                j += 1
                continue
            kj = &keys[perm[j] * W]
            c = _cmp(ki, kj, W)
            if c >= 0:
                _sub(ki, kj, W, dd)
            else:
                _sub(kj, ki, W, dd)
            e = err * <uint64_t>(nmul[i] + nmul[perm[j]])
            _add_small(dd, W, e, tt)
            if _cmp(tt, &kappa[0], W) <= 0:
                total += 1
            else:
                # out iff diff >= kappa + 1 + e
                _add_small(&kappa[0], W, e + 1, tt)
                if _cmp(dd, tt, W) < 0:
                    und_i.append(i)
                    und_j.append(perm[j])
            j += 1
    return total, list(zip(und_i, und_j))
