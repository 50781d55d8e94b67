# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: canonical rank refinement and pairwise Tanimoto sums."""
import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()


cdef extern from *:
    """
    static inline int popcount64(unsigned long long x) { return __builtin_popcountll(x); }
    """
    int popcount64(unsigned long long x) nogil


cdef inline int _cmp(int64_t a, int64_t b, int64_t* rank, int64_t* ptr, int64_t* codes) noexcept nogil:
    cdef int64_t ia, ib, la, lb, k
    if rank[a] != rank[b]:
        return -1 if rank[a] < rank[b] else 1
    ia = ptr[a]
    ib = ptr[b]
    la = ptr[a + 1] - ia
    lb = ptr[b + 1] - ib
    k = 0
    while k < la and k < lb:
        if codes[ia + k] != codes[ib + k]:
            return -1 if codes[ia + k] < codes[ib + k] else 1
        k += 1
    if la == lb:
        return 0
    return -1 if la < lb else 1


cdef void _merge_sort(int64_t* idx, int64_t* tmp, int64_t n, int64_t* rank, int64_t* ptr, int64_t* codes) noexcept nogil:
    cdef int64_t width = 1, lo, mid, hi, i, j, k
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
                if _cmp(src[j], src[i], rank, ptr, codes) < 0:
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
            lo += 2 * width
        sw = src
        src = dst
        dst = sw
        width *= 2
    if src != idx:
        for i in range(n):
            idx[i] = src[i]


cdef int64_t _refine_once(int64_t n, int64_t* rank, int64_t* ptr, int64_t* nb, int64_t* od,
                          int64_t* codes, int64_t* idx, int64_t* tmp, int64_t* newrank) noexcept nogil:
    cdef int64_t i, k, a, b, key, r, lo, hi
    for i in range(n):
        lo = ptr[i]
        hi = ptr[i + 1]
        for k in range(lo, hi):
            codes[k] = rank[nb[k]] * 8 + od[k]
        # insertion sort of the neighbor codes
        for a in range(lo + 1, hi):
            key = codes[a]
            b = a - 1
            while b >= lo and codes[b] > key:
                codes[b + 1] = codes[b]
                b -= 1
            codes[b + 1] = key
        idx[i] = i
    _merge_sort(idx, tmp, n, rank, ptr, codes)
    r = 0
    newrank[idx[0]] = 0
    for i in range(1, n):
        if _cmp(idx[i - 1], idx[i], rank, ptr, codes) != 0:
            r += 1
        newrank[idx[i]] = r
    return r + 1


cdef int64_t _dense_ints(int64_t n, int64_t* vals, int64_t* idx, int64_t* tmp, int64_t* out, int64_t* ptr_zero, int64_t* codes) noexcept nogil:
    # ptr_zero is an all-zero offsets array so _cmp compares values only
    cdef int64_t i, r = 0
    _merge_sort(idx, tmp, n, vals, ptr_zero, codes)
    out[idx[0]] = 0
    for i in range(1, n):
        if vals[idx[i]] != vals[idx[i - 1]]:
            r += 1
        out[idx[i]] = r
    return r + 1


def refine_ranks(cnp.ndarray invariants, cnp.ndarray indptr, cnp.ndarray neighbors,
                 cnp.ndarray orders, cnp.ndarray tiebreak):
    """Iterative neighborhood refinement with individualization of ties."""
    cdef int64_t[::1] inv = np.ascontiguousarray(invariants, dtype=np.int64)
    cdef int64_t[::1] ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef int64_t[::1] nb = np.ascontiguousarray(neighbors, dtype=np.int64)
    cdef int64_t[::1] od = np.ascontiguousarray(orders, dtype=np.int64)
    cdef int64_t[::1] tb = np.ascontiguousarray(tiebreak, dtype=np.int64)
    cdef int64_t n = inv.shape[0]
    out = np.zeros(n, dtype=np.int64)
    if n == 0:
        return out
    cdef int64_t[::1] res = out
    cdef int64_t m = nb.shape[0]
    cdef int64_t* rank = <int64_t*> malloc(n * sizeof(int64_t))
    cdef int64_t* newrank = <int64_t*> malloc(n * sizeof(int64_t))
    cdef int64_t* idx = <int64_t*> malloc(n * sizeof(int64_t))
    cdef int64_t* tmp = <int64_t*> malloc(n * sizeof(int64_t))
    cdef int64_t* zeros = <int64_t*> malloc((n + 1) * sizeof(int64_t))
    cdef int64_t* codes = <int64_t*> malloc((m + 1) * sizeof(int64_t))
    cdef int64_t* vals = <int64_t*> malloc(n * sizeof(int64_t))
    cdef int64_t i, classes, new_classes, target, chosen
    cdef int64_t* sw
    cdef int64_t* nbp = &nb[0] if m > 0 else codes
    cdef int64_t* odp = &od[0] if m > 0 else codes
    try:
        for i in range(n + 1):
            zeros[i] = 0
        for i in range(n):
            vals[i] = inv[i]
            idx[i] = i
        classes = _dense_ints(n, vals, idx, tmp, rank, zeros, codes)
        while True:
            while True:
                new_classes = _refine_once(n, rank, &ptr[0], nbp, odp,
                                           codes, idx, tmp, newrank)
                sw = rank
                rank = newrank
                newrank = sw
                if new_classes == classes:
                    break
                classes = new_classes
            if classes == n:
                break
            # smallest tied class; individualize its member with the lowest tiebreak
            for i in range(n):
                newrank[i] = 0
            for i in range(n):
                newrank[rank[i]] += 1
            target = 0
            while newrank[target] < 2:
                target += 1
            chosen = -1
            for i in range(n):
                if rank[i] == target:
                    if chosen < 0 or tb[i] < tb[chosen] or (tb[i] == tb[chosen] and i < chosen):
                        chosen = i
            for i in range(n):
                vals[i] = 2 * rank[i] + (1 if (rank[i] == target and i != chosen) else 0)
                idx[i] = i
            classes = _dense_ints(n, vals, idx, tmp, rank, zeros, codes)
        for i in range(n):
            res[i] = rank[i]
    finally:
        free(rank)
        free(newrank)
        free(idx)
        free(tmp)
        free(zeros)
        free(codes)
        free(vals)
    return out


def pairwise_tanimoto_sum(cnp.ndarray fps_in):
    """Sum of Tanimoto similarity over all pairs i < j of packed uint64 rows."""
    cdef cnp.uint64_t[:, ::1] fps = np.ascontiguousarray(fps_in, dtype=np.uint64)
    cdef Py_ssize_t n = fps.shape[0], w = fps.shape[1], i, j, k
    cdef int64_t inter, union_
    cdef int64_t* counts = <int64_t*> malloc((n + 1) * sizeof(int64_t))
    cdef double total = 0.0
    try:
        with nogil:
            for i in range(n):
                counts[i] = 0
                for k in range(w):
                    counts[i] += popcount64(fps[i, k])
            for i in range(n - 1):
                for j in range(i + 1, n):
                    inter = 0
                    for k in range(w):
                        inter += popcount64(fps[i, k] & fps[j, k])
                    union_ = counts[i] + counts[j] - inter
                    if union_ == 0:
                        total += 1.0
                    else:
                        total += <double> inter / <double> union_
    finally:
        free(counts)
    return total
