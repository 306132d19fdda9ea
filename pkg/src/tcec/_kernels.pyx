# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_pykernels`` for the reference semantics."""
import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef enum:
    WALK_METROPOLIS = 2


cdef class CandidateScorer:
    cdef const long long[::1] oip
    cdef const int[::1] oix
    cdef const double[::1] ow
    cdef const long long[::1] iip
    cdef const int[::1] iix
    cdef const double[::1] iw
    cdef double[::1] acc
    cdef int[::1] touched
    cdef unsigned char[::1] seen

    def __init__(self, out_indptr, out_indices, out_weights,
                 in_indptr, in_indices, in_weights):
        self.oip = np.ascontiguousarray(out_indptr, dtype=np.int64)
        self.oix = np.ascontiguousarray(out_indices, dtype=np.int32)
        self.ow = np.ascontiguousarray(out_weights, dtype=np.float64)
        self.iip = np.ascontiguousarray(in_indptr, dtype=np.int64)
        self.iix = np.ascontiguousarray(in_indices, dtype=np.int32)
        self.iw = np.ascontiguousarray(in_weights, dtype=np.float64)
        n = len(in_indptr) - 1
        self.acc = np.zeros(n, dtype=np.float64)
        self.touched = np.zeros(n, dtype=np.int32)
        self.seen = np.zeros(n, dtype=np.uint8)

    def score_terms(self, member_mask, Py_ssize_t j):
        cdef const unsigned char[::1] mask = member_mask.view(np.uint8)
        cdef double b1sq = 0.0, b1u = 0.0, b3sq = 0.0, w_ji, val
        cdef long long e, f
        cdef int i, l
        cdef Py_ssize_t n_touched = 0, t
        cdef double[::1] acc = self.acc
        cdef int[::1] touched = self.touched
        cdef unsigned char[::1] seen = self.seen

        with nogil:
            for e in range(self.oip[j], self.oip[j + 1]):
                i = self.oix[e]
                if not mask[i]:
                    continue
                w_ji = self.ow[e]
                b1sq += w_ji * w_ji
                for f in range(self.iip[i], self.iip[i + 1]):
                    l = self.iix[f]
                    if l == j or mask[l]:
                        continue
                    if not seen[l]:
                        seen[l] = 1
                        touched[n_touched] = l
                        n_touched += 1
                    acc[l] += w_ji * self.iw[f]
            # summed in first-touch order to match the dict-based fallback
            for t in range(n_touched):
                val = acc[touched[t]]
                b1u += val * val
                acc[touched[t]] = 0.0
                seen[touched[t]] = 0
            for f in range(self.iip[j], self.iip[j + 1]):
                l = self.iix[f]
                if mask[l]:
                    continue
                b3sq += self.iw[f] * self.iw[f]
        return b1sq, b1u, b3sq


def walk_trajectory(indptr, indices, cum, degree, int variant, Py_ssize_t start,
                    uniforms):
    cdef const long long[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const int[::1] ix = np.ascontiguousarray(indices, dtype=np.int32)
    cdef const double[::1] cw = np.ascontiguousarray(cum, dtype=np.float64)
    cdef const double[::1] deg = np.ascontiguousarray(degree, dtype=np.float64)
    cdef const double[::1] u = np.ascontiguousarray(uniforms, dtype=np.float64)
    cdef Py_ssize_t per_step = 2 if variant == WALK_METROPOLIS else 1
    cdef Py_ssize_t n_steps = u.shape[0] // per_step
    out_arr = np.empty(n_steps, dtype=np.int64)
    cdef long long[::1] out = out_arr
    cdef Py_ssize_t t, cur = start
    cdef long long a, b, k, lo, hi, mid
    cdef double base, target
    cdef int prop

    with nogil:
        for t in range(n_steps):
            a = ip[cur]
            b = ip[cur + 1]
            if b > a:
                if variant == WALK_METROPOLIS:
                    k = a + <long long>(u[2 * t] * (b - a))
                    if k >= b:
                        k = b - 1
                    prop = ix[k]
                    if u[2 * t + 1] * deg[prop] < deg[cur]:
                        cur = prop
                else:
                    base = cw[a - 1] if a > 0 else 0.0
                    target = base + u[t] * (cw[b - 1] - base)
                    lo = a
                    hi = b - 1
                    while lo < hi:
                        mid = (lo + hi) // 2
                        if cw[mid] > target:
                            hi = mid
                        else:
                            lo = mid + 1
                    cur = ix[lo]
            out[t] = cur
    return out_arr


def kendall_counts(x, y):
    cdef const double[::1] xs = np.ascontiguousarray(x, dtype=np.float64)
    ys_arr = np.array(y, dtype=np.float64, copy=True)
    buf_arr = np.empty_like(ys_arr)
    cdef Py_ssize_t n = xs.shape[0]
    if n < 2:
        return 0, 0, 0, 0
    cdef double[::1] ys_view = ys_arr
    cdef double[::1] buf_view = buf_arr
    cdef double* ys = &ys_view[0]
    cdef double* buf = &buf_view[0]
    cdef double* tmp
    cdef long long x_ties = 0, y_ties = 0, joint_ties = 0, swaps = 0
    cdef long long run_x = 1, run_xy = 1, run_y = 1
    cdef Py_ssize_t k, lo, mid, hi, i, j, width

    with nogil:
        for k in range(1, n):
            if xs[k] == xs[k - 1]:
                run_x += 1
                if ys[k] == ys[k - 1]:
                    run_xy += 1
                else:
                    joint_ties += run_xy * (run_xy - 1) // 2
                    run_xy = 1
            else:
                x_ties += run_x * (run_x - 1) // 2
                joint_ties += run_xy * (run_xy - 1) // 2
                run_x = 1
                run_xy = 1
        x_ties += run_x * (run_x - 1) // 2
        joint_ties += run_xy * (run_xy - 1) // 2

        width = 1
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
                    if ys[j] < ys[i]:
                        buf[k] = ys[j]
                        swaps += mid - i
                        j += 1
                    else:
                        buf[k] = ys[i]
                        i += 1
                    k += 1
                while i < mid:
                    buf[k] = ys[i]
                    i += 1
                    k += 1
                while j < hi:
                    buf[k] = ys[j]
                    j += 1
                    k += 1
                lo += 2 * width
            tmp = ys
            ys = buf
            buf = tmp
            width *= 2

        for k in range(1, n):
            if ys[k] == ys[k - 1]:
                run_y += 1
            else:
                y_ties += run_y * (run_y - 1) // 2
                run_y = 1
        y_ties += run_y * (run_y - 1) // 2
    return x_ties, y_ties, joint_ties, swaps
