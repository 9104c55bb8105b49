# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled backend: fixed-step LTI integration and Johnson cycle search.

Mirrors the signatures and semantics of ``_slow``.
"""

import numpy as np

from libc.math cimport fabs, isfinite
from scipy.linalg.cython_blas cimport dgemv


cdef inline void _matvec(double[:, ::1] a, double* x, double alpha,
                         double beta, double* y, int n) noexcept nogil:
    # y := alpha * (a @ x) + beta * y  for C-contiguous a
    cdef int inc = 1
    dgemv("T", &n, &n, &alpha, &a[0, 0], &n, x, &inc, &beta, y, &inc)


cdef long long _record_count(long long total, long long stride) noexcept nogil:
    cdef long long n = total // stride + 1
    if total % stride:
        n += 1
    return n


def rk4_path(double[:, ::1] S, double[::1] x0, double[:, ::1] seg_values,
             long long[::1] seg_steps, double h, long long stride):
    cdef int n = S.shape[0]
    cdef long long total = 0
    cdef Py_ssize_t s
    for s in range(seg_steps.shape[0]):
        total += seg_steps[s]

    samples_arr = np.empty((_record_count(total, stride), n))
    x_arr = np.array(x0, dtype=np.float64)
    peaks_arr = np.abs(x_arr)
    k1_arr = np.empty(n); k2_arr = np.empty(n)
    k3_arr = np.empty(n); k4_arr = np.empty(n)
    xt_arr = np.empty(n)

    cdef double[:, ::1] samples = samples_arr
    cdef double[::1] x = x_arr, peaks = peaks_arr
    cdef double[::1] k1 = k1_arr, k2 = k2_arr, k3 = k3_arr, k4 = k4_arr
    cdef double[::1] xt = xt_arr
    cdef double* d
    cdef long long k = 0, rec = 1, step
    cdef int i
    cdef double ax, acc
    cdef bint ok = True

    with nogil:
        for i in range(n):
            samples[0, i] = x[i]
        for s in range(seg_steps.shape[0]):
            d = &seg_values[s, 0]
            for step in range(seg_steps[s]):
                _matvec(S, &x[0], -1.0, 0.0, &k1[0], n)
                for i in range(n):
                    k1[i] += d[i]
                    xt[i] = x[i] + 0.5 * h * k1[i]
                _matvec(S, &xt[0], -1.0, 0.0, &k2[0], n)
                for i in range(n):
                    k2[i] += d[i]
                    xt[i] = x[i] + 0.5 * h * k2[i]
                _matvec(S, &xt[0], -1.0, 0.0, &k3[0], n)
                for i in range(n):
                    k3[i] += d[i]
                    xt[i] = x[i] + h * k3[i]
                _matvec(S, &xt[0], -1.0, 0.0, &k4[0], n)
                acc = 0.0
                for i in range(n):
                    k4[i] += d[i]
                    x[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                    acc += x[i]
                    ax = fabs(x[i])
                    if ax > peaks[i]:
                        peaks[i] = ax
                k += 1
                if not isfinite(acc):
                    ok = False
                    break
                if k % stride == 0 or k == total:
                    for i in range(n):
                        samples[rec, i] = x[i]
                    rec += 1
            if not ok:
                break

    if not ok:
        return samples_arr[:rec], peaks_arr, x_arr, False, int(k)
    return samples_arr, peaks_arr, x_arr, True, int(total)


def exact_path(double[:, ::1] E, double[:, ::1] F, double[::1] x0,
               double[:, ::1] seg_values, long long[::1] seg_steps,
               long long stride):
    cdef int n = E.shape[0]
    cdef long long total = 0
    cdef Py_ssize_t s
    for s in range(seg_steps.shape[0]):
        total += seg_steps[s]

    samples_arr = np.empty((_record_count(total, stride), n))
    x_arr = np.array(x0, dtype=np.float64)
    peaks_arr = np.abs(x_arr)
    fd_arr = np.empty(n)
    y_arr = np.empty(n)

    cdef double[:, ::1] samples = samples_arr
    cdef double[::1] x = x_arr, peaks = peaks_arr, fd = fd_arr, y = y_arr
    cdef long long k = 0, rec = 1, step
    cdef int i
    cdef double ax, acc
    cdef bint ok = True

    with nogil:
        for i in range(n):
            samples[0, i] = x[i]
        for s in range(seg_steps.shape[0]):
            _matvec(F, &seg_values[s, 0], 1.0, 0.0, &fd[0], n)
            for step in range(seg_steps[s]):
                for i in range(n):
                    y[i] = fd[i]
                _matvec(E, &x[0], 1.0, 1.0, &y[0], n)
                acc = 0.0
                for i in range(n):
                    x[i] = y[i]
                    acc += x[i]
                    ax = fabs(x[i])
                    if ax > peaks[i]:
                        peaks[i] = ax
                k += 1
                if not isfinite(acc):
                    ok = False
                    break
                if k % stride == 0 or k == total:
                    for i in range(n):
                        samples[rec, i] = x[i]
                    rec += 1
            if not ok:
                break

    if not ok:
        return samples_arr[:rec], peaks_arr, x_arr, False, int(k)
    return samples_arr, peaks_arr, x_arr, True, int(total)


# ---------------------------------------------------------------------------
# Johnson simple-cycle enumeration


cdef _tarjan(long long[::1] indptr, long long[::1] heads,
             char[::1] alive, long long n, long long[::1] comp):
    """Strongly connected components of the alive-induced subgraph.
    Fills comp[v] with a component id (-1 for dead nodes); returns the
    number of components."""
    cdef long long[::1] index = np.full(n, -1, dtype=np.int64)
    cdef long long[::1] low = np.empty(n, dtype=np.int64)
    cdef char[::1] on_stack = np.zeros(n, dtype=np.int8)
    cdef long long[::1] stack = np.empty(n, dtype=np.int64)
    cdef long long[::1] work_v = np.empty(n + 1, dtype=np.int64)
    cdef long long[::1] work_off = np.empty(n + 1, dtype=np.int64)
    cdef long long counter = 0, ncomp = 0, stack_top = 0, work_top
    cdef long long root, v, w, off
    cdef bint advanced

    comp[:] = -1
    for root in range(n):
        if not alive[root] or index[root] >= 0:
            continue
        work_top = 0
        work_v[0] = root
        work_off[0] = indptr[root]
        index[root] = low[root] = counter
        counter += 1
        stack[stack_top] = root
        stack_top += 1
        on_stack[root] = 1
        while work_top >= 0:
            v = work_v[work_top]
            off = work_off[work_top]
            advanced = False
            while off < indptr[v + 1]:
                w = heads[off]
                off += 1
                if not alive[w]:
                    continue
                if index[w] < 0:
                    work_off[work_top] = off
                    work_top += 1
                    work_v[work_top] = w
                    work_off[work_top] = indptr[w]
                    index[w] = low[w] = counter
                    counter += 1
                    stack[stack_top] = w
                    stack_top += 1
                    on_stack[w] = 1
                    advanced = True
                    break
                if on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
            if advanced:
                continue
            if low[v] == index[v]:
                while True:
                    w = stack[stack_top - 1]
                    stack_top -= 1
                    on_stack[w] = 0
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
            work_top -= 1
            if work_top >= 0 and low[v] < low[work_v[work_top]]:
                low[work_v[work_top]] = low[v]
    return ncomp


def johnson_cycles(long long[::1] indptr, long long[::1] heads,
                   long long n, long long cap):
    cdef char[::1] alive = np.ones(n, dtype=np.int8)
    cdef long long[::1] comp = np.empty(n, dtype=np.int64)
    cdef char[::1] in_scc = np.zeros(n, dtype=np.int8)
    cdef char[::1] blocked = np.zeros(n, dtype=np.int8)
    cdef long long[::1] path = np.empty(n + 1, dtype=np.int64)
    cdef long long[::1] frame_v = np.empty(n + 1, dtype=np.int64)
    cdef long long[::1] frame_off = np.empty(n + 1, dtype=np.int64)
    cdef char[::1] frame_found = np.zeros(n + 1, dtype=np.int8)

    cdef long long ncomp, target, s, v, w, off, path_top, frame_top, u, off2
    cdef bint truncated = False, advanced, found
    cycles = []

    while not truncated:
        ncomp = _tarjan(indptr, heads, alive, n, comp)
        # smallest node belonging to a component of size >= 2
        sizes = np.zeros(ncomp, dtype=np.int64)
        for v in range(n):
            if comp[v] >= 0:
                sizes[comp[v]] += 1
        s = -1
        for v in range(n):
            if comp[v] >= 0 and sizes[comp[v]] > 1:
                s = v
                break
        if s < 0:
            break
        target = comp[s]
        for v in range(n):
            in_scc[v] = 1 if comp[v] == target else 0
            blocked[v] = 0
        blist = [[] for _ in range(n)]

        path[0] = s
        path_top = 1
        blocked[s] = 1
        frame_v[0] = s
        frame_off[0] = indptr[s]
        frame_found[0] = 0
        frame_top = 0
        while frame_top >= 0:
            v = frame_v[frame_top]
            off = frame_off[frame_top]
            found = frame_found[frame_top] != 0
            advanced = False
            while off < indptr[v + 1]:
                w = heads[off]
                off += 1
                if not in_scc[w]:
                    continue
                if w == s:
                    cycles.append(tuple(path[i] for i in range(path_top)))
                    found = True
                    if len(cycles) > cap:
                        truncated = True
                        break
                elif not blocked[w]:
                    frame_off[frame_top] = off
                    frame_found[frame_top] = 1 if found else 0
                    path[path_top] = w
                    path_top += 1
                    blocked[w] = 1
                    frame_top += 1
                    frame_v[frame_top] = w
                    frame_off[frame_top] = indptr[w]
                    frame_found[frame_top] = 0
                    advanced = True
                    break
            if truncated:
                break
            if advanced:
                continue
            if found:
                unblock = [v]
                while unblock:
                    u = unblock.pop()
                    if blocked[u]:
                        blocked[u] = 0
                        unblock.extend(blist[u])
                        blist[u] = []
            else:
                for off2 in range(indptr[v], indptr[v + 1]):
                    w = heads[off2]
                    if in_scc[w]:
                        blist[w].append(v)
            path_top -= 1
            frame_top -= 1
            if frame_top >= 0 and found:
                frame_found[frame_top] = 1
        alive[s] = 0

    if truncated:
        cycles = cycles[: cap + 1]
    return cycles, bool(truncated)
