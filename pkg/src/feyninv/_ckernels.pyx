# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: packed sparse products and batched monomial evaluation."""

import numpy as np
cimport numpy as cnp

BACKEND = "cython"


def mul_packed(dict p, dict q):
    cdef dict out = {}
    cdef list qkeys, qvals
    cdef Py_ssize_t j, nq
    cdef object k1, c1, k, prev
    if len(p) < len(q):
        p, q = q, p
    qkeys = list(q.keys())
    qvals = list(q.values())
    nq = len(qkeys)
    for k1, c1 in p.items():
        for j in range(nq):
            k = k1 + qkeys[j]
            prev = out.get(k)
            if prev is None:
                out[k] = c1 * qvals[j]
            else:
                out[k] = prev + c1 * qvals[j]
    return {k: c for k, c in out.items() if c}


def eval_monomials(exps, coeffs, pts):
    cdef cnp.int64_t[:, ::1] E = np.ascontiguousarray(exps, dtype=np.int64)
    cdef double[::1] C = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef double[:, ::1] X = np.ascontiguousarray(pts, dtype=np.float64)
    cdef Py_ssize_t npts = X.shape[0], nvars = X.shape[1], nt = E.shape[0]
    cdef Py_ssize_t i, t, v, d, k, stride, maxdeg = 0
    out = np.zeros(npts)
    cdef double[::1] O = out
    if nt == 0:
        return out
    for t in range(nt):
        for v in range(nvars):
            if E[t, v] > maxdeg:
                maxdeg = E[t, v]
    stride = maxdeg + 1
    # flat offsets of the nonzero exponent factors, so the hot loop has no branches
    cdef cnp.int64_t[::1] start = np.zeros(nt + 1, dtype=np.int64)
    for t in range(nt):
        k = 0
        for v in range(nvars):
            if E[t, v]:
                k += 1
        start[t + 1] = start[t] + k
    cdef cnp.int64_t[::1] off = np.empty(max(start[nt], 1), dtype=np.int64)
    for t in range(nt):
        k = start[t]
        for v in range(nvars):
            if E[t, v]:
                off[k] = v * stride + E[t, v]
                k += 1
    # powers laid out [v, d, point] so the inner loop runs over contiguous memory
    pw_arr = np.empty((nvars * stride, npts))
    cdef double[:, ::1] PW = pw_arr
    for v in range(nvars):
        for i in range(npts):
            PW[v * stride, i] = 1.0
        for d in range(1, stride):
            for i in range(npts):
                PW[v * stride + d, i] = PW[v * stride + d - 1, i] * X[i, v]
    tmp_arr = np.empty(npts)
    cdef double[::1] T = tmp_arr
    cdef double c
    for t in range(nt):
        c = C[t]
        if start[t] == start[t + 1]:
            for i in range(npts):
                O[i] += c
            continue
        k = start[t]
        for i in range(npts):
            T[i] = c * PW[off[k], i]
        for k in range(start[t] + 1, start[t + 1]):
            for i in range(npts):
                T[i] *= PW[off[k], i]
        for i in range(npts):
            O[i] += T[i]
    return out
