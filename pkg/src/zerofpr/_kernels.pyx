# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Same signatures and semantics as ``_fallback``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, cos, acos, pow, M_PI

cnp.import_array()


def prox_l_half(x, double mu):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros_like(xv)
    cdef Py_ssize_t i, n = xv.shape[0]
    cdef double a, arg, phi, z, obj_z, obj_0
    if mu <= 0.0:
        return np.array(x, dtype=np.float64, copy=True)
    for i in range(n):
        a = fabs(xv[i])
        if a == 0.0:
            continue
        arg = (mu / 4.0) * pow(a / 3.0, -1.5)
        if arg > 1.0:
            continue
        phi = acos(arg)
        z = (2.0 * a / 3.0) * (1.0 + cos(2.0 * M_PI / 3.0 - 2.0 * phi / 3.0))
        obj_z = mu * sqrt(z) + 0.5 * (z - a) * (z - a)
        obj_0 = 0.5 * a * a
        if obj_z < obj_0:
            out[i] = z if xv[i] > 0.0 else -z
    return out.reshape(np.shape(x))


def hard_threshold(x, double thresh):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros_like(xv)
    cdef Py_ssize_t i, n = xv.shape[0]
    for i in range(n):
        if fabs(xv[i]) > thresh:
            out[i] = xv[i]
    return out.reshape(np.shape(x))


def box_l0_columns(C, Py_ssize_t N, double T):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Cf = np.asfortranarray(C, dtype=np.float64)
    cdef Py_ssize_t k = Cf.shape[0], m = Cf.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((k, m), dtype=np.float64, order="F")
    cdef cnp.ndarray[cnp.intp_t, ndim=1] idx = np.empty(max(N, 1), dtype=np.intp)
    cdef Py_ssize_t j, i, s, pos, cnt
    cdef double v, av
    if N <= 0:
        return np.zeros((k, m))
    if N >= k:
        return np.clip(C, -T, T)
    for j in range(m):
        # insertion into a sorted top-N list; strict '>' keeps the lower index on ties
        cnt = 0
        for i in range(k):
            av = fabs(Cf[i, j])
            if cnt == N and av <= fabs(Cf[idx[N - 1], j]):
                continue
            pos = cnt if cnt < N else N - 1
            while pos > 0 and av > fabs(Cf[idx[pos - 1], j]):
                if pos < N:
                    idx[pos] = idx[pos - 1]
                pos -= 1
            idx[pos] = i
            if cnt < N:
                cnt += 1
        for s in range(cnt):
            v = Cf[idx[s], j]
            if v > T:
                v = T
            elif v < -T:
                v = -T
            out[idx[s], j] = v
    return np.ascontiguousarray(out)


def sphere_columns(Dm):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Df = np.asfortranarray(Dm, dtype=np.float64)
    cdef Py_ssize_t n = Df.shape[0], k = Df.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((n, k), dtype=np.float64, order="F")
    cdef Py_ssize_t i, j
    cdef double nrm
    for j in range(k):
        nrm = 0.0
        for i in range(n):
            nrm += Df[i, j] * Df[i, j]
        nrm = sqrt(nrm)
        if nrm > 0.0:
            for i in range(n):
                out[i, j] = Df[i, j] / nrm
        else:
            out[0, j] = 1.0
    return np.ascontiguousarray(out)


def lbfgs_two_loop(S, Y, rho, q, double scaling):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Sv = np.ascontiguousarray(S, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Yv = np.ascontiguousarray(Y, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rv = np.ascontiguousarray(rho, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.array(q, dtype=np.float64, copy=True)
    cdef Py_ssize_t m = Sv.shape[0], n = out.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] alpha = np.empty(m)
    cdef Py_ssize_t i, j
    cdef double acc, b
    for i in range(m - 1, -1, -1):
        acc = 0.0
        for j in range(n):
            acc += Sv[i, j] * out[j]
        alpha[i] = rv[i] * acc
        for j in range(n):
            out[j] -= alpha[i] * Yv[i, j]
    for j in range(n):
        out[j] *= scaling
    for i in range(m):
        acc = 0.0
        for j in range(n):
            acc += Yv[i, j] * out[j]
        b = rv[i] * acc
        for j in range(n):
            out[j] += (alpha[i] - b) * Sv[i, j]
    return out
