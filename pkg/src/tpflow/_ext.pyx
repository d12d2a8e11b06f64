# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot kernel loops (see ``_kernels_np``)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, exp, cos, sin, hypot, copysign, M_PI

cnp.import_array()


cdef inline double complex cexp_(double complex z) noexcept nogil:
    cdef double m = exp(z.real)
    return m * cos(z.imag) + 1j * (m * sin(z.imag))


cdef inline double complex csqrt_nnr(double complex z) noexcept nogil:
    cdef double x = z.real, y = z.imag
    cdef double m = hypot(x, y)
    cdef double re = sqrt(0.5 * (m + x))
    cdef double im = copysign(sqrt(0.5 * (m - x)), y)
    return re + 1j * im


cdef inline double kd(int i, int j) noexcept nogil:
    return 1.0 if i == j else 0.0


cdef inline int sort3(int a, int b, int c, int which) noexcept nogil:
    cdef int t
    if a > b:
        t = a; a = b; b = t
    if b > c:
        t = b; b = c; c = t
    if a > b:
        t = a; a = b; b = t
    if which == 0:
        return a
    if which == 1:
        return b
    return c


def param_mode_kernel(X, double lam, double omega, double[::1] u, double[::1] w,
                      bint grad=False):
    cdef double[:, ::1] Xv = np.ascontiguousarray(np.atleast_2d(X), dtype=np.float64)
    cdef Py_ssize_t M = Xv.shape[0], Q = u.shape[0]
    V_arr = np.zeros((M, 3, 3), dtype=np.complex128)
    dV_arr = np.zeros((M if grad else 1, 3, 3, 3), dtype=np.complex128)
    cdef double complex[:, :, ::1] V = V_arr
    cdef double complex[:, :, :, ::1] dV = dV_arr
    nb = np.sqrt(1j * omega + 0.25 * lam * lam * np.asarray(u) ** 2)
    cdef double complex[::1] qs = np.asarray(u) * nb
    cdef double complex[::1] cws = np.asarray(w) / (4 * np.pi * nb)
    cdef double[::1] ps = 0.5 * lam * np.asarray(u) ** 2
    cdef Py_ssize_t ip, iq
    cdef int j, l, m
    cdef double r, x1, a = 0.5 * lam, pp
    cdef double n[3]
    cdef double complex kap = csqrt_nnr(1j * omega + 0.25 * lam * lam)
    cdef double complex q, g0, g1, g2, g3, A, B, Ap, c3, cs, Gr, s
    cdef double complex h1[3]
    cdef double complex h2[3][3]
    cdef double complex acc2[3][3]
    cdef double complex acc3[3][3][3]
    with nogil:
        for ip in range(M):
            x1 = Xv[ip, 0]
            r = sqrt(Xv[ip, 0] ** 2 + Xv[ip, 1] ** 2 + Xv[ip, 2] ** 2)
            for j in range(3):
                n[j] = Xv[ip, j] / r
                for l in range(3):
                    acc2[j][l] = 0
                    for m in range(3):
                        acc3[j][l][m] = 0
            for iq in range(Q):
                pp = ps[iq]
                q = qs[iq]
                g0 = cws[iq] * cexp_(-pp * x1 - q * r)
                g1 = -q * g0
                g2 = q * q * g0
                A = g2 - g1 / r
                B = g1 / r
                for j in range(3):
                    h1[j] = g1 * n[j]
                    for l in range(3):
                        h2[j][l] = A * n[j] * n[l] + B * kd(j, l)
                for j in range(3):
                    for l in range(j, 3):
                        s = h2[j][l] - pp * (kd(j, 0) * h1[l] + kd(l, 0) * h1[j]) \
                            + pp * pp * kd(j, 0) * kd(l, 0) * g0
                        acc2[j][l] = acc2[j][l] + s
                if grad:
                    g3 = -q * q * q * g0
                    Ap = g3 - g2 / r + g1 / (r * r)
                    c3 = Ap - 2 * A / r
                    cs = A / r
                    for j in range(3):
                        for l in range(j, 3):
                            for m in range(l, 3):
                                s = c3 * n[j] * n[l] * n[m] \
                                    + cs * (kd(j, m) * n[l] + kd(l, m) * n[j] + kd(j, l) * n[m])
                                s = s - pp * (kd(j, 0) * h2[l][m] + kd(l, 0) * h2[j][m]
                                              + kd(m, 0) * h2[j][l])
                                s = s + pp * pp * (kd(j, 0) * kd(l, 0) * h1[m]
                                                   + kd(j, 0) * kd(m, 0) * h1[l]
                                                   + kd(l, 0) * kd(m, 0) * h1[j])
                                s = s - pp * pp * pp * kd(j, 0) * kd(l, 0) * kd(m, 0) * g0
                                acc3[j][l][m] = acc3[j][l][m] + s
            # both tensors are symmetric; only j <= l <= m was accumulated
            for j in range(3):
                for l in range(j):
                    acc2[j][l] = acc2[l][j]
            for j in range(3):
                for l in range(3):
                    for m in range(3):
                        acc3[j][l][m] = acc3[sort3(j, l, m, 0)][sort3(j, l, m, 1)][sort3(j, l, m, 2)]
            Gr = cexp_(-kap * r - a * x1) / (4 * M_PI * r)
            for j in range(3):
                for l in range(3):
                    V[ip, j, l] = acc2[j][l] + Gr * kd(j, l)
            if grad:
                for m in range(3):
                    s = Gr * (-kap * n[m] - a * kd(m, 0) - n[m] / r)
                    for j in range(3):
                        for l in range(3):
                            dV[ip, m, j, l] = acc3[j][l][m] + s * kd(j, l)
    return V_arr, (dV_arr if grad else None)


def conv_accumulate(x, double[:, ::1] Y, double[::1] W, double complex kap, double a,
                    int power, bint about_x):
    cdef double x0 = x[0], x1 = x[1], x2 = x[2]
    cdef Py_ssize_t P = Y.shape[0], ip
    cdef int j, l
    cdef double d0, d1, t0, t1, pw, z[3], gphi[3], y[3]
    cdef double complex Gr, gR[3]
    cdef double complex acc[3][3]
    for j in range(3):
        for l in range(3):
            acc[j][l] = 0
    with nogil:
        for ip in range(P):
            y[0] = Y[ip, 0]
            y[1] = Y[ip, 1]
            y[2] = Y[ip, 2]
            z[0] = x0 - y[0]
            z[1] = x1 - y[1]
            z[2] = x2 - y[2]
            d0 = sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2])
            d1 = sqrt(z[0] * z[0] + z[1] * z[1] + z[2] * z[2])
            t0 = d0 ** power
            t1 = d1 ** power
            pw = (t0 if about_x else t1) / (t0 + t1)
            for j in range(3):
                gphi[j] = -z[j] / (4 * M_PI * d1 * d1 * d1)
            Gr = cexp_(-kap * d0 - a * y[0]) / (4 * M_PI * d0)
            for l in range(3):
                gR[l] = Gr * (-kap * y[l] / d0 - a * kd(l, 0) - y[l] / (d0 * d0))
            for j in range(3):
                for l in range(3):
                    acc[j][l] = acc[j][l] + W[ip] * pw * gphi[j] * gR[l]
    out = np.empty((3, 3), dtype=np.complex128)
    for j in range(3):
        for l in range(3):
            out[j, l] = -acc[j][l]
    return out
