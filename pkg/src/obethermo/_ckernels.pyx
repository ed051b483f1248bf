# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled fixed-step Runge-Kutta kernels."""
import numpy as np
from libc.math cimport sqrt


def rk4_linear(const double complex[:, ::1] m, const double complex[::1] y0, double h,
               long n_steps, long stride):
    """Classic RK4 for y' = m y; returns every ``stride``-th state."""
    cdef Py_ssize_t d = m.shape[0]
    cdef Py_ssize_t i, j, step, row = 0
    cdef double complex acc
    out = np.empty((n_steps // stride + 1, d), dtype=complex)
    cdef double complex[:, ::1] o = out
    y_arr = np.array(y0, dtype=complex)
    cdef double complex[::1] y = y_arr
    cdef double complex[::1] k1 = np.empty(d, dtype=complex)
    cdef double complex[::1] k2 = np.empty(d, dtype=complex)
    cdef double complex[::1] k3 = np.empty(d, dtype=complex)
    cdef double complex[::1] k4 = np.empty(d, dtype=complex)
    cdef double complex[::1] tmp = np.empty(d, dtype=complex)
    for i in range(d):
        o[0, i] = y[i]
    for step in range(1, n_steps + 1):
        for i in range(d):
            acc = 0
            for j in range(d):
                acc = acc + m[i, j] * y[j]
            k1[i] = acc
        for i in range(d):
            tmp[i] = y[i] + 0.5 * h * k1[i]
        for i in range(d):
            acc = 0
            for j in range(d):
                acc = acc + m[i, j] * tmp[j]
            k2[i] = acc
        for i in range(d):
            tmp[i] = y[i] + 0.5 * h * k2[i]
        for i in range(d):
            acc = 0
            for j in range(d):
                acc = acc + m[i, j] * tmp[j]
            k3[i] = acc
        for i in range(d):
            tmp[i] = y[i] + h * k3[i]
        for i in range(d):
            acc = 0
            for j in range(d):
                acc = acc + m[i, j] * tmp[j]
            k4[i] = acc
        for i in range(d):
            y[i] = y[i] + h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i])
        if step % stride == 0:
            row += 1
            for i in range(d):
                o[row, i] = y[i]
    return out


def jc_rk4(double delta, double g0, const double complex[:, ::1] amp0, double h,
           long n_steps, long stride):
    """RK4 for the rotating-frame Jaynes-Cummings amplitudes (ground, excited) x Fock.

    One RK4 step is the degree-4 Taylor polynomial of -i h H, which is block
    diagonal on the pairs (b_n, a_{n+1}); the blocks are built once.
    """
    cdef Py_ssize_t nf = amp0.shape[1]
    cdef Py_ssize_t n, step, row = 0
    out = np.empty((n_steps // stride + 1, 2, nf), dtype=complex)
    cdef double complex[:, :, ::1] o = out
    cc = g0 * np.sqrt(np.arange(1, nf, dtype=float))
    blocks = np.zeros((nf - 1, 2, 2), dtype=complex)
    blocks[:, 0, 0] = 0.5 * delta
    blocks[:, 1, 1] = -0.5 * delta
    blocks[:, 0, 1] = cc
    blocks[:, 1, 0] = cc
    hm = -1j * h * blocks
    hm2 = hm @ hm
    hm3 = hm2 @ hm
    prop_arr = np.ascontiguousarray(np.eye(2) + hm + hm2 / 2 + hm3 / 6 + hm3 @ hm / 24)
    cdef double complex[:, :, ::1] prop = prop_arr
    cdef double complex za = -0.5j * h * (-delta), zb = -0.5j * h * delta
    cdef double complex lone_a = 1 + za + za * za / 2 + za * za * za / 6 + za * za * za * za / 24
    cdef double complex lone_b = 1 + zb + zb * zb / 2 + zb * zb * zb / 6 + zb * zb * zb * zb / 24
    a_arr = np.array(amp0[0], dtype=complex)
    b_arr = np.array(amp0[1], dtype=complex)
    cdef double complex[::1] a = a_arr
    cdef double complex[::1] b = b_arr
    cdef double complex x, y
    for n in range(nf):
        o[0, 0, n] = a[n]
        o[0, 1, n] = b[n]
    with nogil:
        for step in range(1, n_steps + 1):
            a[0] = lone_a * a[0]
            b[nf - 1] = lone_b * b[nf - 1]
            for n in range(nf - 1):
                x = b[n]
                y = a[n + 1]
                b[n] = prop[n, 0, 0] * x + prop[n, 0, 1] * y
                a[n + 1] = prop[n, 1, 0] * x + prop[n, 1, 1] * y
            if step % stride == 0:
                row += 1
                for n in range(nf):
                    o[row, 0, n] = a[n]
                    o[row, 1, n] = b[n]
    return out
