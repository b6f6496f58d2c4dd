# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled time-stepping loop for the radial porous medium equation.

Mirrors ``_kernel_py.advance`` operation for operation; the two backends give
bitwise identical results for m in {1.5, 2, 3}.
"""

import numpy as np
from libc.math cimport pow, sqrt

# status codes, shared with the pure-Python backend
cdef enum:
    K_MAX_STEPS = 0
    K_REACHED_T = 1
    K_FOCUSED = 2
    K_NEGATIVE = 3
    K_AT_REST = 4

MAX_STEPS, REACHED_T, FOCUSED, NEGATIVE, AT_REST = range(5)


cdef inline double _power(double u, double m, int mode) nogil:
    if mode == 2:
        return u * u
    elif mode == 3:
        return u * u * u
    elif mode == 1:
        return u * sqrt(u)
    return pow(u, m)


def power_mode(double m):
    if m == 2.0:
        return 2
    if m == 3.0:
        return 3
    if m == 1.5:
        return 1
    return 0


def advance(double[::1] u, const double[::1] step_scale, const double[::1] face,
            double m, double dt_coef, double t, double t_stop,
            long max_steps, double focus_u):
    """Advance ``u`` in place.

    ``step_scale[i] = 1/vol_i``, ``face[j]`` is the face weight (zero at both
    ends).  Each step uses ``dt = dt_coef / (m umax^(m-1))`` clipped to land on
    ``t_stop``.  Returns ``(t, steps, status, dt_last)``.
    """
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i, lo, hi, first, last
    cdef long steps = 0
    cdef int mode = power_mode(m)
    cdef int status = K_MAX_STEPS
    cdef double umax, dt = 0.0, c, val
    cdef double[::1] W = np.zeros(n, dtype=np.float64)
    cdef double[::1] F = np.zeros(n + 1, dtype=np.float64)

    first = -1
    last = -1
    umax = 0.0
    for i in range(n):
        if u[i] > 0.0:
            if first < 0:
                first = i
            last = i
            if u[i] > umax:
                umax = u[i]
    if first < 0:
        return t_stop, 0, K_AT_REST, 0.0

    with nogil:
        while steps < max_steps:
            if t >= t_stop:
                status = K_REACHED_T
                break
            dt = dt_coef / (m * pow(umax, m - 1.0))
            if t_stop - t <= dt:
                dt = t_stop - t
                t = t_stop
            else:
                t = t + dt

            lo = first - 1 if first > 0 else 0
            hi = last + 1 if last < n - 1 else n - 1
            for i in range(lo, hi + 1):
                W[i] = _power(u[i], m, mode)
            # faces lo and hi + 1 border empty cells or walls
            F[lo] = 0.0
            F[hi + 1] = 0.0
            for i in range(lo + 1, hi + 1):
                F[i] = face[i] * (W[i] - W[i - 1])

            umax = 0.0
            first = -1
            for i in range(lo, hi + 1):
                c = dt * step_scale[i]
                val = u[i] + c * (F[i + 1] - F[i])
                u[i] = val
                if val > 0.0:
                    if first < 0:
                        first = i
                    last = i
                    if val > umax:
                        umax = val
                elif val < 0.0:
                    status = K_NEGATIVE
            steps += 1
            if status == K_NEGATIVE:
                break
            if first < 0:
                status = K_AT_REST
                break
            if u[0] > focus_u:
                status = K_FOCUSED
                break
        if status == K_MAX_STEPS and t >= t_stop:
            status = K_REACHED_T
    return t, steps, status, dt
