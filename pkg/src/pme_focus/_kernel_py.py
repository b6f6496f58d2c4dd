"""Pure numpy implementation of the stepping loop (fallback for ``_kernel``).

Works on the full array every step instead of the active window; cells outside
the window are exactly zero with zero fluxes, so results match the compiled
loop bit for bit when ``m`` is 1.5, 2 or 3.
"""

import numpy as np

MAX_STEPS, REACHED_T, FOCUSED, NEGATIVE, AT_REST = range(5)


def power_mode(m):
    return {2.0: 2, 3.0: 3, 1.5: 1}.get(float(m), 0)


def _power(u, m, mode):
    if mode == 2:
        return u * u
    if mode == 3:
        return u * u * u
    if mode == 1:
        return u * np.sqrt(u)
    return np.power(u, m)


def advance(u, step_scale, face, m, dt_coef, t, t_stop, max_steps, focus_u):
    m = float(m)
    mode = power_mode(m)
    F = np.zeros(u.shape[0] + 1)
    umax = u.max() if u.size else 0.0
    if not umax > 0.0:
        return t_stop, 0, AT_REST, 0.0

    steps = 0
    status = MAX_STEPS
    dt = 0.0
    while steps < max_steps:
        if t >= t_stop:
            status = REACHED_T
            break
        dt = dt_coef / (m * umax ** (m - 1.0))
        if t_stop - t <= dt:
            dt = t_stop - t
            t = t_stop
        else:
            t = t + dt

        W = _power(u, m, mode)
        F[1:-1] = face[1:-1] * (W[1:] - W[:-1])
        u += (dt * step_scale) * (F[1:] - F[:-1])
        steps += 1
        if u.min() < 0.0:
            status = NEGATIVE
            break
        umax = u.max()
        if not umax > 0.0:
            status = AT_REST
            break
        if u[0] > focus_u:
            status = FOCUSED
            break
    if status == MAX_STEPS and t >= t_stop:
        status = REACHED_T
    return t, steps, status, dt
