"""Pure-Python RK4 kernel for the radial shooting integrator.

Same contract as the compiled kernel in ``shoot_cy.pyx``; selected at
import time by :mod:`nlscouple._kernels` when the extension is missing or
explicitly disabled.
"""

from __future__ import annotations

FLAG_RAN_OUT = 0
FLAG_CROSSED_ZERO = 1
FLAG_TURNED_UP = -1


def integrate_profile(N, p, w_ref, h, i0, n_max, w_out, s_out):
    """Integrate w'' + (N-1)/r w' - w + |w|^{p-2} w = 0 on r_i = i h.

    Resumes from the state stored at index ``i0`` (the caller seeds indices
    0..i0, typically from the even Taylor series about r = 0, which avoids
    the coordinate singularity).  Fills ``w_out``/``s_out`` for i <= n_filled
    and returns ``(n_filled, flag)``.  flag is 1 if w crossed zero
    (overshoot), -1 if the trajectory turned back up (undershoot), 0 if
    n_max was reached.  ``w_ref`` is the initial height used for the event
    thresholds.
    """
    pm1 = p - 1.0
    nm1 = float(N - 1)

    def deriv(r, w, s):
        if w >= 0.0:
            f = w - w**pm1
        else:
            f = w + (-w) ** pm1
        if r <= 0.0:
            return s, f / N
        return s, f - nm1 / r * s

    w = float(w_out[i0])
    s = float(s_out[i0])
    w0 = float(w_ref)
    n = i0 + 1
    flag = FLAG_RAN_OUT
    r = i0 * h
    half = 0.5 * h
    while n < n_max:
        k1w, k1s = deriv(r, w, s)
        k2w, k2s = deriv(r + half, w + half * k1w, s + half * k1s)
        k3w, k3s = deriv(r + half, w + half * k2w, s + half * k2s)
        k4w, k4s = deriv(r + h, w + h * k3w, s + h * k3s)
        w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
        s += h / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
        r += h
        w_out[n] = w
        s_out[n] = s
        n += 1
        if w <= 0.0:
            flag = FLAG_CROSSED_ZERO
            break
        if w > w0 or (s > 0.0 and w < 0.9 * w0):
            flag = FLAG_TURNED_UP
            break
    return n, flag
