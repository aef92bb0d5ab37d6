# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled RK4 kernel for the radial shooting integrator.

Mirrors the pure-Python kernel in ``shoot_py.py``; see that module for the
contract.
"""

from libc.math cimport pow


cdef inline double _force(double w, double pm1) noexcept nogil:
    if w >= 0.0:
        return w - pow(w, pm1)
    return w + pow(-w, pm1)


def integrate_profile(int N, double p, double w_ref, double h, int i0,
                      int n_max, double[::1] w_out, double[::1] s_out):
    cdef double pm1 = p - 1.0
    cdef double nm1 = N - 1.0
    cdef double w0 = w_ref
    cdef double w = w_out[i0]
    cdef double s = s_out[i0]
    cdef double r = i0 * h
    cdef double half = 0.5 * h
    cdef double k1w, k1s, k2w, k2s, k3w, k3s, k4w, k4s
    cdef double rw, rs, rr, f
    cdef int n = i0 + 1
    cdef int flag = 0
    with nogil:
        while n < n_max:
            # k1
            f = _force(w, pm1)
            k1w = s
            k1s = f / N if r <= 0.0 else f - nm1 / r * s
            # k2
            rr = r + half
            rw = w + half * k1w
            rs = s + half * k1s
            f = _force(rw, pm1)
            k2w = rs
            k2s = f / N if rr <= 0.0 else f - nm1 / rr * rs
            # k3
            rw = w + half * k2w
            rs = s + half * k2s
            f = _force(rw, pm1)
            k3w = rs
            k3s = f / N if rr <= 0.0 else f - nm1 / rr * rs
            # k4
            rr = r + h
            rw = w + h * k3w
            rs = s + h * k3s
            f = _force(rw, pm1)
            k4w = rs
            k4s = f / N if rr <= 0.0 else f - nm1 / rr * rs

            w = w + h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
            s = s + h / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
            r = r + h
            w_out[n] = w
            s_out[n] = s
            n += 1
            if w <= 0.0:
                flag = 1
                break
            if w > w0 or (s > 0.0 and w < 0.9 * w0):
                flag = -1
                break
    return n, flag
