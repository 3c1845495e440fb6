# cython: language_level=3
"""Compiled velocity-Verlet kernel for the tilted-lattice ODE.

Same contract and operation order as the pure-Python twin in
_verlet_py.py; see kernels.py for selection.
"""

from libc.math cimport cos, fabs, sin


def integrate(double z0, double v0, double h, long n_steps, double g,
              double m, double two_k, double depth, double z_off,
              long stride, double[::1] ts, double[::1] zs, double[::1] vs):
    cdef double kick = two_k * depth / m
    cdef double z = z0
    cdef double v = v0
    cdef double t = 0.0
    cdef double e0 = 0.5 * m * v * v + m * g * z \
        + depth * cos(two_k * (z - z_off))
    cdef double e_min = e0
    cdef double e_max = e0
    cdef double int_z = 0.0
    cdef double cz = 0.0
    cdef double int_v2 = 0.0
    cdef double cv = 0.0
    cdef long n_out = 0
    cdef double a = -g + kick * sin(two_k * (z - z_off))
    cdef double v_half, z_new, v_new, inc, s, e
    cdef long i
    for i in range(n_steps):
        if i % stride == 0:
            ts[n_out] = t
            zs[n_out] = z
            vs[n_out] = v
            n_out += 1
        v_half = v + 0.5 * h * a
        z_new = z + h * v_half
        a = -g + kick * sin(two_k * (z_new - z_off))
        v_new = v_half + 0.5 * h * a

        inc = 0.5 * h * (z + z_new)
        s = int_z + inc
        if fabs(int_z) >= fabs(inc):
            cz += (int_z - s) + inc
        else:
            cz += (inc - s) + int_z
        int_z = s
        inc = 0.5 * h * (v * v + v_new * v_new)
        s = int_v2 + inc
        if fabs(int_v2) >= fabs(inc):
            cv += (int_v2 - s) + inc
        else:
            cv += (inc - s) + int_v2
        int_v2 = s

        z = z_new
        v = v_new
        t += h
        e = 0.5 * m * v * v + m * g * z + depth * cos(two_k * (z - z_off))
        if e < e_min:
            e_min = e
        if e > e_max:
            e_max = e
    ts[n_out] = t
    zs[n_out] = z
    vs[n_out] = v
    n_out += 1
    return n_out, int_z + cz, int_v2 + cv, e_min, e_max, z, v
