"""Pure-Python velocity-Verlet kernel for the tilted-lattice ODE.

Fallback used when the compiled extension is unavailable; same contract as
``blochclock._verlet`` (see kernels.py).  The inner loop is written with
local variable caching only — no numpy — so both kernels execute the same
arithmetic in the same order.
"""

from __future__ import annotations

import math


def integrate(z0, v0, h, n_steps, g, m, two_k, depth, z_off, stride,
              ts, zs, vs):
    """Integrate m z'' = -m g + 2 k V0 sin(2k (z - z_off)).

    Fills strided samples (step 0, every stride-th step, final step) into
    the preallocated arrays ts/zs/vs.  Returns
    (n_out, int_z, int_v2, e_min, e_max, z_end, v_end) where int_z and
    int_v2 are full-resolution trapezoid integrals with compensated
    accumulation and e_min/e_max track the total energy per step.
    """
    sin = math.sin
    cos = math.cos
    kick = two_k * depth / m
    z = z0
    v = v0
    t = 0.0

    def energy(zz, vv):
        return (0.5 * m * vv * vv + m * g * zz
                + depth * cos(two_k * (zz - z_off)))

    e0 = energy(z, v)
    e_min = e0
    e_max = e0
    int_z = 0.0
    cz = 0.0
    int_v2 = 0.0
    cv = 0.0
    n_out = 0
    a = -g + kick * sin(two_k * (z - z_off))
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

        # trapezoid increments, Neumaier-compensated
        inc = 0.5 * h * (z + z_new)
        s = int_z + inc
        if abs(int_z) >= abs(inc):
            cz += (int_z - s) + inc
        else:
            cz += (inc - s) + int_z
        int_z = s
        inc = 0.5 * h * (v * v + v_new * v_new)
        s = int_v2 + inc
        if abs(int_v2) >= abs(inc):
            cv += (int_v2 - s) + inc
        else:
            cv += (inc - s) + int_v2
        int_v2 = s

        z = z_new
        v = v_new
        t += h
        e = energy(z, v)
        if e < e_min:
            e_min = e
        if e > e_max:
            e_max = e
    ts[n_out] = t
    zs[n_out] = z
    vs[n_out] = v
    n_out += 1
    return n_out, int_z + cz, int_v2 + cv, e_min, e_max, z, v
