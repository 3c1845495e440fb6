"""Small numerical helpers: compensated summation and exact angle reduction.

Interferometer phases can reach 1e15..1e18 rad before reduction while the
observables care about the value mod 2pi to ~1e-9 rad, which is far below
one ulp of the unreduced phase.  The reduction here therefore carries the
residual in double-double arithmetic (Dekker/Knuth error-free transforms)
and subtracts k*(2pi) with 2pi split into a hi/lo pair.
"""

from __future__ import annotations

import math
from typing import Iterable

# 2*pi = TWO_PI_HI + TWO_PI_LO + O(1e-33)
TWO_PI_HI = 6.283185307179586
TWO_PI_LO = 2.4492935982947064e-16

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a: float, b: float) -> tuple[float, float]:
    """Knuth two-sum: s + err == a + b exactly."""
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def two_prod(a: float, b: float) -> tuple[float, float]:
    """Dekker two-product: p + err == a * b exactly (no fma needed)."""
    p = a * b
    ca = _SPLITTER * a
    ahi = ca - (ca - a)
    alo = a - ahi
    cb = _SPLITTER * b
    bhi = cb - (cb - b)
    blo = b - bhi
    err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, err


def _dd_add(xh: float, xl: float, yh: float, yl: float) -> tuple[float, float]:
    sh, sl = two_sum(xh, yh)
    sl += xl + yl
    sh, sl = two_sum(sh, sl)
    return sh, sl


def reduce_two_pi(x: float) -> float:
    """Reduce an angle to (-pi, pi], accurate to ~1e-9 rad for |x| <= 1e18.

    Multi-pass Cody-Waite style reduction in double-double arithmetic; the
    integer multiple k stays below 2**53 so k itself is exact.
    """
    rh, rl = float(x), 0.0
    for _ in range(3):
        k = float(round(rh / TWO_PI_HI))
        if k == 0.0:
            break
        ph, pl = two_prod(k, TWO_PI_HI)
        rh, rl = _dd_add(rh, rl, -ph, -pl)
        qh, ql = two_prod(k, TWO_PI_LO)
        rh, rl = _dd_add(rh, rl, -qh, -ql)
    r = rh + rl
    if r > math.pi:
        r -= TWO_PI_HI
    elif r <= -math.pi:
        r += TWO_PI_HI
    return r


def reduce_two_pi_array(x) -> "np.ndarray":
    """Vectorized reduce_two_pi over a numpy array (same algorithm)."""
    import numpy as np

    rh = np.asarray(x, dtype=float).copy()
    rl = np.zeros_like(rh)
    for _ in range(3):
        k = np.round(rh / TWO_PI_HI)
        if not np.any(k):
            break
        for part in (TWO_PI_HI, TWO_PI_LO):
            # exact p + perr == k * part (Dekker, elementwise)
            p = k * part
            ck = _SPLITTER * k
            khi = ck - (ck - k)
            klo = k - khi
            cp = _SPLITTER * part
            phi = cp - (cp - part)
            plo = part - phi
            perr = ((khi * phi - p) + khi * plo + klo * phi) + klo * plo
            # dd subtraction: (rh, rl) -= (p, perr)
            sh = rh - p
            bb = sh - rh
            serr = (rh - (sh - bb)) + (-p - bb)
            rl = rl + (serr - perr)
            sh2 = sh + rl
            bb2 = sh2 - sh
            rl = (sh - (sh2 - bb2)) + (rl - bb2)
            rh = sh2
    r = rh + rl
    r = np.where(r > math.pi, r - TWO_PI_HI, r)
    r = np.where(r <= -math.pi, r + TWO_PI_HI, r)
    return r


def neumaier_sum(values: Iterable[float]) -> float:
    """Compensated (Neumaier) sum; exact to one rounding of the true total."""
    total = 0.0
    comp = 0.0
    for v in values:
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp
