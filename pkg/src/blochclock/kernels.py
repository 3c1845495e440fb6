"""Kernel selection for the lattice integrator.

Prefers the compiled extension; falls back to the pure-Python twin.  Set
BLOCHCLOCK_PURE_PYTHON=1 to force the fallback (used by the benchmark and
the backend-equivalence tests).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

if os.environ.get("BLOCHCLOCK_PURE_PYTHON"):
    from . import _verlet_py as _impl
    BACKEND = "python"
else:
    try:
        from . import _verlet as _impl  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        from . import _verlet_py as _impl
        BACKEND = "python"


@dataclass(frozen=True)
class LatticeTrajectory:
    """Sampled washboard motion plus full-resolution integrals."""

    t: np.ndarray
    z: np.ndarray
    v: np.ndarray
    h: float  # step, s
    n_steps: int
    mean_z: float  # trapezoid integral / duration, m
    mean_square_velocity: float  # (m/s)^2
    energy_min: float  # J
    energy_max: float  # J
    z_end: float
    v_end: float
    backend: str

    @property
    def duration(self) -> float:
        return self.n_steps * self.h

    @property
    def energy_drift(self) -> float:
        return self.energy_max - self.energy_min


def integrate_washboard(z0: float, v0: float, duration: float, h: float,
                        g: float, m: float, two_k: float, depth: float,
                        z_off: float = 0.0, max_samples: int = 4096,
                        backend=None) -> LatticeTrajectory:
    """Run the velocity-Verlet kernel over `duration` with step <= h."""
    n_steps = max(math.ceil(duration / h), 1)
    h_eff = duration / n_steps
    stride = max(n_steps // max_samples, 1)
    size = n_steps // stride + 2
    ts = np.empty(size)
    zs = np.empty(size)
    vs = np.empty(size)
    impl = _impl if backend is None else backend
    n_out, int_z, int_v2, e_min, e_max, z_end, v_end = impl.integrate(
        z0, v0, h_eff, n_steps, g, m, two_k, depth, z_off, stride,
        ts, zs, vs)
    total = n_steps * h_eff
    return LatticeTrajectory(
        t=ts[:n_out].copy(),
        z=zs[:n_out].copy(),
        v=vs[:n_out].copy(),
        h=h_eff,
        n_steps=n_steps,
        mean_z=int_z / total,
        mean_square_velocity=int_v2 / total,
        energy_min=e_min,
        energy_max=e_max,
        z_end=z_end,
        v_end=v_end,
        backend=BACKEND if backend is None else getattr(
            backend, "__name__", "custom"),
    )
