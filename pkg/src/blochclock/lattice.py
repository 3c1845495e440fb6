"""Classical washboard-lattice engine.

Independent cross-check of the bounce model: instead of instantaneous
velocity reversals, the hold is integrated in the tilted-lattice potential

    V(z) = m g z + V0 cos(2k (z - z_off))

Classical bounded motion in this potential lives in a single well, so the
engine calibrates (V0, launch energy) by quadrature so the trapped orbit
reproduces the bounce model's period tau_b and mean square velocity
v_b^2/3, recentres the well so the orbit's mean height vanishes, and then
integrates with velocity-Verlet (compiled kernel when available).  The
clock corrections follow from the trajectory's time averages; the upper
arm is the same orbit rigidly shifted by delta_z, so its correction differs
by exactly -(delta_m/hbar) g delta_z T_B.

Not every parameter set is reachable: matching both targets can push the
orbit exponentially close to the separatrix (the requested period can
exceed what any double-precision energy gap supports), in which case
calibration raises InfeasibleLatticeError with the measured limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .kernels import BACKEND, LatticeTrajectory, integrate_washboard
from .model import ExperimentSpec, derive_kinematics
from .phases import ClockPhases

_EDGE = 1e-12  # fractional inset from well bottom / separatrix
_MAX_STEPS = 20_000_000


class InfeasibleLatticeError(RuntimeError):
    """Raised when no classical orbit can match the bounce-model targets."""


@dataclass(frozen=True)
class Well:
    """One trapping well of the tilted washboard."""

    m: float
    g: float
    two_k: float
    depth: float
    z_off: float = 0.0

    @property
    def tilt(self) -> float:
        """mg / (2k V0); wells exist only below 1."""
        return self.m * self.g / (self.two_k * self.depth)

    def potential(self, z):
        return (self.m * self.g * z
                + self.depth * np.cos(self.two_k * (z - self.z_off)))

    def acceleration(self, z):
        return (-self.g + self.two_k * self.depth / self.m
                * np.sin(self.two_k * (z - self.z_off)))

    @property
    def z_barrier(self) -> float:
        """Downhill saddle bounding the well from below."""
        return math.asin(self.tilt) / self.two_k + self.z_off

    @property
    def z_bottom(self) -> float:
        return (math.pi - math.asin(self.tilt)) / self.two_k + self.z_off

    @property
    def omega(self) -> float:
        """Small-oscillation angular frequency at the well bottom."""
        curvature = (self.two_k * self.two_k * self.depth
                     * math.sqrt(1.0 - self.tilt * self.tilt))
        return math.sqrt(curvature / self.m)

    @property
    def bottom_energy(self) -> float:
        return float(self.potential(self.z_bottom))

    @property
    def separatrix_energy(self) -> float:
        """Escape is over the lower barrier (downhill along the tilt)."""
        return float(self.potential(self.z_barrier))


@dataclass(frozen=True)
class WellOrbit:
    """Quadrature characterization of a trapped orbit at energy E."""

    energy: float
    period: float
    mean_z: float
    mean_square_velocity: float
    z_lower: float
    z_upper: float


_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(200)
_PHI = 0.5 * math.pi * _NODES  # map [-1,1] -> (-pi/2, pi/2)
_W = 0.5 * math.pi * _WEIGHTS


def orbit_quadratures(well: Well, energy: float) -> WellOrbit:
    """Period and time averages by energy-integral quadrature.

    The substitution z = mid + amp*sin(phi) absorbs the square-root
    turning-point singularities, leaving a smooth integrand for
    Gauss-Legendre nodes.  Near the turning points E - V(z) is a
    catastrophic difference of two O(|E|) numbers, so it is evaluated as
    V(z_lower) - V(z) in exact product form instead: the displacement
    z - z_lower = amp*(1 + sin(phi)) via the half-angle identity and the
    cosine difference via -2 sin((X+Y)/2) sin((X-Y)/2).
    """
    span = well.bottom_energy, well.separatrix_energy
    if not span[0] < energy < span[1]:
        raise ValueError(f"energy {energy!r} outside the well "
                         f"({span[0]!r}, {span[1]!r})")
    z_next_barrier = well.z_barrier + 2.0 * math.pi / well.two_k

    def f(z):
        return float(well.potential(z)) - energy

    z_lower = brentq(f, well.z_barrier, well.z_bottom, xtol=1e-300,
                     rtol=8.9e-16)
    z_upper = brentq(f, well.z_bottom, z_next_barrier, xtol=1e-300,
                     rtol=8.9e-16)
    amp = 0.5 * (z_upper - z_lower)
    half = 0.25 * math.pi - 0.5 * _PHI
    above = amp * 2.0 * np.cos(half) ** 2  # z - z_lower = amp*(1 + sin phi)
    z = z_lower + above
    k = 0.5 * well.two_k
    dv_pot = (well.m * well.g * above
              - 2.0 * well.depth
              * np.sin(k * (z + z_lower - 2.0 * well.z_off))
              * np.sin(k * above))  # V(z) - V(z_lower), stable
    v = np.sqrt(np.maximum(-2.0 * dv_pot / well.m, 0.0))
    # guard the endpoints: v ~ cos(phi) there, so dz/v stays finite
    dz = amp * np.cos(_PHI)
    with np.errstate(divide="ignore", invalid="ignore"):
        dt = np.where(v > 0.0, dz / v, 0.0)
    half_period = float(np.sum(_W * dt))
    period = 2.0 * half_period
    mean_z = float(np.sum(_W * z * dt)) / half_period
    mean_v2 = float(np.sum(_W * v * dz)) / half_period
    return WellOrbit(energy=energy, period=period, mean_z=mean_z,
                     mean_square_velocity=mean_v2, z_lower=z_lower,
                     z_upper=z_upper)


def _energy_window(well: Well) -> tuple[float, float] | None:
    """Strictly-interior energy range for trapped orbits, or None if the
    well is too shallow to hold one ulp of energy."""
    e_b = well.bottom_energy
    e_s = well.separatrix_energy
    gap = e_s - e_b
    e_lo = max(e_b + _EDGE * gap, math.nextafter(e_b, e_s))
    e_hi = min(e_s - _EDGE * gap, math.nextafter(e_s, e_b))
    if not e_lo < e_hi:
        return None
    return e_lo, e_hi


def _solve_energy(well: Well, target_period: float) -> float | None:
    """Energy whose orbit period matches target_period, if reachable.

    The period grows monotonically from the harmonic limit 2 pi / omega at
    the well bottom towards the separatrix.  Orbits with amplitude under
    ~1e-3 of the well are useless as bracket endpoints: their turning
    points are resolved to ~1e-13 J, which the quadrature amplifies into
    ~1e-4 relative period noise.  The lower endpoint therefore descends a
    fixed amplitude ladder and stops at the first energy whose (accurate)
    period lies below the target; if even the last rung is too slow the
    match is indistinguishable from the bottom orbit and None is returned.
    """
    window = _energy_window(well)
    if window is None:
        return None
    e_floor, e_hi = window
    if math.tau / well.omega >= target_period:
        return None  # even the harmonic bottom orbit is slower
    if orbit_quadratures(well, e_hi).period < target_period:
        return None  # capped: the reachable separatrix side is too fast
    e_b = well.bottom_energy
    gap = well.separatrix_energy - e_b
    e_lo = None
    for frac in (1e-3, 1e-5, 1e-7, 1e-9, 1e-11):
        cand = min(max(e_b + frac * gap, e_floor), e_hi)
        if cand >= e_hi:
            continue
        if orbit_quadratures(well, cand).period < target_period:
            e_lo = cand
            break
    if e_lo is None:
        return None  # match hugs the bottom below quadrature resolution
    return brentq(
        lambda e: orbit_quadratures(well, e).period - target_period,
        e_lo, e_hi, xtol=1e-300, rtol=8.9e-16)


@dataclass(frozen=True)
class LatticeCalibration:
    well: Well  # recentred: the matched orbit's mean height is zero
    orbit: WellOrbit
    target_period: float
    target_mean_square_velocity: float


def calibrate(spec: ExperimentSpec) -> LatticeCalibration:
    """Match the trapped orbit to the bounce model (period, <v^2>).

    With an explicit lattice depth only the energy is solved (the <v^2>
    mismatch is then reported by the orbit, not hidden); otherwise the
    depth is bracketed by scanning the tilt over eight decades and solved
    to machine tolerance.
    """
    kin = derive_kinematics(spec)
    m = spec.atom.mass
    g = spec.constants.g
    two_k = 2.0 * spec.lattice.wavevector
    target_t = kin.tau_b
    target_v2 = kin.mean_square_velocity

    if spec.lattice.depth is not None:
        well = Well(m=m, g=g, two_k=two_k, depth=spec.lattice.depth)
        if well.tilt >= 1.0:
            raise InfeasibleLatticeError(
                f"lattice depth {spec.lattice.depth!r} J cannot hold the "
                f"atom against gravity (2 k V0 = "
                f"{two_k * spec.lattice.depth!r} <= m g = {m * g!r})")
        energy = _solve_energy(well, target_t)
        if energy is None:
            raise InfeasibleLatticeError(
                f"no trapped orbit at depth {spec.lattice.depth!r} J has "
                f"period tau_b = {target_t!r} s")
    else:
        def residual_at(depth: float) -> tuple[float, bool]:
            """<v^2> mismatch at the period-matched energy.

            Continuous across the regime boundaries: below the trapping
            threshold the limit is the bottom orbit (<v^2> -> 0), and
            where double precision cannot push the orbit close enough to
            the separatrix the cap orbit's value is reported, with
            matched=False in both cases.
            """
            well = Well(m=m, g=g, two_k=two_k, depth=depth)
            window = _energy_window(well)
            if window is None:
                return -target_v2, False  # well cannot hold any orbit
            if math.tau / well.omega >= target_t:
                return -target_v2, False  # even the bottom orbit is slower
            cap = orbit_quadratures(well, window[1])
            if cap.period < target_t:
                return cap.mean_square_velocity - target_v2, False
            energy = _solve_energy(well, target_t)
            if energy is None:  # match hugs the bottom: <v^2> -> 0
                return -target_v2, False
            orbit = orbit_quadratures(well, energy)
            return orbit.mean_square_velocity - target_v2, True

        bracket = None
        prev: tuple[float, float] | None = None
        best = -target_v2
        for tilt in np.geomspace(0.999999, 1e-8, 80):
            depth = m * g / (two_k * tilt)
            res, _ = residual_at(depth)
            best = max(best, res)
            if prev is not None and prev[1] * res <= 0.0:
                bracket = (prev[0], depth)
                break
            prev = (depth, res)
        if bracket is None:
            raise InfeasibleLatticeError(
                "matching the period caps the orbit's mean square velocity "
                f"at {best + target_v2!r} (m/s)^2, below the bounce-model "
                f"target {target_v2!r} (m/s)^2; the required orbit lies "
                "beyond double-precision reach of the separatrix")
        depth = brentq(lambda d: residual_at(d)[0], *bracket, rtol=8.9e-16)
        well = Well(m=m, g=g, two_k=two_k, depth=depth)
        energy = _solve_energy(well, target_t)
        if energy is None:
            raise InfeasibleLatticeError(
                "the <v^2> match lands on a separatrix-capped orbit whose "
                f"period cannot reach tau_b = {target_t!r} s")

    orbit = orbit_quadratures(well, energy)
    # recentre so the orbit's time-mean height is zero (the phase engines
    # fix the arm's hold mean at 0 resp. delta_z)
    shift = -orbit.mean_z
    well = replace(well, z_off=well.z_off + shift)
    energy += m * g * shift
    orbit = orbit_quadratures(well, energy)
    return LatticeCalibration(well=well, orbit=orbit, target_period=target_t,
                              target_mean_square_velocity=target_v2)


def integrate_hold(spec: ExperimentSpec,
                   calibration: LatticeCalibration | None = None,
                   h: float | None = None, max_samples: int = 4096,
                   backend=None) -> LatticeTrajectory:
    """Integrate the hold in the calibrated well, starting at the top.

    The default step keeps omega_well * h ~ 3e-5 so the velocity-Verlet
    energy error (quadratic in omega h) stays below ~1e-9 of the orbit
    energy over arbitrarily many steps.
    """
    calib = calibration if calibration is not None else calibrate(spec)
    if h is None:
        h = 3e-5 / calib.well.omega
    n = spec.timing.T_B / h
    if n > _MAX_STEPS:
        raise ValueError(
            f"hold needs {n:.3g} steps at h={h!r} s (cap {_MAX_STEPS}); "
            "pass a coarser h explicitly to accept the accuracy loss")
    return integrate_washboard(
        z0=calib.orbit.z_upper, v0=0.0, duration=spec.timing.T_B, h=h,
        g=spec.constants.g, m=spec.atom.mass, two_k=calib.well.two_k,
        depth=calib.well.depth, z_off=calib.well.z_off,
        max_samples=max_samples, backend=backend)


@dataclass(frozen=True)
class LatticeResult:
    clock: ClockPhases
    calibration: LatticeCalibration
    trajectory: LatticeTrajectory


def lattice_clock_phases(spec: ExperimentSpec,
                         calibration: LatticeCalibration | None = None,
                         h: float | None = None,
                         backend=None) -> LatticeResult:
    """Clock phases with hold averages taken from the washboard ODE.

    corr = (delta_m/hbar)(<v^2>/2 - g <z>) T_B from the integrated lower
    orbit; the upper arm is the identical orbit shifted by delta_z, so
    corr_upper = corr_lower - (delta_m/hbar) g delta_z T_B exactly.
    """
    kin = derive_kinematics(spec)
    calib = calibration if calibration is not None else calibrate(spec)
    traj = integrate_hold(spec, calib, h=h, backend=backend)
    scale = kin.delta_m / spec.constants.hbar
    t_hold = spec.timing.T_B
    corr_lower = scale * (0.5 * traj.mean_square_velocity
                          - spec.constants.g * traj.mean_z) * t_hold
    corr_upper = corr_lower - scale * spec.constants.g * kin.delta_z * t_hold
    clock = ClockPhases(omega=spec.omega, omega0=spec.atom.omega0,
                        t_hold=t_hold, corr_lower=corr_lower,
                        corr_upper=corr_upper)
    return LatticeResult(clock=clock, calibration=calib, trajectory=traj)
