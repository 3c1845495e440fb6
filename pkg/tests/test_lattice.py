"""Tests for the tilted-lattice well, orbit quadratures, and calibration.

Oracles:
  * g = 0 turns the well into a plane pendulum whose period is the
    complete elliptic integral 4 K(sin^2(phi0/2)) / omega.
  * For the tilted well, orbit period and averages are cross-checked
    against 50-digit tanh-sinh quadrature of dz / v(z) between turning
    points located by high-precision root finding.
"""

from __future__ import annotations

import math
from dataclasses import replace

import mpmath as mp
import numpy as np
import pytest
from scipy.special import ellipk

from blochclock.kernels import integrate_washboard
from blochclock.lattice import (
    InfeasibleLatticeError,
    Well,
    calibrate,
    integrate_hold,
    lattice_clock_phases,
    orbit_quadratures,
)
from blochclock.model import LatticeConfig, derive_kinematics
from blochclock.phases import perturbative_clock_phases


@pytest.fixture(scope="module")
def reduced_calibration(reduced_spec):
    return calibrate(reduced_spec)


def mp_orbit(well: Well, energy: float):
    """50-digit period, mean z, and mean v^2 for a trapped orbit."""
    with mp.workdps(50):
        m_, g_, two_k, depth, z_off = map(
            mp.mpf, (well.m, well.g, well.two_k, well.depth, well.z_off)
        )
        e = mp.mpf(energy)

        def pot(z):
            return m_ * g_ * z + depth * mp.cos(two_k * (z - z_off))

        guess = orbit_quadratures(well, energy)
        zl = mp.findroot(lambda z: pot(z) - e, mp.mpf(guess.z_lower))
        zu = mp.findroot(lambda z: pot(z) - e, mp.mpf(guess.z_upper))

        def speed(z):
            return mp.sqrt(2 * (e - pot(z)) / m_)

        half_period = mp.quad(lambda z: 1 / speed(z), [zl, zu])
        z_moment = mp.quad(lambda z: z / speed(z), [zl, zu])
        v_moment = mp.quad(speed, [zl, zu])
        period = 2 * half_period
        return (
            float(period),
            float(z_moment / half_period),
            float(v_moment / half_period),
        )


class TestPendulumLimit:
    """With g = 0 the well is a plane pendulum with exact elliptic period."""

    @pytest.mark.parametrize("phi0", [0.3, 1.0, 2.0, 2.8])
    def test_period_matches_elliptic_integral(self, phi0: float) -> None:
        well = Well(m=1.0, g=0.0, two_k=2.0, depth=3.0)
        omega = well.two_k * math.sqrt(well.depth / well.m)
        assert well.omega == pytest.approx(omega, rel=1e-12)
        energy = -well.depth * math.cos(phi0)
        orbit = orbit_quadratures(well, energy)
        want = 4.0 / omega * ellipk(math.sin(0.5 * phi0) ** 2)
        assert orbit.period == pytest.approx(want, rel=1e-9)

    def test_symmetric_orbit_is_centred_on_the_bottom(self) -> None:
        well = Well(m=1.0, g=0.0, two_k=2.0, depth=3.0)
        orbit = orbit_quadratures(well, -well.depth * math.cos(1.2))
        assert orbit.mean_z == pytest.approx(well.z_bottom, abs=1e-10)


class TestOrbitQuadratures:
    @pytest.mark.parametrize("fill", [0.1, 0.5, 0.9])
    def test_against_high_precision_quadrature(
        self, reduced_calibration, fill: float
    ) -> None:
        well = reduced_calibration.well
        energy = well.bottom_energy + fill * (
            well.separatrix_energy - well.bottom_energy
        )
        orbit = orbit_quadratures(well, energy)
        period, mean_z, mean_v2 = mp_orbit(well, energy)
        assert orbit.period == pytest.approx(period, rel=1e-8)
        assert orbit.mean_z == pytest.approx(mean_z, rel=1e-6, abs=1e-10)
        assert orbit.mean_square_velocity == pytest.approx(mean_v2, rel=1e-8)

    def test_turning_points_bracket_the_orbit(self, reduced_calibration) -> None:
        orbit = reduced_calibration.orbit
        well = reduced_calibration.well
        assert orbit.z_lower < well.z_bottom < orbit.z_upper
        for z in (orbit.z_lower, orbit.z_upper):
            assert well.potential(z) == pytest.approx(
                orbit.energy, rel=1e-10, abs=1e-10 * abs(orbit.energy)
            )

    def test_harmonic_limit(self, reduced_calibration) -> None:
        # Orbits near the bottom approach the analytic small-oscillation
        # period 2 pi / omega.
        well = reduced_calibration.well
        gap = well.separatrix_energy - well.bottom_energy
        orbit = orbit_quadratures(well, well.bottom_energy + 1e-4 * gap)
        assert orbit.period == pytest.approx(math.tau / well.omega, rel=1e-3)
        assert orbit.period > math.tau / well.omega


class TestCalibration:
    def test_period_and_velocity_targets(self, reduced_spec, reduced_calibration) -> None:
        kin = derive_kinematics(reduced_spec)
        cal = reduced_calibration
        assert cal.target_period == pytest.approx(kin.tau_b, rel=1e-15)
        assert cal.target_mean_square_velocity == pytest.approx(
            kin.mean_square_velocity, rel=1e-15
        )
        assert cal.orbit.period == pytest.approx(kin.tau_b, rel=1e-8)
        assert cal.orbit.mean_square_velocity == pytest.approx(
            kin.mean_square_velocity, rel=1e-5
        )

    def test_recentred_on_zero_mean_height(self, reduced_calibration) -> None:
        assert abs(reduced_calibration.orbit.mean_z) <= 1e-9

    def test_well_is_deep_and_gently_tilted(self, reduced_calibration) -> None:
        assert reduced_calibration.well.tilt < 0.05
        assert reduced_calibration.well.depth == pytest.approx(
            237.58710730221105, rel=1e-9
        )

    def test_explicit_depth_matches_period_only(self, reduced_spec) -> None:
        spec = replace(
            reduced_spec,
            lattice=LatticeConfig(wavevector=1.0, depth=300.0),
        )
        cal = calibrate(spec)
        kin = derive_kinematics(reduced_spec)
        assert cal.well.depth == 300.0
        assert cal.orbit.period == pytest.approx(kin.tau_b, rel=1e-8)
        # The velocity target is reported, not enforced, at explicit depth.
        assert abs(
            cal.orbit.mean_square_velocity - kin.mean_square_velocity
        ) > 1e-3 * kin.mean_square_velocity

    def test_shallow_lattice_cannot_hold_the_atom(self, reduced_spec) -> None:
        spec = replace(
            reduced_spec, lattice=LatticeConfig(wavevector=1.0, depth=3.0)
        )
        with pytest.raises(InfeasibleLatticeError, match="cannot hold the atom"):
            calibrate(spec)

    def test_slow_well_has_no_matching_orbit(self, reduced_spec) -> None:
        spec = replace(
            reduced_spec, lattice=LatticeConfig(wavevector=1.0, depth=5.0)
        )
        with pytest.raises(InfeasibleLatticeError, match="no trapped orbit"):
            calibrate(spec)

    def test_si_lattice_is_infeasible(self, sr_spec) -> None:
        # The SI recoil orbit would have to hug the separatrix beyond float
        # resolution to reach <v^2> = v_b^2 / 3, so calibration must refuse.
        with pytest.raises(InfeasibleLatticeError):
            calibrate(sr_spec)


class TestHoldIntegration:
    def test_energy_drift_is_small(self, reduced_spec, reduced_calibration) -> None:
        traj = integrate_hold(reduced_spec, calibration=reduced_calibration)
        gap = (
            reduced_calibration.well.separatrix_energy
            - reduced_calibration.well.bottom_energy
        )
        assert traj.energy_drift <= 1e-9 * gap
        assert traj.duration == pytest.approx(reduced_spec.timing.T_B, rel=1e-12)

    def test_averages_match_orbit_quadratures(
        self, reduced_spec, reduced_calibration
    ) -> None:
        traj = integrate_hold(reduced_spec, calibration=reduced_calibration)
        orbit = reduced_calibration.orbit
        assert traj.mean_square_velocity == pytest.approx(
            orbit.mean_square_velocity, rel=1e-5
        )
        assert traj.mean_z == pytest.approx(orbit.mean_z, abs=1e-7)

    def test_halving_the_step_is_converged(
        self, reduced_spec, reduced_calibration
    ) -> None:
        h = 3e-5 / reduced_calibration.well.omega
        coarse = integrate_hold(reduced_spec, calibration=reduced_calibration, h=h)
        fine = integrate_hold(
            reduced_spec, calibration=reduced_calibration, h=0.5 * h
        )
        assert fine.mean_square_velocity == pytest.approx(
            coarse.mean_square_velocity, rel=1e-6
        )

    def test_step_cap(self, reduced_spec, reduced_calibration) -> None:
        with pytest.raises(ValueError, match="coarser h"):
            integrate_hold(reduced_spec, calibration=reduced_calibration, h=1e-9)

    def test_samples_stay_inside_the_orbit(
        self, reduced_spec, reduced_calibration
    ) -> None:
        traj = integrate_hold(reduced_spec, calibration=reduced_calibration)
        orbit = reduced_calibration.orbit
        width = orbit.z_upper - orbit.z_lower
        assert traj.z.min() >= orbit.z_lower - 1e-6 * width
        assert traj.z.max() <= orbit.z_upper + 1e-6 * width


class TestBackends:
    def test_compiled_and_python_agree_exactly(self, reduced_calibration) -> None:
        compiled = pytest.importorskip("blochclock._verlet")
        from blochclock import _verlet_py

        well = reduced_calibration.well
        orbit = reduced_calibration.orbit
        kwargs = dict(
            z0=orbit.z_upper,
            v0=0.0,
            duration=25.0 * orbit.period,
            h=3e-5 / well.omega,
            g=well.g,
            m=well.m,
            two_k=well.two_k,
            depth=well.depth,
            z_off=well.z_off,
        )
        a = integrate_washboard(backend=compiled, **kwargs)
        b = integrate_washboard(backend=_verlet_py, **kwargs)
        assert a.z_end == b.z_end
        assert a.v_end == b.v_end
        assert a.mean_z == b.mean_z
        assert a.mean_square_velocity == b.mean_square_velocity
        assert a.energy_min == b.energy_min
        assert a.energy_max == b.energy_max

    def test_pure_python_env_override(self) -> None:
        import subprocess
        import sys

        code = "import blochclock.kernels as k; print(k.BACKEND)"
        out = subprocess.run(
            [sys.executable, "-c", code],
            capture_output=True,
            text=True,
            env={"PATH": "/usr/bin:/bin", "BLOCHCLOCK_PURE_PYTHON": "1"},
        )
        assert out.stdout.strip() == "python"


class TestLatticeClockPhases:
    def test_matches_perturbative_engine(self, reduced_spec) -> None:
        result = lattice_clock_phases(reduced_spec)
        pert = perturbative_clock_phases(reduced_spec)
        scale = max(abs(pert.corr_lower), abs(pert.corr_upper))
        assert abs(result.clock.corr_lower - pert.corr_lower) <= 1e-5 * scale
        assert abs(result.clock.corr_upper - pert.corr_upper) <= 1e-5 * scale

    def test_arm_offset_is_exact(self, reduced_spec) -> None:
        result = lattice_clock_phases(reduced_spec)
        kin = derive_kinematics(reduced_spec)
        dm_over_h = kin.delta_m / reduced_spec.constants.hbar
        want = (
            result.clock.corr_lower
            - dm_over_h * reduced_spec.constants.g * kin.delta_z
            * reduced_spec.timing.T_B
        )
        assert result.clock.corr_upper == pytest.approx(want, rel=1e-12)

    def test_si_raises(self, sr_spec) -> None:
        with pytest.raises(InfeasibleLatticeError):
            lattice_clock_phases(sr_spec)
