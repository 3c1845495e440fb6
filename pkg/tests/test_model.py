"""Tests for spec dataclasses and derived kinematics.

The SI reference values below were computed independently with 40-digit
arithmetic from the raw strontium sequence parameters (532 nm lattice,
m = 1.4597e-25 kg, omega0 = 2.6969e15 rad/s, g = 9.81 m/s^2).
"""

from __future__ import annotations

import math
from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from blochclock.model import (
    AtomSpecies,
    apex_hold_interval,
    bloch_partition,
    derive_kinematics,
    epsilon_params,
    thermal_wavelength,
)

from conftest import random_reduced_spec

import numpy as np


class TestBlochPartition:
    def test_exact_multiple(self) -> None:
        part = bloch_partition(10.0, 2.0)
        assert (part.n_oscillations, part.tau) == (5, 0.0)

    def test_just_below_half(self) -> None:
        part = bloch_partition(10.9, 2.0)
        n, tau = part.n_oscillations, part.tau
        assert n == 5
        assert tau == pytest.approx(0.9)

    def test_half_tie_rounds_up(self) -> None:
        # t_hold = (n + 1/2) tau_b sits on the boundary; it belongs to the
        # next reversal with tau = -tau_b / 2.
        part = bloch_partition(11.0, 2.0)
        n, tau = part.n_oscillations, part.tau
        assert n == 6
        assert tau == pytest.approx(-1.0)

    def test_single_half_period(self) -> None:
        part = bloch_partition(1.0, 2.0)
        n, tau = part.n_oscillations, part.tau
        assert n == 1
        assert tau == pytest.approx(-1.0)

    @given(
        st.floats(min_value=1e-4, max_value=1e3),
        st.floats(min_value=0.5, max_value=1e6),
    )
    def test_partition_invariants(self, tau_b: float, ratio: float) -> None:
        t_hold = ratio * tau_b
        part = bloch_partition(t_hold, tau_b)
        n, tau = part.n_oscillations, part.tau
        assert n >= 1
        slack = 4.0 * math.ulp(t_hold)
        assert -0.5 * tau_b - slack <= tau <= 0.5 * tau_b + slack
        assert n * tau_b + tau == pytest.approx(t_hold, rel=1e-12)


class TestReducedKinematics:
    def test_recoil_velocity_and_period(self, reduced_spec) -> None:
        kin = derive_kinematics(reduced_spec)
        assert kin.v_b == pytest.approx(1.0)
        assert kin.tau_b == pytest.approx(2.0 / 9.81, rel=1e-15)
        assert kin.mean_square_velocity == pytest.approx(1.0 / 3.0, rel=1e-15)

    def test_partition(self, reduced_spec) -> None:
        kin = derive_kinematics(reduced_spec)
        assert kin.n_oscillations == 5
        assert kin.tau == 0.0

    def test_epsilons_are_matched(self, reduced_spec) -> None:
        # The demo is tuned so the kinetic and gravitational corrections
        # coincide: eps_k = eps_g = 0.01.
        kin = derive_kinematics(reduced_spec)
        assert kin.eps_k == pytest.approx(0.01, rel=1e-12)
        assert kin.eps_g == pytest.approx(0.01, rel=1e-12)

    def test_geometry(self, reduced_spec) -> None:
        kin = derive_kinematics(reduced_spec)
        g = reduced_spec.constants.g
        assert kin.delta_z == pytest.approx(
            reduced_spec.timing.delta_v * reduced_spec.timing.T, rel=1e-15
        )
        assert kin.z_apex == pytest.approx(kin.v_b**2 / (6.0 * g), rel=1e-12)
        assert kin.z_kick == pytest.approx(-kin.v_b**2 / (3.0 * g), rel=1e-12)


class TestStrontiumKinematics:
    def test_recoil_velocity(self, sr_spec) -> None:
        kin = derive_kinematics(sr_spec)
        assert kin.v_b == pytest.approx(8.53258825191e-3, rel=1e-11)
        assert kin.tau_b == pytest.approx(1.73956947032e-3, rel=1e-11)

    def test_partition(self, sr_spec) -> None:
        kin = derive_kinematics(sr_spec)
        assert kin.n_oscillations == 500
        assert kin.tau == pytest.approx(2.15264840775e-4, rel=1e-9)

    def test_mass_defect(self, sr_spec) -> None:
        kin = derive_kinematics(sr_spec)
        assert kin.delta_m / sr_spec.atom.mass == pytest.approx(
            2.16788375104e-11, rel=1e-11
        )
        assert sr_spec.atom.mass_defect(sr_spec.constants) == kin.delta_m

    def test_relativistic_epsilons(self, sr_spec) -> None:
        kin = derive_kinematics(sr_spec)
        assert kin.eps_k == pytest.approx(1.35010927705e-22, rel=1e-11)
        assert kin.eps_g == pytest.approx(9.31330655782e-21, rel=1e-11)

    def test_arm_separation(self, sr_spec) -> None:
        kin = derive_kinematics(sr_spec)
        assert kin.delta_z == pytest.approx(8.5325e-5, rel=1e-12)
        assert kin.delta_z_b == pytest.approx(3.21779636092e-16, rel=1e-10)
        assert kin.max_separation == pytest.approx(3.21779636092e-13, rel=1e-10)
        assert kin.delta_tau_b == pytest.approx(3.77118438851e-14, rel=1e-10)

    def test_thermal_wavelength(self, sr_spec) -> None:
        lam = thermal_wavelength(sr_spec.atom, sr_spec.constants)
        assert lam == pytest.approx(2.94416844679e-7, rel=1e-11)

    def test_thermal_wavelength_requires_temperature(self, sr_spec) -> None:
        cold = replace(sr_spec.atom, temperature=None)
        with pytest.raises(ValueError):
            thermal_wavelength(cold, sr_spec.constants)


def test_epsilon_params_matches_kinematics(reduced_spec) -> None:
    kin = derive_kinematics(reduced_spec)
    assert epsilon_params(reduced_spec) == (kin.eps_k, kin.eps_g)


def test_apex_hold_interval_equals_t_prime(reduced_spec, sr_spec) -> None:
    # Both shipped sequences satisfy the apex condition, so the derived
    # fall-in time equals the stated T'.
    for spec in (reduced_spec, sr_spec):
        assert apex_hold_interval(spec) == pytest.approx(
            spec.timing.T_prime, rel=1e-9
        )


def test_launch_height_puts_hold_start_at_apex() -> None:
    rng = np.random.default_rng(11)
    for _ in range(50):
        spec = random_reduced_spec(rng)
        kin = derive_kinematics(spec)
        g = spec.constants.g
        t = spec.timing
        # Integrate the lower arm by hand from launch_height to lattice-on.
        z = kin.launch_height
        v = t.v0
        z += v * t.T - 0.5 * g * t.T**2
        v += t.delta_v - g * t.T
        z += v * t.T_prime - 0.5 * g * t.T_prime**2
        v -= g * t.T_prime
        assert v == pytest.approx(0.0, abs=1e-12 * max(abs(t.v0), 1.0))
        assert z == pytest.approx(kin.z_apex, rel=1e-9, abs=1e-15)


def test_with_timing_replaces_fields(reduced_spec) -> None:
    longer = reduced_spec.with_timing(T_B=2.0)
    assert longer.timing.T_B == 2.0
    assert longer.timing.T == reduced_spec.timing.T
    assert longer.atom == reduced_spec.atom


def test_excited_state_is_slower(sr_spec) -> None:
    # The heavier excited state carries a smaller recoil velocity, hence a
    # shorter reversal period and a per-bounce drop.
    kin = derive_kinematics(sr_spec)
    assert kin.delta_v_b == pytest.approx(
        2.0 * kin.v_b * kin.delta_m / sr_spec.atom.mass, rel=1e-12
    )
    assert kin.delta_tau_b == pytest.approx(kin.delta_v_b / 9.81, rel=1e-12)
    assert kin.delta_z_b == pytest.approx(kin.v_b * kin.delta_v_b / 9.81, rel=1e-12)


def test_zero_transition_has_no_mass_defect(reduced_spec) -> None:
    spec = replace(reduced_spec, atom=AtomSpecies(mass=1.0, omega0=0.0))
    kin = derive_kinematics(spec)
    assert kin.delta_m == 0.0
    assert kin.delta_v_b == 0.0
    assert kin.max_separation == 0.0
