"""Interference observables: exit-port populations and clock signals.

Each arm's internal clock accumulates a phase during the hold (delta_lower
and delta_upper, "dd" and "du" below); the recombiner then distributes the
population over four ports.  The two ground-state ports j in {0, 1} carry

    P_j = (1/16) [ sin^2(dd/2) + sin^2(du/2)
                   + 2 (-1)^j cos(phi + (du - dd)/2) sin(dd/2) sin(du/2) ]

where phi is the arm phase difference (upper minus lower).  Their sum is a
Ramsey fringe in the drive detuning,

    P_g = (1/8) [1 - cos((du - dd)/2) cos((du + dd)/2)],

whose contrast cos((du - dd)/2) = cos(eps_g omega0 T_B / 2) shrinks as the
two arms' clock rates are pulled apart by the height difference, and whose
centre sits at the motion- and height-averaged transition frequency
omega0 (1 - eps_k + eps_g/2).  The port asymmetry

    D_g = P_0 - P_1 = (1/4) cos(phi + (du - dd)/2) sin(dd/2) sin(du/2)

needs the cross term, i.e. coherence between the two clock evolutions; a
decohered (which-path-marked) mixture keeps the sin^2 terms and has
D_g = 0 identically.  Both P_g and D_g are at most 1/4 because the other
two ports hold the remaining population.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .model import ExperimentSpec, derive_kinematics
from .numeric import reduce_two_pi, reduce_two_pi_array
from .phases import (ClockPhases, InterferometerPhase, exact_clock_phases,
                     interferometer_phase, path_clock_phases,
                     perturbative_clock_phases)


def _wrap(x):
    """Reduce scalar or array angles to (-pi, pi]."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        return reduce_two_pi(float(arr))
    return reduce_two_pi_array(arr)


def _half_angles(delta_lower, delta_upper):
    return _wrap(np.asarray(delta_lower, float) * 0.5), \
        _wrap(np.asarray(delta_upper, float) * 0.5)


def port_probability(delta_lower, delta_upper, phase_diff, port: int):
    """Population of ground-state exit port `port` (0 or 1)."""
    if port not in (0, 1):
        raise ValueError(f"port must be 0 or 1, got {port!r}")
    hd, hu = _half_angles(delta_lower, delta_upper)
    sd, su = np.sin(hd), np.sin(hu)
    arg = _wrap(np.asarray(phase_diff, float)) + (hu - hd)
    sign = 1.0 if port == 0 else -1.0
    p = (sd * sd + su * su + 2.0 * sign * np.cos(arg) * sd * su) / 16.0
    return p if p.ndim else float(p)


def mixture_port_probability(delta_lower, delta_upper):
    """Either ground port after which-path decoherence (no cross term)."""
    hd, hu = _half_angles(delta_lower, delta_upper)
    sd, su = np.sin(hd), np.sin(hu)
    p = (sd * sd + su * su) / 16.0
    return p if p.ndim else float(p)


def total_ground_probability(delta_lower, delta_upper):
    """P_g = P_0 + P_1, the Ramsey signal (phase-diff independent)."""
    hd, hu = _half_angles(delta_lower, delta_upper)
    p = 0.125 * (1.0 - np.cos(hu - hd) * np.cos(hu + hd))
    return p if p.ndim else float(p)


def probability_difference(delta_lower, delta_upper, phase_diff):
    """D_g = P_0 - P_1; nonzero only while the clock states stay coherent."""
    hd, hu = _half_angles(delta_lower, delta_upper)
    arg = _wrap(np.asarray(phase_diff, float)) + (hu - hd)
    d = 0.25 * np.cos(arg) * np.sin(hd) * np.sin(hu)
    return d if d.ndim else float(d)


def visibility_envelope(eps_g, omega0: float, t_hold):
    """Ramsey fringe contrast cos(eps_g * omega0 * t_hold / 2)."""
    v = np.cos(0.5 * np.asarray(eps_g, float) * omega0
               * np.asarray(t_hold, float))
    return v if v.ndim else float(v)


def fractional_frequency_shift(spec: ExperimentSpec) -> float:
    """(<omega0> - omega0)/omega0 = -eps_k + eps_g/2 for the upper arm."""
    kin = derive_kinematics(spec)
    return -kin.eps_k + 0.5 * kin.eps_g


def mean_transition_frequency(spec: ExperimentSpec) -> float:
    return spec.atom.omega0 * (1.0 + fractional_frequency_shift(spec))


# ---------------------------------------------------------------------------
# precision route: build the trig arguments from a ClockPhases so the tiny
# corrections are never rounded into the (large) detuning phase


def _clock_half_angles(clock: ClockPhases):
    half_det = reduce_two_pi(0.5 * clock.detuning_phase)
    hd = half_det + 0.5 * clock.corr_lower
    hu = half_det + 0.5 * clock.corr_upper
    return hd, hu


@dataclass(frozen=True)
class PortSignal:
    p0: float
    p1: float

    @property
    def total_ground(self) -> float:
        return self.p0 + self.p1

    @property
    def difference(self) -> float:
        return self.p0 - self.p1


def interference_ports(clock: ClockPhases, phase_diff: float) -> PortSignal:
    """Both ground ports from the clock phases and the arm phase difference.

    The cross-term argument keeps (du - dd)/2 as the exact difference of
    the hold corrections, so contrast loss far below one ulp of the raw
    detuning phase still registers.
    """
    hd, hu = _clock_half_angles(clock)
    sd, su = math.sin(hd), math.sin(hu)
    arg = reduce_two_pi(phase_diff) + 0.5 * clock.delta_diff
    base = sd * sd + su * su
    cross = 2.0 * math.cos(arg) * sd * su
    return PortSignal(p0=(base + cross) / 16.0, p1=(base - cross) / 16.0)


def ramsey_ground_probability(clock: ClockPhases) -> float:
    """P_g with the contrast factor formed from the exact correction gap."""
    half_diff = 0.5 * clock.delta_diff
    half_sum = reduce_two_pi(reduce_two_pi(clock.detuning_phase)
                             + 0.5 * (clock.corr_lower + clock.corr_upper))
    return 0.125 * (1.0 - math.cos(half_diff) * math.cos(half_sum))


# ---------------------------------------------------------------------------
# clock engines


def _exact_engine(spec: ExperimentSpec) -> ClockPhases:
    return exact_clock_phases(spec).clock


def _lattice_engine(spec: ExperimentSpec) -> ClockPhases:
    from .lattice import lattice_clock_phases
    return lattice_clock_phases(spec).clock


ENGINES: dict[str, Callable[[ExperimentSpec], ClockPhases]] = {
    "perturbative": perturbative_clock_phases,
    "path": path_clock_phases,  # bounce-model reference, evaluated per arc
    "nonperturbative": _exact_engine,
    "lattice_ode": _lattice_engine,
}


def clock_engine(name: str) -> Callable[[ExperimentSpec], ClockPhases]:
    try:
        return ENGINES[name]
    except KeyError:
        raise ValueError(f"unknown engine {name!r}; expected one of "
                         f"{sorted(ENGINES)}") from None


@dataclass(frozen=True)
class Observables:
    engine: str
    clock: ClockPhases
    interferometer: InterferometerPhase
    ports: PortSignal
    ramsey_ground: float
    visibility: float
    mean_transition_frequency: float
    fractional_shift: float


def simulate_observables(spec: ExperimentSpec,
                         engine: str = "perturbative") -> Observables:
    """Full single-point pipeline: trajectories, phases, then the ports."""
    kin = derive_kinematics(spec)
    clock = clock_engine(engine)(spec)
    interf = interferometer_phase(spec)
    ports = interference_ports(clock, interf.total)
    return Observables(
        engine=engine,
        clock=clock,
        interferometer=interf,
        ports=ports,
        ramsey_ground=ramsey_ground_probability(clock),
        visibility=visibility_envelope(kin.eps_g, spec.atom.omega0,
                                       spec.timing.T_B),
        mean_transition_frequency=mean_transition_frequency(spec),
        fractional_shift=fractional_frequency_shift(spec),
    )


# ---------------------------------------------------------------------------
# parameter scans

SCAN_AXES = ("T_B", "omega", "delta_z")


@dataclass(frozen=True)
class ScanResult:
    axis: str
    engine: str
    values: np.ndarray
    p0: np.ndarray
    p1: np.ndarray
    total_ground: np.ndarray
    difference: np.ndarray
    corr_lower: np.ndarray
    corr_upper: np.ndarray
    detuning_phase: np.ndarray
    phase_diff: np.ndarray


def spec_at(spec: ExperimentSpec, axis: str, value: float) -> ExperimentSpec:
    """The spec with one scanned quantity replaced (and timing rebalanced)."""
    timing = spec.timing
    if axis == "T_B":
        return spec.with_timing(T_B=float(value))
    if axis == "omega":
        return replace(spec, omega=float(value))
    if axis == "delta_z":
        delta_v = float(value) / timing.T
        t_prime = (timing.v0 + delta_v) / spec.constants.g - timing.T
        if t_prime <= 0.0:
            raise ValueError(
                f"delta_z = {value!r} m needs delta_v = {delta_v!r} m/s, "
                "which puts the shared apex before the second splitting "
                "pulse (derived T_prime <= 0)")
        return spec.with_timing(delta_v=delta_v, T_prime=t_prime)
    raise ValueError(f"unknown scan axis {axis!r}; expected one of "
                     f"{SCAN_AXES}")


def _closed_form_phase_diff(spec: ExperimentSpec) -> float:
    kin = derive_kinematics(spec)
    timing = spec.timing
    return (-spec.atom.mass * spec.constants.g * kin.delta_z
            / spec.constants.hbar
            * (timing.T + 2.0 * timing.T_prime + kin.tau))


def _assemble(axis: str, engine: str, values: np.ndarray, corr_l: np.ndarray,
              corr_u: np.ndarray, det: np.ndarray,
              phase: np.ndarray) -> ScanResult:
    half_det = reduce_two_pi_array(0.5 * det)
    hd = half_det + 0.5 * corr_l
    hu = half_det + 0.5 * corr_u
    sd, su = np.sin(hd), np.sin(hu)
    arg = reduce_two_pi_array(phase) + 0.5 * (corr_u - corr_l)
    base = sd * sd + su * su
    cross = 2.0 * np.cos(arg) * sd * su
    p0 = (base + cross) / 16.0
    p1 = (base - cross) / 16.0
    return ScanResult(axis=axis, engine=engine, values=values, p0=p0, p1=p1,
                      total_ground=p0 + p1, difference=p0 - p1,
                      corr_lower=corr_l, corr_upper=corr_u,
                      detuning_phase=det, phase_diff=phase)


def scan(spec: ExperimentSpec, axis: str, values,
         engine: str = "perturbative") -> ScanResult:
    """Sweep one axis and evaluate the port signals at every point.

    T_B sweeps rebucket the hold into oscillations; omega sweeps reuse the
    hold corrections (they do not depend on the drive) so they are cheap
    for every engine; delta_z sweeps change the splitting velocity at
    fixed T and re-derive T_prime from the shared-apex condition.
    """
    values = np.atleast_1d(np.asarray(values, dtype=float))
    if axis not in SCAN_AXES:
        raise ValueError(f"unknown scan axis {axis!r}; expected one of "
                         f"{SCAN_AXES}")
    kin = derive_kinematics(spec)
    omega0 = spec.atom.omega0

    if axis == "omega":
        # hold corrections are drive-independent: one engine call
        clock = clock_engine(engine)(spec)
        corr_l = np.full_like(values, clock.corr_lower)
        corr_u = np.full_like(values, clock.corr_upper)
        det = (values - omega0) * spec.timing.T_B
        phase = np.full_like(values, _closed_form_phase_diff(spec))
        return _assemble(axis, engine, values, corr_l, corr_u, det, phase)

    if engine == "perturbative":
        if axis == "T_B":
            n = np.floor(values / kin.tau_b + 0.5)
            if np.any(n < 1.0):
                raise ValueError("every scanned hold must cover at least "
                                 "one lattice oscillation (n >= 1)")
            tau = values - n * kin.tau_b
            corr_l = omega0 * values * kin.eps_k
            corr_u = omega0 * values * (kin.eps_k - kin.eps_g)
            det = (spec.omega - omega0) * values
            timing = spec.timing
            phase = (-spec.atom.mass * spec.constants.g * kin.delta_z
                     / spec.constants.hbar
                     * (timing.T + 2.0 * timing.T_prime + tau))
        else:  # delta_z
            timing = spec.timing
            delta_v = values / timing.T
            t_prime = (timing.v0 + delta_v) / spec.constants.g - timing.T
            if np.any(t_prime <= 0.0):
                raise ValueError("delta_z sweep reaches separations whose "
                                 "derived T_prime <= 0")
            eps_g = spec.constants.g * values / spec.constants.c ** 2
            t_b = spec.timing.T_B
            corr_l = np.full_like(values, omega0 * t_b * kin.eps_k)
            corr_u = omega0 * t_b * (kin.eps_k - eps_g)
            det = np.full_like(values, (spec.omega - omega0) * t_b)
            phase = (-spec.atom.mass * spec.constants.g * values
                     / spec.constants.hbar
                     * (timing.T + 2.0 * t_prime + kin.tau))
        return _assemble(axis, engine, values, corr_l, corr_u, det, phase)

    run = clock_engine(engine)
    corr_l = np.empty_like(values)
    corr_u = np.empty_like(values)
    det = np.empty_like(values)
    phase = np.empty_like(values)
    for i, value in enumerate(values):
        spec_i = spec_at(spec, axis, value)
        clock = run(spec_i)
        corr_l[i] = clock.corr_lower
        corr_u[i] = clock.corr_upper
        det[i] = clock.detuning_phase
        phase[i] = _closed_form_phase_diff(spec_i)
    return _assemble(axis, engine, values, corr_l, corr_u, det, phase)


def extract_resonance(values, signal) -> float:
    """Locate the Ramsey minimum by a three-point parabola around argmin.

    Assumes the window covers a single fringe; with several fringes in
    range the global minimum wins.
    """
    values = np.asarray(values, dtype=float)
    signal = np.asarray(signal, dtype=float)
    if values.shape != signal.shape or values.ndim != 1 or len(values) < 3:
        raise ValueError("need matching 1-d arrays with >= 3 samples")
    i = int(np.argmin(signal))
    if i == 0 or i == len(values) - 1:
        return float(values[i])
    denom = signal[i - 1] - 2.0 * signal[i] + signal[i + 1]
    if denom <= 0.0:
        return float(values[i])
    shift = 0.5 * (signal[i - 1] - signal[i + 1]) / denom
    return float(values[i] + shift * 0.5 * (values[i + 1] - values[i - 1]))


def fringe_contrast(signal) -> float:
    """Contrast 4*(max - min) of a full Ramsey fringe in P_g."""
    signal = np.asarray(signal, dtype=float)
    return float(4.0 * (signal.max() - signal.min()))
