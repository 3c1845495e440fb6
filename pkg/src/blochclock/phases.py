"""Phase accumulation engines.

Two observables are computed from the same ledger machinery:

* the interferometer phase difference between the two arms (ground internal
  state throughout), and
* the Ramsey phases delta accumulated between the clock pulses by the
  internal superposition held in each arm.

Magnitude bookkeeping drives the design.  The rest-mass rate m c^2 / hbar
is ~1e26 rad/s in SI units while the 1/c^2 corrections of interest are
nano-radians over the whole hold, so rest-mass and clock-drive
contributions are carried symbolically as (rate, duration) pairs and only
ever combined analytically: state differences turn the rest-mass pair into
exactly omega0 * T_B, never a float subtraction of two 1e26-scale numbers.
For the same reason the exact-trajectory engine evaluates the
ground/excited path difference interval by interval in closed form, keeping
every term proportional to at least one small model quantity.

Ballistic integrals used throughout (z(t) = z0 + v0 t - g t^2/2):

    POT(z0, v0, dt) = integral z dt  = z0 dt + v0 dt^2/2 - g dt^3/6
    KIN(v0, dt)     = integral v^2 dt = v0^2 dt - v0 g dt^2 + g^2 dt^3/3
    A(z0, v0, dt)   = g*POT - KIN/2   (the 1/c^2 action integrand)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .model import DerivedKinematics, ExperimentSpec, derive_kinematics
from .numeric import neumaier_sum
from .trajectory import (
    ARM_LOWER,
    ARM_UPPER,
    EVENT_BLOCH,
    EVENT_BRAGG,
    ArmTrajectory,
    HoldInterval,
    build_arm_trajectories,
    excited_hold_intervals,
    excited_kick_count,
    ground_hold_intervals,
    hold_relative_offset,
    sequence_times,
)

TAG_REST_MASS = "rest_mass"
TAG_KINETIC = "kinetic"
TAG_POTENTIAL = "newtonian_potential"
TAG_LASER_BRAGG = "laser_bragg"
TAG_LASER_BLOCH = "laser_bloch"
TAG_LASER_CLOCK = "laser_clock"
TAG_SEPARATION = "separation"

STAGE_SPLIT = "split"
STAGE_PRE_HOLD = "pre_hold"
STAGE_HOLD = "hold"
STAGE_POST_HOLD = "post_hold"
STAGE_CLOSE = "close"


def potential_integral(z0: float, v0: float, dt: float, g: float) -> float:
    """integral of z(t) dt over a ballistic arc."""
    return z0 * dt + 0.5 * v0 * dt * dt - g * dt * dt * dt / 6.0

def kinetic_integral(v0: float, dt: float, g: float) -> float:
    """integral of v(t)^2 dt over a ballistic arc."""
    return v0 * v0 * dt - v0 * g * dt * dt + g * g * dt * dt * dt / 3.0


def action_integral(z0: float, v0: float, dt: float, g: float) -> float:
    """A = g*POT - KIN/2; the propagation phase is -(m/hbar)(c^2 dt + A)."""
    return (g * potential_integral(z0, v0, dt, g)
            - 0.5 * kinetic_integral(v0, dt, g))


@dataclass(frozen=True)
class PhaseTerm:
    """One ledger entry.

    Value terms carry `value` (rad) and the time of the segment or event
    they came from.  Deferred terms carry (rate, duration) instead and are
    only combined analytically (rest mass, clock drive).
    """

    tag: str
    value: float | None
    t: float | None = None
    rate: float | None = None  # rad/s
    duration: float | None = None  # s
    note: str = ""


@dataclass
class PhaseLedger:
    arm: str
    state: str
    terms: list[PhaseTerm] = field(default_factory=list)

    def add_value(self, tag: str, value: float, t: float, note: str = ""
                  ) -> None:
        self.terms.append(PhaseTerm(tag=tag, value=value, t=t, note=note))

    def add_rate(self, tag: str, rate: float, duration: float,
                 note: str = "") -> None:
        self.terms.append(PhaseTerm(tag=tag, value=None, rate=rate,
                                    duration=duration, note=note))

    def value_terms(self) -> list[PhaseTerm]:
        return [t for t in self.terms if t.value is not None]

    def rate_terms(self) -> list[PhaseTerm]:
        return [t for t in self.terms if t.value is None]

    def value_total(self) -> float:
        return neumaier_sum(t.value for t in self.value_terms())

    def to_dict(self) -> dict:
        entries = []
        for term in self.terms:
            entry = {"tag": term.tag}
            if term.value is not None:
                entry["value"] = term.value
                entry["t"] = term.t
            else:
                entry["rate"] = term.rate
                entry["duration"] = term.duration
            if term.note:
                entry["note"] = term.note
            entries.append(entry)
        return {"arm": self.arm, "state": self.state, "terms": entries}


def build_arm_ledger(spec: ExperimentSpec, traj: ArmTrajectory) -> PhaseLedger:
    """Ground-state ledger of one arm over the whole sequence.

    Propagation terms per ballistic segment, laser terms per kick.  The
    rest-mass pair (-m c^2/hbar, duration) is recorded, not evaluated; it
    cancels identically in the arm difference.
    """
    const = spec.constants
    m_over_h = spec.atom.mass / const.hbar
    two_k = 2.0 * spec.lattice.wavevector
    ledger = PhaseLedger(arm=traj.arm, state=traj.state)
    ledger.add_rate(TAG_REST_MASS, -(spec.atom.mass * const.c * const.c
                                     / const.hbar),
                    traj.t_end - traj.t_start, note="never evaluated")
    for seg in traj.segments:
        dt = seg.duration
        if dt == 0.0:
            continue
        ledger.add_value(TAG_POTENTIAL,
                         -m_over_h * const.g
                         * potential_integral(seg.z0, seg.v0, dt, const.g),
                         t=seg.t0)
        ledger.add_value(TAG_KINETIC,
                         0.5 * m_over_h
                         * kinetic_integral(seg.v0, dt, const.g),
                         t=seg.t0)
    for ev in traj.events:
        if ev.kind == EVENT_BRAGG:
            ledger.add_value(TAG_LASER_BRAGG,
                             m_over_h * ev.dv * ev.z, t=ev.t)
        elif ev.kind == EVENT_BLOCH:
            # photon momentum 2 hbar k regardless of internal state
            ledger.add_value(TAG_LASER_BLOCH, two_k * ev.z, t=ev.t)
    return ledger


@dataclass(frozen=True)
class InterferometerPhase:
    """Arm phase difference (upper minus lower) and its decomposition."""

    total: float  # rad
    closed_form: float  # -(m g delta_z/hbar)(T + 2 T' + tau)
    propagation: float  # kinetic + potential part of total
    laser: float  # all laser kicks
    stages: dict[str, float]  # propagation difference per sequence stage
    ledger_lower: PhaseLedger
    ledger_upper: PhaseLedger


def _stage_of(t: float, marks: tuple[float, float, float, float]) -> str:
    t2, on, off, t3 = marks
    if t < t2:
        return STAGE_SPLIT
    if t < on:
        return STAGE_PRE_HOLD
    if t < off:
        return STAGE_HOLD
    if t < t3:
        return STAGE_POST_HOLD
    return STAGE_CLOSE


def interferometer_phase(spec: ExperimentSpec) -> InterferometerPhase:
    """Upper-minus-lower phase for the ground-state interferometer."""
    kin = derive_kinematics(spec)
    times = sequence_times(spec)
    lower, upper = build_arm_trajectories(spec)
    led_lower = build_arm_ledger(spec, lower)
    led_upper = build_arm_ledger(spec, upper)

    # rest-mass pairs cancel identically: same state, same duration
    rm_lower = led_lower.rate_terms()
    rm_upper = led_upper.rate_terms()
    assert len(rm_lower) == len(rm_upper) == 1
    assert rm_lower[0].rate == rm_upper[0].rate
    assert rm_lower[0].duration == rm_upper[0].duration

    marks = (times.t2, times.lattice_on, times.lattice_off, times.t3)
    signed = []
    stages: dict[str, list[float]] = {
        STAGE_SPLIT: [], STAGE_PRE_HOLD: [], STAGE_HOLD: [],
        STAGE_POST_HOLD: [], STAGE_CLOSE: [],
    }
    prop = []
    laser = []
    for sign, ledger in ((1.0, led_upper), (-1.0, led_lower)):
        for term in ledger.value_terms():
            signed.append(sign * term.value)
            if term.tag in (TAG_KINETIC, TAG_POTENTIAL):
                prop.append(sign * term.value)
                stages[_stage_of(term.t, marks)].append(sign * term.value)
            else:
                laser.append(sign * term.value)
    timing = spec.timing
    closed = (-spec.atom.mass * spec.constants.g * kin.delta_z
              / spec.constants.hbar
              * (timing.T + 2.0 * timing.T_prime + kin.tau))
    return InterferometerPhase(
        total=neumaier_sum(signed),
        closed_form=closed,
        propagation=neumaier_sum(prop),
        laser=neumaier_sum(laser),
        stages={name: neumaier_sum(vals) for name, vals in stages.items()},
        ledger_lower=led_lower,
        ledger_upper=led_upper,
    )


@dataclass(frozen=True)
class ClockPhases:
    """Ramsey phases of both arms, split to preserve the small parts.

    delta = (omega - omega0) * T_B + corr.  The detuning phase can reach
    1e15 rad in SI units; corr is nano-radian scale.  Keeping them separate
    lets observables cancel the common part exactly.
    """

    omega: float
    omega0: float
    t_hold: float
    corr_lower: float  # rad
    corr_upper: float  # rad

    @property
    def detuning_phase(self) -> float:
        return (self.omega - self.omega0) * self.t_hold

    @property
    def delta_lower(self) -> float:
        return self.detuning_phase + self.corr_lower

    @property
    def delta_upper(self) -> float:
        return self.detuning_phase + self.corr_upper

    @property
    def delta_diff(self) -> float:
        """delta_upper - delta_lower with the detuning phase cancelled."""
        return self.corr_upper - self.corr_lower


def perturbative_clock_phases(spec: ExperimentSpec) -> ClockPhases:
    """Bounce-averaged closed form.

    corr = omega0 T_B (<v^2>/2 - g <z>)/c^2 with <v^2> = v_b^2/3 and hold
    mean heights 0 (lower) and delta_z (upper); exact when tau = 0.
    """
    kin = derive_kinematics(spec)
    t_hold = spec.timing.T_B
    omega0 = spec.atom.omega0
    return ClockPhases(
        omega=spec.omega,
        omega0=omega0,
        t_hold=t_hold,
        corr_lower=omega0 * t_hold * kin.eps_k,
        corr_upper=omega0 * t_hold * (kin.eps_k - kin.eps_g),
    )


def _interval_actions(intervals: list[HoldInterval], z_kick: float,
                      g: float) -> list[float]:
    return [action_integral(z_kick + iv.z_off, iv.v0, iv.dt, g)
            for iv in intervals]


def path_clock_phases(spec: ExperimentSpec) -> ClockPhases:
    """First-order mass-defect phase integrated along the ground bounce path.

    corr = -(delta_m/hbar) * sum A over the actual hold intervals; agrees
    with the closed form exactly at tau = 0 and keeps the tau != 0 partial
    bounce.
    """
    kin = derive_kinematics(spec)
    g = spec.constants.g
    scale = -kin.delta_m / spec.constants.hbar
    intervals = ground_hold_intervals(kin)
    corr_lower = scale * neumaier_sum(_interval_actions(intervals, kin.z_kick,
                                                        g))
    corr_upper = scale * neumaier_sum(_interval_actions(
        intervals, kin.z_kick + kin.delta_z, g))
    return ClockPhases(omega=spec.omega, omega0=spec.atom.omega0,
                       t_hold=spec.timing.T_B, corr_lower=corr_lower,
                       corr_upper=corr_upper)


def single_oscillation_correction(spec: ExperimentSpec) -> float:
    """corr accumulated over one full bounce of the centred lower arm.

    N of these plus the tau = 0 half-bounce head/tail reproduce the full
    hold: corr_lower(path) = N * single at tau = 0.
    """
    kin = derive_kinematics(spec)
    g = spec.constants.g
    return (-kin.delta_m / spec.constants.hbar
            * action_integral(kin.z_kick, kin.v_b, kin.tau_b, g))


@dataclass(frozen=True)
class HoldPhaseBreakdown:
    """State-difference pieces for one arm's hold (all rad).

    mass_defect_path: -(delta_m/hbar) * sum A along the excited intervals.
    trajectory_mismatch: -(m/hbar) * sum (A_excited - A_ground), evaluated
        interval by interval in exact small-difference form.
    laser: Bloch kick phase differences 2k * (z_excited_kick - z_kick).
    separation: endpoint term mean-momentum * offset / hbar at lattice-off.
    """

    mass_defect_path: float
    trajectory_mismatch: float
    laser: float
    separation: float

    @property
    def correction(self) -> float:
        return neumaier_sum((self.mass_defect_path, self.trajectory_mismatch,
                             self.laser, self.separation))


def _action_difference(z_kick: float, g: float, z_off_e: float, v_e: float,
                       dt_e: float, v_g: float, dt_g: float, ddt: float,
                       dv: float) -> float:
    """A(z_kick + z_off_e, v_e, dt_e) - A(z_kick, v_g, dt_g).

    ddt = dt_e - dt_g and dv = v_g - v_e are passed as exactly-known model
    quantities; the expansion keeps a small factor (ddt, dv or z_off_e) in
    every term, so the result is immune to the up-to-13-orders cancellation
    a direct subtraction of the two actions would suffer.
    """
    term_z = g * z_kick * ddt + g * z_off_e * dt_e
    term_v2 = -0.5 * (v_g * v_g * ddt - dv * (v_e + v_g) * dt_e)
    term_cross = g * (v_g * ddt * (dt_e + dt_g) - dv * dt_e * dt_e)
    term_cube = -(g * g / 3.0) * ddt * (dt_e * dt_e + dt_e * dt_g
                                        + dt_g * dt_g)
    return term_z + term_v2 + term_cross + term_cube


@dataclass(frozen=True)
class NonperturbativeResult:
    """Exact-trajectory clock phases plus the perturbative references."""

    clock: ClockPhases  # exact corrections
    path_reference: ClockPhases  # first order along the ground path
    closed_form: ClockPhases  # bounce-averaged closed form
    breakdown_lower: HoldPhaseBreakdown
    breakdown_upper: HoldPhaseBreakdown
    discrepancy_lower: float  # exact - path corr, rad
    discrepancy_upper: float
    discrepancy_diff: float  # same for the arm difference delta_u - delta_l
    residual_scale: float  # derived 2 N (N-1) (m/hbar) (v_b^3/g) (dm/m)^2
    n_ground_kicks: int
    n_excited_kicks: int


def _hold_breakdown(spec: ExperimentSpec, kin: DerivedKinematics,
                    z_kick: float) -> HoldPhaseBreakdown:
    """Exact ground/excited hold phase difference pieces for one arm."""
    const = spec.constants
    g = const.g
    m_over_h = spec.atom.mass / const.hbar
    n = kin.n_oscillations
    n_e = excited_kick_count(kin)
    dv = kin.delta_v_b
    dtau = kin.delta_tau_b
    w = kin.v_b - dv
    period = kin.tau_b - dtau
    drop = 0.5 * period * dv
    two_k = 2.0 * spec.lattice.wavevector

    # -(delta_m/hbar) sum A along the excited intervals (head included)
    excited = excited_hold_intervals(kin)
    mass_defect_path = (-kin.delta_m / const.hbar
                        * neumaier_sum(_interval_actions(excited, z_kick, g)))

    # -(m/hbar) sum (A_e - A_g); the head interval is shared and drops out
    diffs = []
    for j in range(1, n):  # paired full gaps
        diffs.append(_action_difference(
            z_kick, g, z_off_e=-(j - 1) * drop, v_e=w, dt_e=period,
            v_g=kin.v_b, dt_g=kin.tau_b, ddt=-dtau, dv=dv))
    dt_g_tail = kin.tau + 0.5 * kin.tau_b
    if n_e == n:
        ddt_tail = (n - 1) * dtau
        diffs.append(_action_difference(
            z_kick, g, z_off_e=-(n - 1) * drop, v_e=w,
            dt_e=dt_g_tail + ddt_tail, v_g=kin.v_b, dt_g=dt_g_tail,
            ddt=ddt_tail, dv=dv))
    else:
        # the excited copy squeezes in one extra kick just before the end:
        # its gap N pairs with the ground tail, leaving a short leftover arc
        ddt_tail = (0.5 * kin.tau_b - kin.tau) - dtau
        diffs.append(_action_difference(
            z_kick, g, z_off_e=-(n - 1) * drop, v_e=w, dt_e=period,
            v_g=kin.v_b, dt_g=dt_g_tail, ddt=ddt_tail, dv=dv))
        dt_left = kin.tau - 0.5 * kin.tau_b + n * dtau
        diffs.append(action_integral(z_kick - n * drop, w, dt_left, g))
    trajectory_mismatch = -spec.atom.mass / const.hbar * neumaier_sum(diffs)

    # Bloch kick phase differences: 2k (z_excited_kick - z_ground_kick)
    laser_terms = [-two_k * (j - 1) * drop for j in range(1, min(n, n_e) + 1)]
    if n_e > n:
        laser_terms.append(two_k * (z_kick - n * drop))
    laser = neumaier_sum(laser_terms)

    # endpoint separation phase: mean momentum times offset at lattice-off
    offset = hold_relative_offset(kin)
    v_ground_end = -g * kin.tau
    separation = (m_over_h * (v_ground_end - 0.5 * offset.velocity)
                  * offset.separation)

    return HoldPhaseBreakdown(
        mass_defect_path=mass_defect_path,
        trajectory_mismatch=trajectory_mismatch,
        laser=laser,
        separation=separation,
    )


def exact_clock_phases(spec: ExperimentSpec) -> NonperturbativeResult:
    """Clock phases from the exact ground/excited bounce trajectories.

    No expansion in delta_m/m beyond the model's per-kick exit speed
    v_b - delta_v_b: the heavier copy's drifting kicks, its actual path,
    the Bloch laser phases it samples and the residual ground/excited
    offset at the second clock pulse are all evaluated in closed form.
    """
    kin = derive_kinematics(spec)
    path = path_clock_phases(spec)
    closed = perturbative_clock_phases(spec)
    lower = _hold_breakdown(spec, kin, kin.z_kick)
    upper = _hold_breakdown(spec, kin, kin.z_kick + kin.delta_z)
    corr_lower = lower.correction
    corr_upper = upper.correction
    clock = ClockPhases(omega=spec.omega, omega0=spec.atom.omega0,
                        t_hold=spec.timing.T_B, corr_lower=corr_lower,
                        corr_upper=corr_upper)
    ratio = kin.delta_m / spec.atom.mass
    n = kin.n_oscillations
    residual_scale = (2.0 * n * (n - 1) * spec.atom.mass
                      / spec.constants.hbar * kin.v_b ** 3
                      / spec.constants.g * ratio * ratio)
    disc_lower = corr_lower - path.corr_lower
    disc_upper = corr_upper - path.corr_upper
    return NonperturbativeResult(
        clock=clock,
        path_reference=path,
        closed_form=closed,
        breakdown_lower=lower,
        breakdown_upper=upper,
        discrepancy_lower=disc_lower,
        discrepancy_upper=disc_upper,
        discrepancy_diff=disc_upper - disc_lower,
        residual_scale=residual_scale,
        n_ground_kicks=n,
        n_excited_kicks=excited_kick_count(kin),
    )
