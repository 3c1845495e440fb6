"""Piecewise-parabolic trajectories for both interferometer arms.

Between laser events every path is ballistic, so a trajectory is a list of
closed-form parabola segments plus the events that join them.  The hold is
built from the bounce model: the lattice reverses the atom each time it
falls through the kick height at speed v_b (period tau_b = 2 v_b / g).

The internally excited component is heavier by the mass defect, so each
reversal returns it with speed v_b - delta_v_b; its kicks drift earlier and
lower.  Quantities that are differences of almost-equal numbers (arm
separation during the hold, exit velocity mismatch) are tracked in
dedicated difference variables instead of being recovered by subtracting
coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from bisect import bisect_right

from .model import DerivedKinematics, ExperimentSpec, derive_kinematics

ARM_LOWER = "lower"
ARM_UPPER = "upper"
STATE_GROUND = "ground"
STATE_EXCITED = "excited"

EVENT_BRAGG = "bragg_kick"
EVENT_BLOCH = "bloch_kick"
EVENT_CLOCK = "clock_pulse"
EVENT_LATTICE_ON = "lattice_on"
EVENT_LATTICE_OFF = "lattice_off"


@dataclass(frozen=True)
class Segment:
    """Ballistic arc z(t) = z0 + v0*(t-t0) - g*(t-t0)^2/2 on [t0, t1]."""

    t0: float
    t1: float
    z0: float
    v0: float
    g: float

    @property
    def duration(self) -> float:
        return self.t1 - self.t0

    def position(self, t: float) -> float:
        dt = t - self.t0
        return self.z0 + (self.v0 - 0.5 * self.g * dt) * dt

    def velocity(self, t: float) -> float:
        return self.v0 - self.g * (t - self.t0)

    @property
    def z1(self) -> float:
        return self.position(self.t1)

    @property
    def v1(self) -> float:
        return self.velocity(self.t1)


@dataclass(frozen=True)
class Event:
    t: float
    z: float
    kind: str
    dv: float  # velocity jump applied at t (0 for markers)


@dataclass(frozen=True)
class SequenceTimes:
    """Laser event times: kicks at t1/t2 (opening pair) and t3/t4 (closing)."""

    t1: float
    t2: float
    lattice_on: float
    lattice_off: float
    t3: float
    t4: float


def sequence_times(spec: ExperimentSpec) -> SequenceTimes:
    t = spec.timing
    on = t.T + t.T_prime
    off = on + t.T_B
    return SequenceTimes(t1=0.0, t2=t.T, lattice_on=on, lattice_off=off,
                         t3=off + t.T_prime, t4=off + t.T_prime + t.T)


@dataclass
class ArmTrajectory:
    arm: str
    state: str
    segments: list[Segment]
    events: list[Event]

    @property
    def t_start(self) -> float:
        return self.segments[0].t0

    @property
    def t_end(self) -> float:
        return self.segments[-1].t1

    def _segment_at(self, t: float) -> Segment:
        if not self.t_start <= t <= self.t_end:
            raise ValueError(f"t={t!r} outside [{self.t_start!r}, "
                             f"{self.t_end!r}]")
        starts = [s.t0 for s in self.segments]
        idx = bisect_right(starts, t) - 1
        # zero-length segments share t0; prefer the one containing t
        while idx + 1 < len(self.segments) and self.segments[idx].t1 < t:
            idx += 1
        return self.segments[max(idx, 0)]

    def position(self, t: float) -> float:
        return self._segment_at(t).position(t)

    def velocity(self, t: float) -> float:
        return self._segment_at(t).velocity(t)


@dataclass(frozen=True)
class HoldInterval:
    """One ballistic stretch of the hold, in arm-local coordinates.

    z_off is the start height relative to the arm's kick height; dt is the
    analytic duration (never a difference of absolute times).
    """

    z_off: float
    v0: float
    dt: float


def ground_hold_intervals(kin: DerivedKinematics) -> list[HoldInterval]:
    """Apex fall-in, N-1 full bounces, partial tail of length tau + tau_b/2."""
    apex_off = kin.z_apex - kin.z_kick
    head = HoldInterval(z_off=apex_off, v0=0.0, dt=0.5 * kin.tau_b)
    gaps = [HoldInterval(z_off=0.0, v0=kin.v_b, dt=kin.tau_b)
            for _ in range(kin.n_oscillations - 1)]
    tail = HoldInterval(z_off=0.0, v0=kin.v_b,
                        dt=kin.tau + 0.5 * kin.tau_b)
    return [head, *gaps, tail]


def excited_kick_count(kin: DerivedKinematics) -> int:
    """Ground sees N kicks; the excited copy's shorter period can fit one more."""
    n = kin.n_oscillations
    if kin.tau >= 0.5 * kin.tau_b - n * kin.delta_tau_b:
        return n + 1
    return n


def excited_hold_intervals(kin: DerivedKinematics) -> list[HoldInterval]:
    """Like ground_hold_intervals for the heavier internal state.

    Exit speed v_b - delta_v_b, period tau_b - delta_tau_b, kick height
    dropping by (tau_b - delta_tau_b)*delta_v_b/2 per bounce (the exact
    per-parabola value; equals delta_z_b to first order in the mass ratio).
    """
    n_e = excited_kick_count(kin)
    w = kin.v_b - kin.delta_v_b
    period = kin.tau_b - kin.delta_tau_b
    drop = 0.5 * period * kin.delta_v_b
    head = HoldInterval(z_off=kin.z_apex - kin.z_kick, v0=0.0,
                        dt=0.5 * kin.tau_b)
    gaps = [HoldInterval(z_off=-(j - 1) * drop, v0=w, dt=period)
            for j in range(1, n_e)]
    tail_dt = (kin.tau + (kin.n_oscillations - n_e) * kin.tau_b
               + 0.5 * kin.tau_b + (n_e - 1) * kin.delta_tau_b)
    tail = HoldInterval(z_off=-(n_e - 1) * drop, v0=w, dt=tail_dt)
    return [head, *gaps, tail]


def _hold_segments(intervals: list[HoldInterval], t_on: float, z_kick: float,
                   g: float, kick_dv: float) -> tuple[list[Segment],
                                                      list[Event]]:
    segments = []
    events = []
    t = t_on
    for i, iv in enumerate(intervals):
        if i > 0:
            events.append(Event(t=t, z=z_kick + iv.z_off, kind=EVENT_BLOCH,
                                dv=kick_dv))
        segments.append(Segment(t0=t, t1=t + iv.dt, z0=z_kick + iv.z_off,
                                v0=iv.v0, g=g))
        t += iv.dt
    return segments, events


def _arm_trajectory(spec: ExperimentSpec, kin: DerivedKinematics, arm: str,
                    state: str) -> ArmTrajectory:
    g = spec.constants.g
    timing = spec.timing
    times = sequence_times(spec)
    offset = kin.delta_z if arm == ARM_UPPER else 0.0
    z0 = kin.launch_height  # both arms coincide at launch

    segments: list[Segment] = []
    events: list[Event] = []

    # opening Bragg pair: upper kicked at t1=0, lower at t2=T
    v_first = timing.v0 + timing.delta_v if arm == ARM_UPPER else timing.v0
    if arm == ARM_UPPER:
        events.append(Event(t=0.0, z=z0, kind=EVENT_BRAGG, dv=timing.delta_v))
    seg = Segment(t0=0.0, t1=times.t2, z0=z0, v0=v_first, g=g)
    segments.append(seg)
    v_mid = seg.v1 + (timing.delta_v if arm == ARM_LOWER else 0.0)
    if arm == ARM_LOWER:
        events.append(Event(t=times.t2, z=seg.z1, kind=EVENT_BRAGG,
                            dv=timing.delta_v))
    seg = Segment(t0=times.t2, t1=times.lattice_on, z0=seg.z1, v0=v_mid, g=g)
    segments.append(seg)

    # hold
    z_kick_arm = kin.z_kick + offset
    events.append(Event(t=times.lattice_on, z=seg.z1, kind=EVENT_CLOCK,
                        dv=0.0))
    events.append(Event(t=times.lattice_on, z=seg.z1, kind=EVENT_LATTICE_ON,
                        dv=0.0))
    if state == STATE_GROUND:
        intervals = ground_hold_intervals(kin)
        kick_dv = 2.0 * kin.v_b
    else:
        intervals = excited_hold_intervals(kin)
        kick_dv = 2.0 * kin.v_b - kin.delta_v_b
    hold_segs, hold_events = _hold_segments(intervals, times.lattice_on,
                                            z_kick_arm, g, kick_dv)
    segments.extend(hold_segs)
    events.extend(hold_events)
    last = segments[-1]
    events.append(Event(t=times.lattice_off, z=last.z1,
                        kind=EVENT_LATTICE_OFF, dv=0.0))
    events.append(Event(t=times.lattice_off, z=last.z1, kind=EVENT_CLOCK,
                        dv=0.0))

    # closing Bragg pair: upper kicked at t3, lower at t4
    seg = Segment(t0=times.lattice_off, t1=times.t3, z0=last.z1, v0=last.v1,
                  g=g)
    segments.append(seg)
    v_late = seg.v1 - (timing.delta_v if arm == ARM_UPPER else 0.0)
    if arm == ARM_UPPER:
        events.append(Event(t=times.t3, z=seg.z1, kind=EVENT_BRAGG,
                            dv=-timing.delta_v))
    seg = Segment(t0=times.t3, t1=times.t4, z0=seg.z1, v0=v_late, g=g)
    segments.append(seg)
    if arm == ARM_LOWER:
        events.append(Event(t=times.t4, z=seg.z1, kind=EVENT_BRAGG,
                            dv=-timing.delta_v))
    return ArmTrajectory(arm=arm, state=state, segments=segments,
                         events=events)


def build_arm_trajectories(spec: ExperimentSpec
                           ) -> tuple[ArmTrajectory, ArmTrajectory]:
    """Ground-state (lower, upper) arm trajectories over the full sequence."""
    kin = derive_kinematics(spec)
    lower = _arm_trajectory(spec, kin, ARM_LOWER, STATE_GROUND)
    upper = _arm_trajectory(spec, kin, ARM_UPPER, STATE_GROUND)
    return lower, upper


@dataclass(frozen=True)
class TrajectoryPair:
    """Ground/excited trajectory pair of one arm over the full sequence."""

    ground: ArmTrajectory
    excited: ArmTrajectory
    delta_v_b: float  # per-kick exit-speed deficit of the excited state
    delta_tau_b: float  # per-bounce period deficit
    delta_z_b: float  # first-order per-bounce kick-height drop
    max_separation: float  # 2*N*delta_z_b bound on the intra-arm split


def build_trajectory_pair(spec: ExperimentSpec,
                          arm: str = ARM_LOWER) -> TrajectoryPair:
    kin = derive_kinematics(spec)
    ground = _arm_trajectory(spec, kin, arm, STATE_GROUND)
    excited = _arm_trajectory(spec, kin, arm, STATE_EXCITED)
    return TrajectoryPair(
        ground=ground,
        excited=excited,
        delta_v_b=kin.delta_v_b,
        delta_tau_b=kin.delta_tau_b,
        delta_z_b=kin.delta_z_b,
        max_separation=kin.max_separation,
    )


@dataclass(frozen=True)
class HoldOffset:
    """Ground-minus-excited offsets at lattice-off, and the peak separation."""

    separation: float  # z_ground - z_excited at lattice-off, m
    velocity: float  # v_ground - v_excited at lattice-off, m/s
    max_separation: float  # peak |z_ground - z_excited| during the hold, m


def hold_relative_offset(kin: DerivedKinematics) -> HoldOffset:
    """Walk the merged kick timeline tracking only difference variables.

    Separations (~2 N delta_z_b) are up to 13 orders below the coordinates,
    so subtracting trajectory positions would be pure noise; the difference
    variables evolve through products of small, exactly-known quantities.
    Between its own kick and the partner's, the excited copy moves up while
    the ground copy still falls, which is where the separation peaks.
    """
    n = kin.n_oscillations
    dv = kin.delta_v_b
    dtau = kin.delta_tau_b
    two_vb = 2.0 * kin.v_b
    kick_e = two_vb - dv
    sigma = 0.0
    vrel = dv  # both copies kick together the first time
    peak = 0.0
    for j in range(2, n + 1):
        sigma += vrel * (kin.tau_b - (j - 1) * dtau)
        peak = max(peak, abs(sigma))
        vrel -= kick_e
        sigma += vrel * ((j - 1) * dtau)
        vrel += two_vb
    tail = kin.tau + 0.5 * kin.tau_b
    t_extra = kin.tau_b - n * dtau  # last ground kick -> possible extra kick
    if t_extra <= tail:
        sigma += vrel * t_extra
        peak = max(peak, abs(sigma))
        vrel -= kick_e
        sigma += vrel * (tail - t_extra)
    else:
        sigma += vrel * tail
    peak = max(peak, abs(sigma))
    return HoldOffset(separation=sigma, velocity=vrel, max_separation=peak)
