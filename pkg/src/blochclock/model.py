"""Core data model for the lattice-hold clock interferometer.

An experiment is: launch upward, Bragg pair splitting the motional state by
delta_v, a first clock pi/2 pulse, a hold of duration T_B in a vertical
lattice that bounces both arms (Bloch-oscillation style reversals every
tau_B), a second clock pulse, and a closing Bragg pair.  The dataclasses
here carry the inputs; `derive_kinematics` computes everything the phase
engines share (bounce period, arm separation, 1/c^2 parameters, hold
partition).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

# SI defaults
C_LIGHT = 299792458.0  # m/s
HBAR = 1.054571817e-34  # J s
K_BOLTZMANN = 1.380649e-23  # J/K
G_STANDARD = 9.81  # m/s^2

MODE_SI = "si"
MODE_REDUCED = "reduced"


@dataclass(frozen=True)
class PhysicalConstants:
    """c, g, hbar, k_B.  In reduced-units mode c is finite and user-set."""

    c: float = C_LIGHT
    g: float = G_STANDARD
    hbar: float = HBAR
    k_B: float = K_BOLTZMANN

    @staticmethod
    def reduced(c: float, g: float = G_STANDARD, hbar: float = 1.0,
                k_B: float = 1.0) -> "PhysicalConstants":
        return PhysicalConstants(c=c, g=g, hbar=hbar, k_B=k_B)


@dataclass(frozen=True)
class AtomSpecies:
    mass: float  # ground-state rest mass, kg
    omega0: float  # clock transition angular frequency, rad/s
    temperature: float | None = None  # K, for thermal-wavelength checks

    def mass_defect(self, constants: PhysicalConstants) -> float:
        """Internal-energy mass difference hbar*omega0/c^2 (kg)."""
        return constants.hbar * self.omega0 / (constants.c * constants.c)


@dataclass(frozen=True)
class LatticeConfig:
    wavevector: float  # single-photon wavevector k, 1/m
    depth: float | None = None  # lattice depth V0, J (None: engine calibrates)


@dataclass(frozen=True)
class TimingConfig:
    v0: float  # launch velocity, m/s (upward positive)
    delta_v: float  # Bragg velocity separation, m/s
    T: float  # spacing of the pulses within a Bragg pair, s
    T_prime: float  # second Bragg pulse -> lattice on, s
    T_B: float  # hold duration, s


@dataclass(frozen=True)
class ExperimentSpec:
    constants: PhysicalConstants
    atom: AtomSpecies
    lattice: LatticeConfig
    timing: TimingConfig
    omega: float  # clock drive angular frequency, rad/s
    mode: str = MODE_SI

    def with_timing(self, **changes) -> "ExperimentSpec":
        return replace(self, timing=replace(self.timing, **changes))


@dataclass(frozen=True)
class BlochPartition:
    """Hold decomposition T_B = N*tau_B + tau with tau in [-tau_B/2, tau_B/2)."""

    n_oscillations: int
    tau: float


def bloch_partition(t_hold: float, tau_b: float) -> BlochPartition:
    n = math.floor(t_hold / tau_b + 0.5)
    return BlochPartition(n_oscillations=n, tau=t_hold - n * tau_b)


@dataclass(frozen=True)
class DerivedKinematics:
    """Everything downstream engines share, computed once from a spec."""

    v_b: float  # bounce reversal speed hbar*k/m, m/s
    tau_b: float  # bounce period 2*v_b/g, s
    delta_z: float  # arm separation delta_v*T, m
    mean_square_velocity: float  # v_b^2/3 over one bounce, (m/s)^2
    n_oscillations: int
    tau: float  # partial-oscillation offset, s
    z_kick: float  # lower-arm reversal height (mean height = 0), m
    z_apex: float  # lower-arm bounce apex, m
    launch_height: float  # z at t=0 placing the lower hold mean at 0, m
    eps_k: float  # kinetic 1/c^2 parameter v_b^2/(6 c^2)
    eps_g: float  # gravitational 1/c^2 parameter g*delta_z/c^2
    delta_m: float  # mass defect hbar*omega0/c^2, kg
    delta_v_b: float  # per-kick exit-speed deficit of the excited state, m/s
    delta_tau_b: float  # per-bounce period deficit delta_v_b/g, s
    delta_z_b: float  # per-bounce kick-height drop v_b*delta_v_b/g, m
    max_separation: float  # 2*N*delta_z_b upper bound on arm-internal split, m


def derive_kinematics(spec: ExperimentSpec) -> DerivedKinematics:
    """Shared kinematics of the hold.

    The lower arm's hold is centred so its time-mean height is zero: the
    reversal height is -v_b^2/(3g) and the bounce apex +v_b^2/(6g).
    """
    const = spec.constants
    atom = spec.atom
    timing = spec.timing
    v_b = const.hbar * spec.lattice.wavevector / atom.mass
    tau_b = 2.0 * v_b / const.g
    delta_z = timing.delta_v * timing.T
    part = bloch_partition(timing.T_B, tau_b)
    z_apex = v_b * v_b / (6.0 * const.g)
    z_kick = z_apex - v_b * v_b / (2.0 * const.g)
    c2 = const.c * const.c
    delta_m = atom.mass_defect(const)
    ratio = delta_m / atom.mass
    delta_v_b = 2.0 * v_b * ratio
    delta_tau_b = delta_v_b / const.g
    delta_z_b = v_b * delta_v_b / const.g
    rise = (timing.v0 * timing.T - 0.5 * const.g * timing.T * timing.T
            + (timing.v0 + timing.delta_v - const.g * timing.T) * timing.T_prime
            - 0.5 * const.g * timing.T_prime * timing.T_prime)
    return DerivedKinematics(
        v_b=v_b,
        tau_b=tau_b,
        delta_z=delta_z,
        mean_square_velocity=v_b * v_b / 3.0,
        n_oscillations=part.n_oscillations,
        tau=part.tau,
        z_kick=z_kick,
        z_apex=z_apex,
        launch_height=z_apex - rise,
        eps_k=v_b * v_b / (6.0 * c2),
        eps_g=const.g * delta_z / c2,
        delta_m=delta_m,
        delta_v_b=delta_v_b,
        delta_tau_b=delta_tau_b,
        delta_z_b=delta_z_b,
        max_separation=2.0 * part.n_oscillations * delta_z_b,
    )


def epsilon_params(spec: ExperimentSpec) -> tuple[float, float]:
    """(eps_k, eps_g) = (v_b^2/6c^2, g*delta_z/c^2)."""
    kin = derive_kinematics(spec)
    return kin.eps_k, kin.eps_g


def apex_hold_interval(spec: ExperimentSpec) -> float:
    """T' required for the upper arm to reach its apex exactly at lattice-on."""
    t = spec.timing
    return (t.v0 + t.delta_v) / spec.constants.g - t.T


def thermal_wavelength(atom: AtomSpecies, constants: PhysicalConstants) -> float:
    """Thermal de Broglie wavelength h / sqrt(2*pi*m*k_B*T)."""
    if atom.temperature is None:
        raise ValueError("atom temperature not set")
    h = 2.0 * math.pi * constants.hbar
    return h / math.sqrt(2.0 * math.pi * atom.mass * constants.k_B
                         * atom.temperature)
