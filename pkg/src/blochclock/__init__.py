"""Deterministic simulator of a trapped-atom clock interferometer.

An atom is split into two vertically separated arms, both held at rest
against gravity in an accelerating optical lattice while an internal clock
transition is driven, then recombined.  The package builds the pulse
sequence from a small text format, computes the accumulated phases with
three independent engines (perturbative bounce model, non-perturbative
falling trajectories, washboard-lattice ODE) and evaluates the exit-port
interference signals.
"""

__version__ = "0.1.0"

from .dsl import (SpecError, canonical_text, load_spec, loads,
                  parse_sequence, validate)
from .lattice import (InfeasibleLatticeError, calibrate, integrate_hold,
                      lattice_clock_phases)
from .model import (AtomSpecies, DerivedKinematics, ExperimentSpec,
                    LatticeConfig, PhysicalConstants, TimingConfig,
                    bloch_partition, derive_kinematics, thermal_wavelength)
from .observables import (ENGINES, clock_engine, extract_resonance,
                          fractional_frequency_shift, interference_ports,
                          mean_transition_frequency, mixture_port_probability,
                          port_probability, probability_difference,
                          ramsey_ground_probability, scan,
                          simulate_observables, total_ground_probability,
                          visibility_envelope)
from .phases import (ClockPhases, InterferometerPhase, exact_clock_phases,
                     interferometer_phase, path_clock_phases,
                     perturbative_clock_phases)
from .trajectory import (build_arm_trajectories, build_trajectory_pair,
                         hold_relative_offset, sequence_times)

__all__ = [
    "__version__",
    "AtomSpecies", "ClockPhases", "DerivedKinematics", "ENGINES",
    "ExperimentSpec", "InfeasibleLatticeError", "InterferometerPhase",
    "LatticeConfig", "PhysicalConstants", "SpecError", "TimingConfig",
    "bloch_partition", "build_arm_trajectories", "build_trajectory_pair",
    "calibrate", "canonical_text", "clock_engine", "derive_kinematics",
    "exact_clock_phases", "extract_resonance", "fractional_frequency_shift",
    "hold_relative_offset", "integrate_hold", "interference_ports",
    "interferometer_phase", "lattice_clock_phases", "load_spec", "loads",
    "mean_transition_frequency", "mixture_port_probability",
    "parse_sequence", "path_clock_phases", "perturbative_clock_phases",
    "port_probability", "probability_difference",
    "ramsey_ground_probability", "scan", "sequence_times",
    "simulate_observables", "thermal_wavelength",
    "total_ground_probability", "validate", "visibility_envelope",
]
