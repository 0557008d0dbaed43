"""Quantum measure of path events for a qubit crossing a chain of analyzers.

The package computes the measure ``mu(E)`` of sets of paths, simulates the
ancilla-coupled protocol whose ``|E>`` outcome has probability ``mu(E)/k``,
synthesizes cheaper measurement circuits, and analyses what an outcome lets
one infer about the particle.
"""
from .errors import ConfigurationError, DomainError, PreclusionError, QMeasureError, ResourceError
from .histories import (
    Event,
    ExperimentConfig,
    InterferenceReport,
    all_events,
    amplitude,
    decoherence,
    enumerate_events,
    interference,
    measure,
)
from .protocol import (
    MeasureResult,
    coarse_measurement,
    complement_state,
    event_state,
    measure_the_measure,
    post_measurement_particle_state,
)
from .simulator import (
    AncillaOperator,
    AncillaProjector,
    JointState,
    apply_ancilla_unitary,
    collapse,
    outcome_probability,
    reduced_density,
    run_coupled,
)
from .spinor import Direction, eigenstate, overlap, qubit_state
from .synth import GatePlan, alpha_bounds, boolean_sum_plan, execute_plan, partition, subspace_fourier

__version__ = "0.1.0"
