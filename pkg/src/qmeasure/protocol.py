"""Measure-the-measure protocol: look for the uniform superposition ``|E>``.

Projecting the coupled ancillas onto ``|E> = k**-0.5 * sum_{g in E} |g>``
succeeds with probability ``mu(E) / k``; on success the particle is left in
the state propagated through the histories of ``E`` only.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import histories, simulator
from .errors import ConfigurationError, DomainError, PreclusionError
from .histories import Event, ExperimentConfig, chain_index
from .simulator import AncillaProjector

DEFAULT_TOLERANCE = 1e-10


@dataclass(frozen=True)
class MeasureResult:
    probability: float
    cardinality: int
    inferred_measure: float
    oracle_measure: float
    residual: float
    tolerance: float = DEFAULT_TOLERANCE

    @property
    def ok(self) -> bool:
        return self.residual < self.tolerance


def _event_n(event: Event, n: int | None) -> int:
    if n is None:
        n = event.n
    if n is None:
        raise DomainError("chain length unknown for an empty event")
    if event.n is not None and event.n != n:
        raise ConfigurationError(f"chain length mismatch: event has {event.n}-bit chains, expected {n}")
    return n


def _uniform(indices, n: int) -> AncillaProjector:
    v = np.zeros(1 << n, dtype=complex)
    v[list(indices)] = 1.0 / np.sqrt(len(indices))
    return AncillaProjector(n, vector=v)


def event_state(event: Event, n: int | None = None) -> AncillaProjector:
    """Rank-1 projector onto ``|E>``; all amplitudes ``+1/sqrt(k)``."""
    n = _event_n(event, n)
    if not len(event):
        raise DomainError("the empty event has measure 0 by definition and no |E> state")
    return _uniform([chain_index(c) for c in event], n)


def complement_state(event: Event, n: int | None = None) -> AncillaProjector:
    """Rank-1 projector onto the uniform superposition of chains not in ``E``."""
    n = _event_n(event, n)
    inside = {chain_index(c) for c in event}
    outside = [i for i in range(1 << n) if i not in inside]
    if not outside:
        raise DomainError("the full event has no complement state")
    return _uniform(outside, n)


def result_from_probability(cfg, event, probability, tolerance=DEFAULT_TOLERANCE) -> MeasureResult:
    k = len(event)
    inferred = k * probability
    oracle = histories.measure(cfg, event)
    return MeasureResult(probability, k, inferred, oracle, abs(inferred - oracle), tolerance)


def measure_the_measure(cfg: ExperimentConfig, event: Event, *, tolerance: float = DEFAULT_TOLERANCE) -> MeasureResult:
    """Run the coupled evolution, project on ``|E>`` and infer ``k * P(E)``."""
    if event.n is not None and event.n != cfg.n:
        raise ConfigurationError(f"chain length mismatch: event has {event.n}-bit chains, config has {cfg.n} analyzers")
    state = simulator.run_coupled(cfg)
    p = simulator.outcome_probability(state, event_state(event, cfg.n))
    return result_from_probability(cfg, event, p, tolerance)


@dataclass(frozen=True)
class CoarseMeasurement:
    """Two-outcome measurement ``{|E><E|, I - |E><E|}``.

    Conditional density matrices are ``None`` for a zero-probability outcome.
    """

    p_event: float
    p_rest: float
    rho_event: np.ndarray | None
    rho_rest: np.ndarray | None


def coarse_measurement(cfg: ExperimentConfig, event: Event) -> CoarseMeasurement:
    state = simulator.run_coupled(cfg)
    yes = event_state(event, cfg.n)
    no = yes.complement()
    rhos = []
    probs = []
    for proj in (yes, no):
        prob = simulator.outcome_probability(state, proj)
        probs.append(prob)
        try:
            rhos.append(simulator.reduced_density(simulator.collapse(state, proj)))
        except PreclusionError:
            rhos.append(None)
    return CoarseMeasurement(probs[0], probs[1], rhos[0], rhos[1])


def post_measurement_particle_state(cfg: ExperimentConfig, event: Event) -> np.ndarray:
    """Particle state after finding ``|E>``: ``mu(E)**-0.5 * sum_{g in E} A(g) |g_n>``.

    The vector is in the last analyzer's eigenbasis. It is checked against
    the particle factor of the simulated collapse (up to a global phase).
    """
    if not len(event):
        raise PreclusionError("the empty event is precluded")
    mu = histories.measure(cfg, event)
    if mu < simulator.ZERO_PROBABILITY:
        raise PreclusionError(f"event {event} has measure {mu:.3g}; it is precluded")
    psi = np.zeros(2, dtype=complex)
    for c in event:
        psi[c[-1]] += histories.amplitude(cfg, c)
    psi /= np.sqrt(mu)

    proj = event_state(event, cfg.n)
    collapsed = simulator.collapse(simulator.run_coupled(cfg), proj)
    factor = simulator.particle_factor(collapsed, proj.vector)
    if abs(abs(np.vdot(psi, factor)) - 1.0) > 1e-10:
        raise ArithmeticError("post-measurement state disagrees with the simulated collapse")
    return psi
