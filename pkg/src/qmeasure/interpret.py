"""Preclusion and "did E happen?" analysis of ancilla outcomes.

A joint history is a particle chain together with an ancilla outcome. Its
amplitude is the particle's path amplitude carried through the couplings and
then projected onto the outcome. Joint events are measured with the same
decoherence functional as particle events, the final configuration now
including the ancillas.

Inference follows one linguistic convention: ``E`` *happened* for an outcome
``O`` when every joint history inside ``O`` but outside ``E`` has measure
zero. It is a convention, not a theorem.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import histories, simulator
from .errors import ConfigurationError
from .histories import Chain, Event, ExperimentConfig, as_chain, chain_index
from .protocol import complement_state, event_state
from .simulator import AncillaProjector, ZERO_PROBABILITY

GEOMETRY_TOL = 1e-10

CONVENTION = (
    "E happened iff every nonzero-measure joint history inside the outcome "
    "lies in E (linguistic convention, not a theorem)"
)


class Verdict(str, enum.Enum):
    HAPPENED = "HAPPENED"
    NOT_HAPPENED = "NOT_HAPPENED"
    CANNOT_TELL = "CANNOT_TELL"


class FinalStateKind(str, enum.Enum):
    HISTORIES_IN_E = "HISTORIES_IN_E"
    HISTORIES_NOT_IN_E = "HISTORIES_NOT_IN_E"
    ALTERED = "ALTERED"
    ENTANGLED = "ENTANGLED"


def _coupled_steps(cfg: ExperimentConfig, coupled) -> tuple[int, ...]:
    steps = tuple(range(1, cfg.n + 1)) if coupled is None else tuple(sorted(set(coupled)))
    if any(not 1 <= s <= cfg.n for s in steps):
        raise ConfigurationError(f"coupled steps must lie in 1..{cfg.n}, got {steps}")
    return steps


def branch(cfg: ExperimentConfig, chain, coupled=None) -> np.ndarray:
    """Joint (particle, ancilla) vector produced by one particle history.

    Returns a ``(2, 2**m)`` array for ``m`` coupled ancillas: ``A(g)`` placed
    at particle bit ``g_n`` and the ancilla record of ``g`` on the coupled
    steps. ``coupled`` lists the 1-based steps carrying an ancilla (all by
    default); uncoupled steps leave no record.
    """
    chain = as_chain(chain)
    steps = _coupled_steps(cfg, coupled)
    m = len(steps)
    out = np.zeros((2, 1 << m), dtype=complex)
    record = 0
    for s in steps:
        record = (record << 1) | chain[s - 1]
    out[chain[-1], record] = histories.amplitude(cfg, chain)
    return out


def joint_measure(cfg: ExperimentConfig, chains: Iterable, outcome: AncillaProjector,
                  final_particle_bit: int | None = None, coupled=None) -> float:
    """Measure of the joint event (particle in ``chains``) x (ancillas give ``outcome``)."""
    chains = [as_chain(c) for c in chains]
    steps = _coupled_steps(cfg, coupled)
    if outcome.n != len(steps):
        raise ConfigurationError(f"outcome acts on {outcome.n} ancillas, {len(steps)} are coupled")
    total = np.zeros((2, 1 << len(steps)), dtype=complex)
    for c in chains:
        if final_particle_bit is not None and c[-1] != final_particle_bit:
            continue
        total += branch(cfg, c, steps)
    projected = outcome.project(total)
    return float(np.real(np.vdot(projected, projected)))


def compatible_histories(cfg: ExperimentConfig, outcome: AncillaProjector,
                         final_particle_bit: int | None = None, coupled=None) -> set[Chain]:
    """Particle chains whose joint history with ``outcome`` has nonzero measure."""
    out = set()
    for idx in range(1 << cfg.n):
        chain = histories.index_chain(idx, cfg.n)
        if joint_measure(cfg, [chain], outcome, final_particle_bit, coupled) > ZERO_PROBABILITY:
            out.add(chain)
    return out


def preclusion_check(cfg: ExperimentConfig, chains: Iterable, outcome: AncillaProjector,
                     final_particle_bit: int | None = None, coupled=None) -> bool:
    """True iff the joint event has measure below 1e-14."""
    return joint_measure(cfg, chains, outcome, final_particle_bit, coupled) < ZERO_PROBABILITY


@dataclass(frozen=True)
class OutcomeClassification:
    verdict: Verdict
    measure_related: bool
    final_state_kind: FinalStateKind
    probability_relation: str
    probability: float
    # "E_system but not E_ancilla" precluded? Reported only, never used for inference.
    converse_precluded: bool
    convention: str = CONVENTION

    def to_dict(self) -> dict:
        descriptions = {
            FinalStateKind.HISTORIES_IN_E: "histories in E",
            FinalStateKind.HISTORIES_NOT_IN_E: "histories not in E",
            FinalStateKind.ALTERED: "histories altered",
            FinalStateKind.ENTANGLED: "entangled with ancillas",
        }
        happened = {Verdict.HAPPENED: "yes", Verdict.NOT_HAPPENED: "no", Verdict.CANNOT_TELL: "cannot tell"}
        return {
            "state_kind": self.final_state_kind.value,
            "happened": happened[self.verdict],
            "probability_relation": self.probability_relation,
            "final_system_description": descriptions[self.final_state_kind],
            "verdict": self.verdict.value,
            "measure_related": self.measure_related,
            "probability": self.probability,
            "converse_precluded": self.converse_precluded,
            "convention": self.convention,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _span_mask(event: Event, n: int) -> np.ndarray:
    mask = np.zeros(1 << n, dtype=bool)
    mask[[chain_index(c) for c in event]] = True
    return mask


def classify_outcome(cfg: ExperimentConfig, event: Event, measured: AncillaProjector) -> OutcomeClassification:
    """Place an ancilla outcome in the rows of the inference table.

    Rank-1 outcomes are classified by where the vector sits relative to
    ``span{|g> : g in E}``; other projectors leave the particle entangled with
    the ancillas.
    """
    n = cfg.n
    k = len(event)
    if event.n is not None and event.n != n:
        raise ConfigurationError(f"chain length mismatch: event has {event.n}-bit chains, config has {n}")
    inside = _span_mask(event, n)
    state = simulator.run_coupled(cfg)
    prob = simulator.outcome_probability(state, measured)
    converse = preclusion_check(cfg, event, measured.complement())

    if measured.is_rank_one:
        v = measured.vector
        w_in = float(np.linalg.norm(v[inside]))
        w_out = float(np.linalg.norm(v[~inside]))
        if w_out < GEOMETRY_TOL:
            if k and abs(abs(np.vdot(event_state(event, n).vector, v)) - 1.0) < GEOMETRY_TOL:
                return OutcomeClassification(Verdict.HAPPENED, True, FinalStateKind.HISTORIES_IN_E,
                                             "mu(E)/k", prob, converse)
            return OutcomeClassification(Verdict.HAPPENED, False, FinalStateKind.ALTERED,
                                         "not related to mu", prob, converse)
        if w_in < GEOMETRY_TOL:
            rest = (1 << n) - k
            if rest and abs(abs(np.vdot(complement_state(event, n).vector, v)) - 1.0) < GEOMETRY_TOL:
                return OutcomeClassification(Verdict.NOT_HAPPENED, True, FinalStateKind.HISTORIES_NOT_IN_E,
                                             "mu(Ebar)/(2^n-k)", prob, converse)
            return OutcomeClassification(Verdict.NOT_HAPPENED, False, FinalStateKind.ALTERED,
                                         "not related to mu", prob, converse)
        return OutcomeClassification(Verdict.CANNOT_TELL, False, FinalStateKind.ALTERED,
                                     "not related to mu", prob, converse)

    p = measured.dense()
    leak_out = float(np.linalg.norm(p[~inside][:, inside])) + float(np.linalg.norm(p[~inside][:, ~inside]))
    leak_in = float(np.linalg.norm(p[inside][:, inside])) + float(np.linalg.norm(p[inside][:, ~inside]))
    if leak_out < GEOMETRY_TOL:
        verdict = Verdict.HAPPENED
    elif leak_in < GEOMETRY_TOL:
        verdict = Verdict.NOT_HAPPENED
    else:
        verdict = Verdict.CANNOT_TELL
    return OutcomeClassification(verdict, False, FinalStateKind.ENTANGLED, "not related to mu", prob, converse)


def happened_by_preclusion(cfg: ExperimentConfig, event: Event, outcome: AncillaProjector) -> bool:
    """Direct form of the convention: ``E^c x outcome`` is precluded."""
    return preclusion_check(cfg, event.complement(cfg.n), outcome)
