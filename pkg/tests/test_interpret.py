import itertools
import json
import math

import numpy as np
import pytest

from qmeasure import histories, simulator, synth
from qmeasure.errors import ConfigurationError
from qmeasure.histories import Event
from qmeasure.interpret import (
    FinalStateKind,
    Verdict,
    branch,
    classify_outcome,
    compatible_histories,
    happened_by_preclusion,
    joint_measure,
    preclusion_check,
)
from qmeasure.protocol import complement_state, event_state
from qmeasure.simulator import AncillaProjector

from conftest import all_chains, random_config, random_event, zx_config

R2 = 1 / math.sqrt(2)
R3 = 1 / math.sqrt(3)
PLUS = AncillaProjector(1, vector=[R2, R2])
MINUS = AncillaProjector(1, vector=[R2, -R2])
E3 = Event(["00", "01", "10"])

# the hand-picked basis containing |E> for E = {00, 01, 10}
GENERIC_BASIS = {
    1: np.array([1, 1, 1, 0]) * R3,
    2: np.array([1, -1, 0, 1]) * R3,
    3: np.array([1, 0, -1, -1]) * R3,
    4: np.array([0, 1, -1, 1]) * R3,
}


def test_branch_records_coupled_steps():
    cfg = zx_config(0.6, 0.8)
    b = branch(cfg, "10", coupled=[1])
    assert b.shape == (2, 2)
    assert b[0, 1] == pytest.approx(histories.amplitude(cfg, "10"))
    assert np.count_nonzero(b) == 1
    assert branch(cfg, "01").shape == (2, 4)
    with pytest.raises(ConfigurationError):
        branch(cfg, "01", coupled=[3])


def test_single_ancilla_disagreeing_histories_precluded(rng):
    for _ in range(10):
        a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
        norm = math.hypot(abs(a), abs(b))
        cfg = zx_config(a / norm, b / norm)
        disagreeing = [(c, bit) for c in all_chains(2) for bit in (0, 1) if c[0] != bit]
        assert len(disagreeing) == 4
        for chain, bit in disagreeing:
            assert joint_measure(cfg, [chain], AncillaProjector.basis(1, bit), coupled=[1]) < 1e-14
        for chain in all_chains(2):
            m = joint_measure(cfg, [chain], AncillaProjector.basis(1, chain[0]), coupled=[1])
            assert m == pytest.approx(abs(histories.amplitude(cfg, chain)) ** 2, abs=1e-14)


def test_single_ancilla_z_outcome_compatibility():
    cfg = zx_config(0.6, 0.8)
    assert compatible_histories(cfg, AncillaProjector.basis(1, 0), 0, coupled=[1]) == {(0, 0)}
    assert preclusion_check(cfg, ["10"], AncillaProjector.basis(1, 0), coupled=[1])
    assert not preclusion_check(cfg, ["00"], AncillaProjector.basis(1, 0), coupled=[1])


def test_eraser_outcomes_compatibility():
    cfg = zx_config(0.6, 0.8)
    assert compatible_histories(cfg, PLUS, 0, coupled=[1]) == {(0, 0), (1, 0)}
    assert compatible_histories(cfg, MINUS, 0, coupled=[1]) == {(0, 0), (1, 0)}
    assert compatible_histories(cfg, PLUS, 1, coupled=[1]) == {(0, 1), (1, 1)}


def test_eraser_plus_recovers_measure_minus_does_not():
    a, b = 0.6, 0.8
    cfg = zx_config(a, b)
    mu = histories.measure(cfg, Event(["00", "10"]))
    plus = joint_measure(cfg, ["00", "10"], PLUS, 0, coupled=[1])
    minus = joint_measure(cfg, ["00", "10"], MINUS, 0, coupled=[1])
    assert plus == pytest.approx(mu / 2, abs=1e-12)
    assert minus == pytest.approx(abs(a - b) ** 2 / 4, abs=1e-12)


def test_ancilla_event_precludes_complement(rng):
    for _ in range(100):
        n = int(rng.integers(1, 6))
        cfg = random_config(rng, n)
        e = random_event(rng, n, k=int(rng.integers(1, 1 << n)))
        assert preclusion_check(cfg, e.complement(), event_state(e))
        assert happened_by_preclusion(cfg, e, event_state(e))


def test_full_event_not_precluded(rng):
    for n in range(1, 5):
        cfg = random_config(rng, n)
        assert not preclusion_check(cfg, Event.full(n), AncillaProjector.identity(n))
        assert joint_measure(cfg, Event.full(n), AncillaProjector.identity(n)) == pytest.approx(1, abs=1e-12)


def test_event_state_row(rng):
    cfg = random_config(rng, 2)
    c = classify_outcome(cfg, E3, event_state(E3))
    assert (c.verdict, c.measure_related, c.final_state_kind) == (
        Verdict.HAPPENED, True, FinalStateKind.HISTORIES_IN_E)
    assert c.probability_relation == "mu(E)/k"
    assert c.probability == pytest.approx(histories.measure(cfg, E3) / 3, abs=1e-12)


def test_complement_state_row(rng):
    cfg = random_config(rng, 3)
    e = random_event(rng, 3, k=3)
    c = classify_outcome(cfg, e, complement_state(e))
    assert (c.verdict, c.measure_related, c.final_state_kind) == (
        Verdict.NOT_HAPPENED, True, FinalStateKind.HISTORIES_NOT_IN_E)
    assert c.probability == pytest.approx(histories.measure(cfg, e.complement()) / 5, abs=1e-12)


def test_generic_basis_rows():
    cfg = zx_config(0.6, 0.8)
    verdicts = {i: classify_outcome(cfg, E3, AncillaProjector(2, vector=v)).verdict for i, v in GENERIC_BASIS.items()}
    assert verdicts[1] == Verdict.HAPPENED
    assert verdicts[2] == Verdict.CANNOT_TELL
    assert verdicts[3] == Verdict.CANNOT_TELL
    # |4> overlaps 01 and 10 as well
    assert verdicts[4] == Verdict.CANNOT_TELL


def test_generic_basis_compatible_histories():
    cfg = zx_config(0.6, 0.8)
    for v in GENERIC_BASIS.values():
        support = {histories.index_chain(i, 2) for i in np.flatnonzero(v)}
        assert compatible_histories(cfg, AncillaProjector(2, vector=v)) == support


def test_outcome_four_coincidence(rng):
    for _ in range(20):
        a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
        norm = math.hypot(abs(a), abs(b))
        a, b = a / norm, b / norm
        cfg = zx_config(a, b)
        p4 = simulator.outcome_probability(simulator.run_coupled(cfg), AncillaProjector(2, vector=GENERIC_BASIS[4]))
        assert p4 == pytest.approx(histories.measure(cfg, Event(["01", "10", "11"])) / 3, abs=1e-12)


@pytest.mark.parametrize("event", list(histories.enumerate_events(2, 3)), ids=str)
def test_fourier_basis_gives_full_verdicts(event, rng):
    cfg = random_config(rng, 2)
    u_dag = synth.subspace_fourier(event).adjoint()
    target = synth.fourier_target(event)
    for chain in all_chains(2):
        pre = u_dag.apply(np.eye(4)[histories.chain_index(chain)])
        c = classify_outcome(cfg, event, AncillaProjector(2, vector=pre))
        if chain in event:
            assert c.verdict == Verdict.HAPPENED
            assert c.measure_related == (chain == target)
            assert happened_by_preclusion(cfg, event, AncillaProjector(2, vector=pre))
        else:
            assert c.verdict == Verdict.NOT_HAPPENED
            assert preclusion_check(cfg, event, AncillaProjector(2, vector=pre))


def test_altered_rows(rng):
    cfg = random_config(rng, 2)
    e = Event(["00"])
    inside = Event(["00", "01"])
    v = np.array([0.6, 0.8j, 0, 0])
    c = classify_outcome(cfg, inside, AncillaProjector(2, vector=v))
    assert (c.verdict, c.measure_related, c.final_state_kind) == (Verdict.HAPPENED, False, FinalStateKind.ALTERED)
    v = np.array([0, R2, -R2, 0])
    c = classify_outcome(cfg, e, AncillaProjector(2, vector=v))
    assert (c.verdict, c.measure_related, c.final_state_kind) == (Verdict.NOT_HAPPENED, False, FinalStateKind.ALTERED)


def test_happened_implies_preclusion(rng):
    for _ in range(100):
        n = int(rng.integers(1, 5))
        cfg = random_config(rng, n)
        e = random_event(rng, n)
        idx = [histories.chain_index(c) for c in e]
        v = np.zeros(1 << n, dtype=complex)
        v[idx] = rng.normal(size=len(idx)) + 1j * rng.normal(size=len(idx))
        v /= np.linalg.norm(v)
        outcome = AncillaProjector(n, vector=v)
        c = classify_outcome(cfg, e, outcome)
        assert c.verdict == Verdict.HAPPENED
        assert preclusion_check(cfg, e.complement(), outcome)


def test_random_outcomes_obey_convention(rng):
    for _ in range(100):
        n = int(rng.integers(1, 4))
        cfg = random_config(rng, n)
        e = random_event(rng, n)
        v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        outcome = AncillaProjector(n, vector=v / np.linalg.norm(v))
        c = classify_outcome(cfg, e, outcome)
        if c.verdict == Verdict.HAPPENED:
            assert happened_by_preclusion(cfg, e, outcome)
        elif c.verdict == Verdict.NOT_HAPPENED:
            assert preclusion_check(cfg, e, outcome)


def test_multi_rank_outcomes_are_entangled():
    cfg = zx_config(0.6, 0.8)
    inside = AncillaProjector(2, matrix=np.diag([1, 1, 0, 0]))
    c = classify_outcome(cfg, E3, inside)
    assert (c.verdict, c.final_state_kind) == (Verdict.HAPPENED, FinalStateKind.ENTANGLED)
    c = classify_outcome(cfg, Event(["00"]), AncillaProjector(2, matrix=np.diag([0, 1, 1, 0])))
    assert c.verdict == Verdict.NOT_HAPPENED
    c = classify_outcome(cfg, Event(["00"]), AncillaProjector(2, matrix=np.diag([1, 1, 0, 0])))
    assert c.verdict == Verdict.CANNOT_TELL


def test_classification_json_mirrors_table_columns(rng):
    c = classify_outcome(random_config(rng, 2), E3, event_state(E3))
    d = json.loads(c.to_json())
    for key in ("state_kind", "happened", "probability_relation", "final_system_description"):
        assert key in d
    assert d["happened"] == "yes"
    assert "convention" in d["convention"]


def test_converse_is_reported_not_inferred():
    # E_system but not E_ancilla: possible unless the branches line up with |E>
    e = Event(["00", "10"])
    c = classify_outcome(zx_config(0.6, 0.8), e, event_state(e))
    assert c.verdict == Verdict.HAPPENED
    assert c.converse_precluded is False
    # equal amplitudes on 00 and 10 do line up
    assert classify_outcome(zx_config(R2, R2), e, event_state(e)).converse_precluded is True


def test_all_singletons_z_basis_identify_path(rng):
    cfg = random_config(rng, 3)
    for chain in itertools.product((0, 1), repeat=3):
        outcome = AncillaProjector.basis(3, histories.chain_index(chain))
        comp = compatible_histories(cfg, outcome)
        assert comp <= {chain}
