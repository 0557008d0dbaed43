import math

import numpy as np
import pytest

from qmeasure import histories
from qmeasure.errors import ConfigurationError, PreclusionError, ResourceError
from qmeasure.histories import Event, ExperimentConfig
from qmeasure.simulator import (
    AncillaOperator,
    AncillaProjector,
    JointState,
    apply_ancilla_unitary,
    collapse,
    outcome_probability,
    particle_factor,
    purity,
    reduced_density,
    run_coupled,
)
from qmeasure.spinor import Direction
from qmeasure.synth import GatePlan

from conftest import random_config, zx_config

R2 = 1 / math.sqrt(2)
PLUS = np.array([R2, R2])
ZERO = np.array([1.0, 0.0])
ONE = np.array([0.0, 1.0])


def proj(*qubits):
    v = np.array([1.0 + 0j])
    for q in qubits:
        v = np.kron(v, q)
    return AncillaProjector(len(qubits), vector=v)


def test_zx_state_support():
    a, b = 0.6, 0.8
    s = run_coupled(zx_config(a, b))
    mods = np.abs(s.matrix)
    expected = np.zeros((2, 4))
    expected[0, 0b00] = a * R2
    expected[1, 0b01] = a * R2
    expected[0, 0b10] = b * R2
    expected[1, 0b11] = b * R2
    np.testing.assert_allclose(mods, expected, atol=1e-15)


def test_single_analyzer_trivial():
    s = run_coupled(ExperimentConfig(np.array([1, 0]), (Direction.named("Z"),)))
    np.testing.assert_array_equal(s.amplitudes, [1, 0, 0, 0])


def test_cnot_coupling_map(rng):
    a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
    norm = math.hypot(abs(a), abs(b))
    a, b = a / norm, b / norm
    s = run_coupled(ExperimentConfig(np.array([a, b]), (Direction.named("Z"),)))
    # alpha|0_s 0> + beta|1_s 1>
    np.testing.assert_array_equal(s.amplitudes, np.array([a, 0, 0, b]))


def test_amplitudes_match_oracle(rng):
    for n in range(1, 7):
        cfg = random_config(rng, n)
        s = run_coupled(cfg)
        for idx in range(1 << n):
            chain = histories.index_chain(idx, n)
            amp = histories.amplitude(cfg, chain)
            assert abs(s.matrix[chain[-1], idx] - amp) < 1e-12
            assert abs(s.matrix[1 - chain[-1], idx]) == 0


def test_singleton_probability_equals_measure(rng):
    for _ in range(50):
        n = int(rng.integers(1, 7))
        cfg = random_config(rng, n)
        s = run_coupled(cfg)
        for idx in range(1 << n):
            chain = histories.index_chain(idx, n)
            p = outcome_probability(s, AncillaProjector.basis(n, idx))
            assert p == pytest.approx(histories.measure(cfg, Event([chain])), abs=1e-12)


def test_norm_preserved(rng):
    for _ in range(20):
        n = int(rng.integers(1, 7))
        s = run_coupled(random_config(rng, n))
        assert np.linalg.norm(s.amplitudes) == pytest.approx(1, abs=1e-12)
        m = rng.normal(size=(1 << n, 1 << n)) + 1j * rng.normal(size=(1 << n, 1 << n))
        q, _ = np.linalg.qr(m)
        out = apply_ancilla_unitary(s, AncillaOperator(n, matrix=q))
        assert np.linalg.norm(out.amplitudes) == pytest.approx(1, abs=1e-12)


def test_identity_unitary():
    s = run_coupled(zx_config(0.6, 0.8))
    out = apply_ancilla_unitary(s, AncillaOperator.identity(2))
    np.testing.assert_array_equal(out.amplitudes, s.amplitudes)


def test_xor_unitary_moves_amplitudes():
    a, b = 0.6, 0.8
    s = run_coupled(zx_config(a, b))
    xor = GatePlan(2, [(1, 2)]).operator()
    out = apply_ancilla_unitary(s, xor)
    mods = np.abs(out.matrix)
    # alpha|0_s00> + alpha|1_s11> + beta|0_s10> - beta|1_s01>
    assert mods[0, 0b00] == pytest.approx(a * R2)
    assert mods[1, 0b11] == pytest.approx(a * R2)
    assert mods[0, 0b10] == pytest.approx(b * R2)
    assert mods[1, 0b01] == pytest.approx(b * R2)
    assert np.count_nonzero(np.abs(out.matrix) > 1e-15) == 4


def test_two_ancilla_outcome_probabilities():
    a, b = 0.6, 0.8
    s = run_coupled(zx_config(a, b))
    # projecting by hand: <+0| picks (alpha + beta)/2 on |0_s>, i.e. mu({00,10}) / 2
    assert outcome_probability(s, proj(PLUS, ZERO)) == pytest.approx(abs(a + b) ** 2 / 4, abs=1e-12)
    assert outcome_probability(s, proj(ZERO, PLUS)) == pytest.approx(abs(a) ** 2 / 2, abs=1e-12)
    assert outcome_probability(s, AncillaProjector.identity(2)) == pytest.approx(1, abs=1e-12)


def test_plus_minus_outcomes_form_a_distribution():
    a, b = 0.6, 0.8
    s = run_coupled(zx_config(a, b))
    minus = np.array([R2, -R2])
    probs = {
        (x, y): outcome_probability(s, proj(q1, q2))
        for x, q1 in (("+", PLUS), ("-", minus))
        for y, q2 in (("0", ZERO), ("1", ONE))
    }
    assert sum(probs.values()) == pytest.approx(1, abs=1e-12)
    assert probs["-", "0"] == pytest.approx(abs(a - b) ** 2 / 4, abs=1e-12)
    assert probs["-", "1"] == pytest.approx(abs(a + b) ** 2 / 4, abs=1e-12)


def test_collapse_on_event_state():
    a, b = 0.6, 0.8
    s = run_coupled(zx_config(a, b))
    e = np.zeros(4)
    e[[0b00, 0b10]] = R2
    p = AncillaProjector(2, vector=e)
    c = collapse(s, p)
    factor = particle_factor(c, e)
    np.testing.assert_allclose(np.abs(factor), [1, 0], atol=1e-14)
    np.testing.assert_allclose(c.matrix[1], 0, atol=1e-15)
    again = collapse(c, p)
    np.testing.assert_allclose(again.amplitudes, c.amplitudes, atol=1e-12)


def test_collapse_on_exact_component():
    s = JointState.product([0.6, 0.8], [0, 1, 0, 0])
    c = collapse(s, AncillaProjector.basis(2, 1))
    np.testing.assert_allclose(c.amplitudes, s.amplitudes, atol=1e-15)


def test_collapse_full_event_gives_free_evolution(rng):
    for n in range(1, 6):
        cfg = random_config(rng, n)
        v = np.full(1 << n, (1 << n) ** -0.5)
        c = collapse(run_coupled(cfg), AncillaProjector(n, vector=v))
        expected = np.zeros(2, dtype=complex)
        for chain in Event.full(n):
            expected[chain[-1]] += histories.amplitude(cfg, chain)
        expected /= math.sqrt(histories.measure(cfg, Event.full(n)))
        assert abs(np.vdot(expected, particle_factor(c, v))) == pytest.approx(1, abs=1e-12)


def test_collapse_zero_probability():
    s = run_coupled(zx_config(1, 0))
    with pytest.raises(PreclusionError):
        collapse(s, AncillaProjector.basis(2, 0b10))


def test_reduced_density_examples():
    s = JointState.product([0.6, 0.8j], [0, 0, 1, 0])
    np.testing.assert_allclose(reduced_density(s), np.outer([0.6, 0.8j], np.conj([0.6, 0.8j])), atol=1e-15)

    st = run_coupled(zx_config(R2, R2))
    # direct summation over the ancilla index
    m = st.matrix
    expected = np.zeros((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            expected[i, j] = sum(m[i, a] * np.conj(m[j, a]) for a in range(4))
    np.testing.assert_allclose(expected, np.diag([0.5, 0.5]), atol=1e-15)
    np.testing.assert_allclose(reduced_density(st), expected, atol=1e-15)


def test_reduced_density_after_rank1_collapse_is_pure(rng):
    for _ in range(20):
        n = int(rng.integers(1, 6))
        cfg = random_config(rng, n)
        v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        v /= np.linalg.norm(v)
        rho = reduced_density(collapse(run_coupled(cfg), AncillaProjector(n, vector=v)))
        assert np.trace(rho).real == pytest.approx(1, abs=1e-12)
        assert purity(rho) == pytest.approx(1, abs=1e-12)


def test_density_matrix_invariants(rng):
    rho = reduced_density(run_coupled(random_config(rng, 5)))
    np.testing.assert_allclose(rho, rho.conj().T, atol=1e-15)
    assert np.trace(rho).real == pytest.approx(1, abs=1e-12)
    assert np.linalg.eigvalsh(rho).min() >= -1e-10


def test_operator_validation():
    with pytest.raises(ConfigurationError):
        AncillaOperator(1, matrix=[[1, 1], [0, 1]])
    with pytest.raises(ConfigurationError):
        AncillaOperator(1, permutation=[0, 0])
    with pytest.raises(ConfigurationError):
        AncillaProjector(1, matrix=[[1, 1], [0, 0]])
    with pytest.raises(ConfigurationError):
        apply_ancilla_unitary(run_coupled(zx_config(1, 0)), AncillaOperator.identity(3))
    with pytest.raises(ConfigurationError):
        outcome_probability(run_coupled(zx_config(1, 0)), AncillaProjector.basis(1, 0))


def test_size_cap(monkeypatch):
    monkeypatch.setenv("QMEASURE_MAX_N", "3")
    cfg = ExperimentConfig(np.array([1, 0]), (Direction.named("Z"),) * 4)
    with pytest.raises(ResourceError):
        run_coupled(cfg)
    monkeypatch.setenv("QMEASURE_MAX_N", "4")
    run_coupled(cfg)
