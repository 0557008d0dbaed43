import itertools
import sys

import numpy as np
import pytest

from qmeasure.histories import Event, ExperimentConfig
from qmeasure.spinor import Direction


def random_state(rng):
    psi = rng.normal(size=2) + 1j * rng.normal(size=2)
    return psi / np.linalg.norm(psi)


def random_direction(rng):
    return Direction.from_cartesian(*rng.normal(size=3))


def random_config(rng, n):
    return ExperimentConfig(random_state(rng), tuple(random_direction(rng) for _ in range(n)))


def random_event(rng, n, k=None, kmin=1):
    if k is None:
        k = int(rng.integers(kmin, (1 << n) + 1))
    picks = rng.choice(1 << n, size=k, replace=False)
    return Event((tuple((int(i) >> (n - 1 - b)) & 1 for b in range(n)) for i in picks), n=n)


def zx_config(alpha, beta):
    return ExperimentConfig(np.array([alpha, beta], dtype=complex), (Direction.named("Z"), Direction.named("X")))


def class_operator_measure(cfg, event):
    """Convention-free oracle: || sum_{g in E} P_n ... P_1 |psi> ||^2.

    Uses eigenprojectors |n,b><n,b| built from the Pauli combination
    (I + s n.sigma)/2, so no eigenvector phases enter at all.
    """
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    total = np.zeros(2, dtype=complex)
    for chain in event:
        vec = cfg.initial.copy()
        for d, bit in zip(cfg.analyzers, chain):
            x, y, z = d.cartesian()
            sign = 1 if bit == 0 else -1
            proj = 0.5 * (np.eye(2) + sign * (x * sx + y * sy + z * sz))
            vec = proj @ vec
        total += vec
    return float(np.real(np.vdot(total, total)))


def all_chains(n):
    return list(itertools.product((0, 1), repeat=n))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    results = getattr(acceptance, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in acceptance.CRITERIA:
        if key in results:
            terminalreporter.write_line(results[key])
