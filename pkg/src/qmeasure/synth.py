"""Circuit reductions for the ``|E>`` measurement.

Two routes are provided:

* Boolean sums. Bit positions are grouped by their column over the chains of
  ``E`` (equal or complementary columns share a group). Chaining XOR gates
  inside each group leaves every position but the group's last constant
  across chains, so only ``alpha`` residual qubits need a joint measurement.
* A Fourier transform on the span of the chains of ``E`` (identity
  elsewhere), which sends ``|E>`` to the single chain ``|g^k>``.

Ancilla positions in this module are 1-based, as in ``g = (g_1, ..., g_n)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import simulator
from .errors import ConfigurationError, DomainError
from .histories import Chain, Event, ExperimentConfig, chain_index, index_chain
from .protocol import DEFAULT_TOLERANCE, MeasureResult, event_state, result_from_probability
from .simulator import AncillaOperator, AncillaProjector

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SubchainPartition:
    common: tuple[int, ...]
    groups: tuple[tuple[int, ...], ...]

    @property
    def alpha(self) -> int:
        return len(self.groups)


def partition(event: Event) -> SubchainPartition:
    """Group bit positions by column pattern over the chains of ``event``.

    Columns are normalized against the first chain, so two positions share a
    group iff their columns are equal or complementary. Constant columns form
    the common group.
    """
    if len(event) < 2:
        raise DomainError("partition needs at least two chains; singletons need no reduction")
    chains = event.chains
    common = []
    groups: dict[tuple[int, ...], list[int]] = {}
    for pos in range(event.n):
        column = tuple(c[pos] ^ chains[0][pos] for c in chains)
        if not any(column):
            common.append(pos + 1)
        else:
            groups.setdefault(column, []).append(pos + 1)
    ordered = sorted((tuple(g) for g in groups.values()), key=lambda g: g[0])
    return SubchainPartition(tuple(common), tuple(ordered))


def alpha_bounds(k: int, n: int) -> tuple[int, int]:
    """``(ceil(log2 k), min(2**(k-1) - 1, n))``."""
    if not 1 <= k <= 1 << n:
        raise DomainError(f"cardinality must lie in [1, 2^{n}], got {k}")
    lower = (k - 1).bit_length()
    upper = min((1 << (k - 1)) - 1, n)
    return lower, upper


@dataclass
class GatePlan:
    """A Boolean-sum reduction of the ``|E>`` measurement.

    ``xor_gates`` holds ``(target, control)`` pairs, applied in order, each
    mapping ``|t>|c> -> |t xor c>|c>``. ``bases[p-1]`` is ``"Z"``, ``"PM"``
    (single residual qubit, looking for ``|+>``) or ``"R"`` (part of a joint
    residual measurement). ``expected[p-1]`` is the bit sought on ``Z``
    positions and ``None`` elsewhere. ``residual_vector`` lives on the
    ``residual_qubits`` in their listed order, big-endian.
    """

    n: int
    xor_gates: list[tuple[int, int]] = field(default_factory=list)
    bases: list[str] = field(default_factory=list)
    expected: list[int | None] = field(default_factory=list)
    residual_qubits: list[int] = field(default_factory=list)
    residual_vector: np.ndarray = field(default_factory=lambda: np.ones(1, dtype=complex))

    @property
    def alpha(self) -> int:
        return len(self.residual_qubits)

    def validate(self):
        n = self.n
        if len(self.bases) != n or len(self.expected) != n:
            raise DomainError(f"plan describes {len(self.bases)} bases / {len(self.expected)} expectations for {n} ancillas")
        for t, c in self.xor_gates:
            if not (1 <= t <= n and 1 <= c <= n) or t == c:
                raise DomainError(f"invalid XOR gate (target {t}, control {c}) for {n} ancillas")
        for p in range(1, n + 1):
            basis, bit = self.bases[p - 1], self.expected[p - 1]
            if basis == "Z":
                if bit not in (0, 1) or p in self.residual_qubits:
                    raise DomainError(f"Z-measured ancilla {p} needs an expected bit and cannot be residual")
            elif basis in ("PM", "R"):
                if p not in self.residual_qubits:
                    raise DomainError(f"ancilla {p} has basis {basis} but is not a residual qubit")
            else:
                raise DomainError(f"unknown basis {basis!r} for ancilla {p}")
        if len(set(self.residual_qubits)) != len(self.residual_qubits):
            raise DomainError("residual qubits repeat")
        vec = np.asarray(self.residual_vector, dtype=complex)
        if vec.shape != (1 << self.alpha,) or abs(np.linalg.norm(vec) - 1.0) > 1e-10:
            raise DomainError("residual vector must be a unit vector on the residual qubits")

    def permutation(self) -> np.ndarray:
        """Basis permutation implemented by the XOR network."""
        idx = np.arange(1 << self.n)
        for t, c in self.xor_gates:
            tb, cb = self.n - t, self.n - c
            idx = idx ^ (((idx >> cb) & 1) << tb)
        return idx

    def operator(self) -> AncillaOperator:
        return AncillaOperator(self.n, permutation=self.permutation())

    def apply_to_chain(self, chain: Chain) -> Chain:
        return index_chain(int(self.permutation()[chain_index(chain)]), self.n)

    def target_vector(self) -> np.ndarray:
        """The product (x) residual vector the plan looks for, on all ancillas."""
        self.validate()
        out = np.zeros(1 << self.n, dtype=complex)
        base = 0
        for p in range(1, self.n + 1):
            if self.bases[p - 1] == "Z" and self.expected[p - 1]:
                base |= 1 << (self.n - p)
        for r, amp in enumerate(np.asarray(self.residual_vector, dtype=complex)):
            idx = base
            for j, p in enumerate(self.residual_qubits):
                if (r >> (self.alpha - 1 - j)) & 1:
                    idx |= 1 << (self.n - p)
            out[idx] += amp
        return out

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "n": self.n,
            "xor_gates": [[t, c] for t, c in self.xor_gates],
            "bases": list(self.bases),
            "residual": {
                "qubits": list(self.residual_qubits),
                "vector": [[float(z.real), float(z.imag)] for z in np.asarray(self.residual_vector)],
            },
            "expected": list(self.expected),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "GatePlan":
        if d.get("schema") != SCHEMA_VERSION:
            raise ConfigurationError(f"unsupported gate plan schema {d.get('schema')!r}")
        plan = cls(
            n=int(d["n"]),
            xor_gates=[(int(t), int(c)) for t, c in d["xor_gates"]],
            bases=list(d["bases"]),
            expected=list(d["expected"]),
            residual_qubits=[int(q) for q in d["residual"]["qubits"]],
            residual_vector=np.array([complex(re, im) for re, im in d["residual"]["vector"]]),
        )
        plan.validate()
        return plan

    @classmethod
    def from_json(cls, text: str) -> "GatePlan":
        return cls.from_dict(json.loads(text))


def boolean_sum_plan(event: Event, n: int | None = None) -> GatePlan:
    """Build the XOR network and final measurement for ``event``.

    Inside each differing group with positions ``p_1 < ... < p_l`` the gates
    ``p_j <- p_j xor p_{j+1}`` run for ``j = 1..l-1``; ``p_l`` is the residual
    qubit. A singleton event gives a plan of plain Z measurements.
    """
    n = event.n if n is None else n
    if not len(event) or n is None:
        raise DomainError("cannot plan a measurement for the empty event")
    if event.n != n:
        raise ConfigurationError(f"chain length mismatch: event has {event.n}-bit chains, expected {n}")

    if len(event) == 1:
        (chain,) = event.chains
        return GatePlan(n, [], ["Z"] * n, list(chain), [], np.ones(1, dtype=complex))

    part = partition(event)
    gates = []
    residual = []
    for group in part.groups:
        for a, b in zip(group, group[1:]):
            gates.append((a, b))
        residual.append(group[-1])

    plan = GatePlan(n, gates, ["Z"] * n, [None] * n, residual)
    images = [plan.apply_to_chain(c) for c in event]
    ref = images[0]
    for p in range(1, n + 1):
        if p in residual:
            plan.bases[p - 1] = "PM" if len(residual) == 1 else "R"
        else:
            plan.expected[p - 1] = ref[p - 1]

    vec = np.zeros(1 << len(residual), dtype=complex)
    for img in images:
        r = 0
        for p in residual:
            r = (r << 1) | img[p - 1]
        vec[r] += 1.0
    plan.residual_vector = vec / np.sqrt(len(event))
    plan.validate()
    return plan


def subspace_fourier(event: Event, n: int | None = None, order=None) -> AncillaOperator:
    """Fourier transform on the span of the chains of ``event``.

    ``U|g^j> = k**-0.5 * sum_l exp(2 pi i j l / k) |g^l>`` for ``j, l = 1..k``
    and identity outside the span. Chains are indexed in canonical order
    unless ``order`` gives an explicit sequence; ``U|E> = |g^k>``.
    """
    n = event.n if n is None else n
    if not len(event) or n is None:
        raise DomainError("the Fourier transform needs a non-empty event")
    chains = list(event.chains) if order is None else [tuple(c) for c in order]
    if sorted(chains) != list(event.chains):
        raise DomainError("order must be a permutation of the event's chains")
    k = len(chains)
    j = np.arange(1, k + 1)
    block = np.exp(2j * np.pi * np.outer(j, j) / k) / np.sqrt(k)
    return AncillaOperator(n, subspace=([chain_index(c) for c in chains], block))


def fourier_target(event: Event, order=None) -> Chain:
    """Chain ``g^k`` that ``|E>`` is mapped to."""
    chains = list(event.chains) if order is None else [tuple(c) for c in order]
    return chains[-1]


def needs_full_space(event: Event, n: int | None = None) -> bool:
    """True when Boolean sums cannot shrink the joint measurement.

    That is the case for ``k > 2**(n-1)`` or when every ancilla would end up
    residual.
    """
    n = event.n if n is None else n
    k = len(event)
    if k > 1 << (n - 1):
        return True
    return k >= 2 and partition(event).alpha >= n


def plan_measurement(event: Event, n: int | None = None):
    """Boolean-sum plan, or the subspace Fourier operator when sums cannot help."""
    n = event.n if n is None else n
    if len(event) >= 2 and needs_full_space(event, n):
        return subspace_fourier(event, n)
    return boolean_sum_plan(event, n)


def execute_plan(cfg: ExperimentConfig, plan, event: Event, *, tolerance: float = DEFAULT_TOLERANCE,
                 order=None) -> MeasureResult:
    """Run the coupled evolution, apply the plan's unitary and measure.

    ``plan`` is a :class:`GatePlan` or an :class:`AncillaOperator` from
    :func:`subspace_fourier` (then the sought outcome is ``|g^k>``).
    """
    if not len(event):
        raise DomainError("the empty event needs no measurement")
    state = simulator.run_coupled(cfg)
    if isinstance(plan, GatePlan):
        if plan.n != cfg.n:
            raise DomainError(f"plan is for {plan.n} ancillas, config has {cfg.n}")
        plan.validate()
        unitary = plan.operator()
        target = AncillaProjector(cfg.n, vector=plan.target_vector())
    elif isinstance(plan, AncillaOperator):
        if plan.n != cfg.n:
            raise DomainError(f"operator is for {plan.n} ancillas, config has {cfg.n}")
        unitary = plan
        target = AncillaProjector.basis(cfg.n, chain_index(fourier_target(event, order)))
    else:
        raise DomainError(f"cannot execute {type(plan).__name__}")
    state = simulator.apply_ancilla_unitary(state, unitary)
    p = simulator.outcome_probability(state, target)
    return result_from_probability(cfg, event, p, tolerance)


def plan_matches_event(plan: GatePlan, event: Event) -> bool:
    """Whether ``U^dag |target> == |E>`` for the plan's network."""
    pulled = plan.operator().adjoint().apply(plan.target_vector())
    return bool(np.allclose(pulled, event_state(event, plan.n).vector, atol=1e-12))


def fourier_residual(event: Event, n: int | None = None) -> float:
    """Residual ``|| U|E> - |g^k> ||`` for the canonical Fourier route."""
    n = event.n if n is None else n
    u = subspace_fourier(event, n)
    mapped = u.apply(event_state(event, n).vector)
    target = np.zeros(1 << n, dtype=complex)
    target[chain_index(fourier_target(event))] = 1.0
    return float(np.linalg.norm(mapped - target))
