"""Chains, events, amplitudes and the quantum measure.

This module is the analytic reference path. Everything here is computed from
products of eigenstate overlaps and the double sum over pairs of histories
with a Kronecker delta on the final beam; nothing is factorized or cached
beyond the per-chain amplitude.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError, ResourceError
from .spinor import Direction, eigenstate

Chain = tuple[int, ...]

# Largest number of chain entries enumerate_events will emit (k * C(2^n, k)).
ENUMERATION_CAP = 50_000_000
# Imaginary part of D(E;E) beyond this is a broken convention, not physics.
IMAG_RESIDUE_LIMIT = 1e-9


def as_chain(bits) -> Chain:
    """Coerce ``"0110"``, ``[0, 1, 1, 0]`` or a tuple to a chain tuple."""
    if isinstance(bits, str):
        s = bits.strip()
        if not s or any(ch not in "01" for ch in s):
            raise ConfigurationError(f"chain must be a non-empty bit string, got {bits!r}")
        return tuple(int(ch) for ch in s)
    chain = tuple(int(b) for b in bits)
    if not chain or any(b not in (0, 1) for b in chain):
        raise ConfigurationError(f"chain must be a non-empty sequence of bits, got {bits!r}")
    return chain


def chain_str(chain: Chain) -> str:
    return "".join(str(b) for b in chain)


def chain_index(chain: Chain) -> int:
    """Big-endian integer of a chain: the first step is the most significant bit."""
    idx = 0
    for b in chain:
        idx = (idx << 1) | b
    return idx


def index_chain(index: int, n: int) -> Chain:
    return tuple((index >> (n - 1 - i)) & 1 for i in range(n))


@dataclass(frozen=True)
class Event:
    """A set of equal-length chains, stored in lexicographic order.

    ``n`` is the chain length; it is inferred from the chains and only needs
    to be given explicitly for the empty event.
    """

    chains: tuple[Chain, ...]
    n: int | None = None

    def __init__(self, chains: Iterable = (), n: int | None = None):
        parsed = sorted({as_chain(c) for c in chains})
        lengths = {len(c) for c in parsed}
        if len(lengths) > 1:
            raise ConfigurationError(f"chains of an event must share one length, got {sorted(lengths)}")
        if lengths:
            (length,) = lengths
            if n is not None and n != length:
                raise ConfigurationError(f"chain length mismatch: chains have {length} bits, expected {n}")
            n = length
        object.__setattr__(self, "chains", tuple(parsed))
        object.__setattr__(self, "n", n)

    @classmethod
    def full(cls, n: int) -> "Event":
        return cls(itertools.product((0, 1), repeat=n), n=n)

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> "Event":
        """Parse ``"00,10"``; an empty string (or ``"{}"``) is the empty event."""
        text = text.strip().strip("{}").strip()
        parts = [p for p in (s.strip() for s in text.split(",")) if p]
        return cls(parts, n=n)

    def __len__(self):
        return len(self.chains)

    def __iter__(self):
        return iter(self.chains)

    def __contains__(self, chain):
        return as_chain(chain) in set(self.chains)

    def __str__(self):
        return "{" + ",".join(chain_str(c) for c in self.chains) + "}"

    def sort_key(self):
        return (len(self.chains), self.chains)

    def _length(self, other: "Event") -> int | None:
        if self.n is not None and other.n is not None and self.n != other.n:
            raise ConfigurationError(f"chain length mismatch: {self.n} vs {other.n}")
        return self.n if self.n is not None else other.n

    def union(self, other: "Event") -> "Event":
        return Event(self.chains + other.chains, n=self._length(other))

    __or__ = union

    def isdisjoint(self, other: "Event") -> bool:
        return set(self.chains).isdisjoint(other.chains)

    def complement(self, n: int | None = None) -> "Event":
        n = self.n if n is None else n
        if n is None:
            raise DomainError("the complement of an empty event needs an explicit chain length")
        mine = set(self.chains)
        return Event((c for c in itertools.product((0, 1), repeat=n) if c not in mine), n=n)


@dataclass(frozen=True)
class ExperimentConfig:
    """Initial qubit state and the ordered analyzer directions."""

    initial: np.ndarray
    analyzers: tuple[Direction, ...] = field(default=())

    def __post_init__(self):
        psi = np.asarray(self.initial, dtype=complex).reshape(-1)
        if psi.shape != (2,):
            raise ConfigurationError(f"initial state must have two amplitudes, got shape {psi.shape}")
        if abs(np.linalg.norm(psi) - 1.0) > 1e-12:
            raise ConfigurationError(f"initial state is not normalized (|psi| = {np.linalg.norm(psi)!r})")
        analyzers = tuple(self.analyzers)
        if not analyzers:
            raise ConfigurationError("at least one analyzer is required")
        if not all(isinstance(d, Direction) for d in analyzers):
            raise ConfigurationError("analyzers must be Direction instances")
        psi.setflags(write=False)
        object.__setattr__(self, "initial", psi)
        object.__setattr__(self, "analyzers", analyzers)

    @property
    def n(self) -> int:
        return len(self.analyzers)

    def __hash__(self):
        return hash((self.initial.tobytes(), self.analyzers))

    def __eq__(self, other):
        if not isinstance(other, ExperimentConfig):
            return NotImplemented
        return self.analyzers == other.analyzers and np.array_equal(self.initial, other.initial)


@dataclass(frozen=True)
class InterferenceReport:
    order: int
    value: float


EigenstateFn = Callable[[Direction, int], np.ndarray]


def _check_chain(cfg: ExperimentConfig, chain: Chain):
    if len(chain) != cfg.n:
        raise ConfigurationError(
            f"chain length mismatch: {chain_str(chain)} has {len(chain)} bits, config has {cfg.n} analyzers"
        )


def _check_event(cfg: ExperimentConfig, event: Event):
    if event.n is not None and event.n != cfg.n:
        raise ConfigurationError(f"chain length mismatch: event has {event.n}-bit chains, config has {cfg.n} analyzers")


def amplitude(cfg: ExperimentConfig, chain, *, eigenstate_fn: EigenstateFn = eigenstate) -> complex:
    """Path amplitude: the product of successive eigenstate overlaps.

    The first factor is ``<n_1, g_1 | psi_initial>``. ``eigenstate_fn`` lets
    callers swap in a different phase convention.
    """
    chain = as_chain(chain)
    _check_chain(cfg, chain)
    prev = cfg.initial
    amp = 1.0 + 0.0j
    for d, bit in zip(cfg.analyzers, chain):
        ket = eigenstate_fn(d, bit)
        amp *= np.vdot(ket, prev)
        if amp == 0:
            return 0j
        prev = ket
    return complex(amp)


def decoherence(cfg: ExperimentConfig, x: Event, y: Event, *, eigenstate_fn: EigenstateFn = eigenstate) -> complex:
    """``D(X;Y) = sum_{x,y} A(x) conj(A(y)) [x_n == y_n]``."""
    _check_event(cfg, x)
    _check_event(cfg, y)
    ax = [(c[-1], amplitude(cfg, c, eigenstate_fn=eigenstate_fn)) for c in x]
    ay = [(c[-1], amplitude(cfg, c, eigenstate_fn=eigenstate_fn)) for c in y]
    total = 0j
    for fx, a in ax:
        for fy, b in ay:
            if fx == fy:
                total += a * b.conjugate()
    return total


def measure(cfg: ExperimentConfig, event: Event, *, eigenstate_fn: EigenstateFn = eigenstate) -> float:
    """Quantum measure ``mu(E) = D(E;E)``."""
    d = decoherence(cfg, event, event, eigenstate_fn=eigenstate_fn)
    if abs(d.imag) > IMAG_RESIDUE_LIMIT:
        raise ArithmeticError(f"D(E;E) has imaginary part {d.imag!r}; eigenstate convention is broken")
    return float(d.real)


def interference(cfg: ExperimentConfig, sets: Sequence[Event], order: int) -> InterferenceReport:
    """Interference functional I_1, I_2 or I_3 over pairwise disjoint events."""
    if order not in (1, 2, 3):
        raise DomainError(f"interference order must be 1, 2 or 3, got {order}")
    if len(sets) != order:
        raise DomainError(f"I_{order} takes exactly {order} events, got {len(sets)}")
    for a, b in itertools.combinations(sets, 2):
        if not a.isdisjoint(b):
            raise DomainError(f"events {a} and {b} are not disjoint")

    mu = lambda *evs: measure(cfg, _union(evs))  # noqa: E731
    if order == 1:
        (a,) = sets
        value = mu(a)
    elif order == 2:
        a, b = sets
        value = mu(a, b) - mu(a) - mu(b)
    else:
        a, b, c = sets
        value = mu(a, b, c) - mu(a, b) - mu(b, c) - mu(a, c) + mu(a) + mu(b) + mu(c)
    return InterferenceReport(order, value)


def _union(events) -> Event:
    out = events[0]
    for e in events[1:]:
        out = out | e
    return out


def enumerate_events(n: int, k: int) -> Iterator[Event]:
    """All events of cardinality ``k`` over ``n``-bit chains, lexicographically."""
    if n < 1:
        raise DomainError(f"chain length must be >= 1, got {n}")
    total = 1 << n
    if not 0 <= k <= total:
        raise DomainError(f"cardinality must lie in [0, {total}], got {k}")
    if k * math.comb(total, k) > ENUMERATION_CAP:
        raise ResourceError(f"enumerating C(2^{n}, {k}) events exceeds the cap of {ENUMERATION_CAP} chain entries")
    chains = list(itertools.product((0, 1), repeat=n))
    for combo in itertools.combinations(chains, k):
        yield Event(combo, n=n)


def all_events(n: int) -> Iterator[Event]:
    """Every event over ``n``-bit chains, ordered by cardinality then lexicographically."""
    for k in range((1 << n) + 1):
        yield from enumerate_events(n, k)
