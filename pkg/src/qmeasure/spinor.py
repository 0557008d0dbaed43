"""Spin-1/2 eigenstates along analyzer directions.

Convention for the eigenstates of ``n . sigma`` with ``n = (theta, phi)``::

    |n, 0> =  cos(theta/2) |0> + e^{i phi} sin(theta/2) |1>
    |n, 1> = -e^{-i phi} sin(theta/2) |0> + cos(theta/2) |1>

Bit 0 is the upper beam (eigenvalue +1), bit 1 the lower beam. Measures and
protocol probabilities do not depend on this phase choice.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Direction:
    """Analyzer orientation as polar/azimuthal angles in radians."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        theta, phi = float(self.theta), float(self.phi)
        if not (math.isfinite(theta) and math.isfinite(phi)):
            raise ValueError(f"direction angles must be finite, got ({theta}, {phi})")
        if not -1e-12 <= theta <= math.pi + 1e-12:
            raise ValueError(f"theta must lie in [0, pi], got {theta}")
        object.__setattr__(self, "theta", min(max(theta, 0.0), math.pi))
        object.__setattr__(self, "phi", phi % TWO_PI)

    @classmethod
    def from_cartesian(cls, x: float, y: float, z: float) -> "Direction":
        norm = math.sqrt(x * x + y * y + z * z)
        if not math.isfinite(norm) or norm < 1e-9:
            raise ValueError(f"cannot normalize direction vector ({x}, {y}, {z})")
        theta = math.acos(max(-1.0, min(1.0, z / norm)))
        phi = math.atan2(y, x)
        return cls(theta, phi)

    @classmethod
    def named(cls, name: str) -> "Direction":
        try:
            theta, phi = ALIASES[name.strip().upper().replace("−", "-")]
        except KeyError:
            raise ValueError(
                f"unknown direction alias {name!r}; known: {sorted(ALIASES)}"
            ) from None
        return cls(theta, phi)

    def cartesian(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])


ALIASES = {
    "Z": (0.0, 0.0),
    "X": (math.pi / 2, 0.0),
    "Y": (math.pi / 2, math.pi / 2),
    "-Z": (math.pi, 0.0),
    "-X": (math.pi / 2, math.pi),
    "-Y": (math.pi / 2, 3 * math.pi / 2),
}

Z = Direction(*ALIASES["Z"])
X = Direction(*ALIASES["X"])
Y = Direction(*ALIASES["Y"])


def qubit_state(a0: complex, a1: complex, *, normalize: bool = False) -> np.ndarray:
    """Return ``a0|0> + a1|1>`` as a complex vector.

    Raises ``ValueError`` if the state is not unit norm to 1e-12, unless
    ``normalize`` is set.
    """
    psi = np.array([a0, a1], dtype=complex)
    norm = np.linalg.norm(psi)
    if normalize:
        if norm < 1e-12:
            raise ValueError("cannot normalize the zero vector")
        return psi / norm
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"qubit state is not normalized (|psi| = {norm!r})")
    return psi


def eigenstate(d: Direction, bit: int) -> np.ndarray:
    """Eigenstate ``|d, bit>`` in the computational basis."""
    c = math.cos(d.theta / 2)
    s = math.sin(d.theta / 2)
    if bit == 0:
        return np.array([c, np.exp(1j * d.phi) * s], dtype=complex)
    if bit == 1:
        return np.array([-np.exp(-1j * d.phi) * s, c], dtype=complex)
    raise ValueError(f"bit must be 0 or 1, got {bit!r}")


def eigenbasis(d: Direction, eigenstate_fn=eigenstate) -> np.ndarray:
    """2x2 unitary whose columns are ``|d,0>`` and ``|d,1>``."""
    return np.column_stack([eigenstate_fn(d, 0), eigenstate_fn(d, 1)])


def overlap(da: Direction, ba: int, db: Direction, bb: int) -> complex:
    """``<da, ba | db, bb>``."""
    return complex(np.vdot(eigenstate(da, ba), eigenstate(db, bb)))
