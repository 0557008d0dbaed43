"""Dense state-vector simulation of the particle coupled to n ancillas.

Basis ordering, shared by every module::

    index = particle_bit * 2**n + int(g_1 g_2 ... g_n)   (g_1 most significant)

The particle bit is expressed in the eigenbasis of the *last* analyzer, so it
labels the beam the particle emerges in. With this frame the coupled state is
``sum_g A(g) |g_n, g>`` with the amplitudes of :func:`histories.amplitude`
reproduced exactly, phases included.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, PreclusionError, ResourceError
from .histories import ExperimentConfig
from .spinor import eigenbasis

DEFAULT_MAX_N = 20
NORM_TOL = 1e-12
UNITARY_TOL = 1e-10
PROJECTOR_TOL = 1e-10
ZERO_PROBABILITY = 1e-14


def max_ancillas() -> int:
    """Ancilla cap; the ``QMEASURE_MAX_N`` environment variable overrides it."""
    raw = os.environ.get("QMEASURE_MAX_N")
    if raw is None:
        return DEFAULT_MAX_N
    try:
        return int(raw)
    except ValueError:
        raise ConfigurationError(f"QMEASURE_MAX_N must be an integer, got {raw!r}") from None


def check_size(n: int):
    cap = max_ancillas()
    if n > cap:
        raise ResourceError(f"{n} ancillas exceeds the dense-simulation cap of {cap} (set QMEASURE_MAX_N)")


@dataclass(frozen=True, eq=False)
class JointState:
    """Normalized amplitudes over particle (x) n ancillas."""

    amplitudes: np.ndarray
    n: int

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2 << self.n:
            raise ConfigurationError(f"expected {2 << self.n} amplitudes for {self.n} ancillas, got {amps.size}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ConfigurationError(f"joint state is not normalized (|psi| = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def product(cls, particle, ancillas) -> "JointState":
        ancillas = np.asarray(ancillas, dtype=complex)
        n = int(np.log2(ancillas.size))
        return cls(np.kron(np.asarray(particle, dtype=complex), ancillas), n)

    @property
    def matrix(self) -> np.ndarray:
        """Read-only ``(2, 2**n)`` view: rows are the particle bit."""
        return self.amplitudes.reshape(2, 1 << self.n)

    def amplitude(self, particle_bit: int, ancilla_index: int) -> complex:
        return complex(self.matrix[particle_bit, ancilla_index])


class AncillaOperator:
    """Unitary acting on the ancilla register only.

    Three storage forms: a dense ``2**n x 2**n`` matrix, a permutation of the
    computational basis (``perm[i]`` is the image of ``|i>``), or a block
    acting on a list of basis indices with identity elsewhere.
    """

    def __init__(self, n: int, *, matrix=None, permutation=None, subspace=None):
        forms = [f is not None for f in (matrix, permutation, subspace)]
        if sum(forms) != 1:
            raise ValueError("give exactly one of matrix, permutation, subspace")
        self.n = n
        dim = 1 << n
        self.matrix = self.permutation = self.subspace = None
        if matrix is not None:
            check_size(n)
            m = np.asarray(matrix, dtype=complex)
            if m.shape != (dim, dim):
                raise ConfigurationError(f"ancilla operator must be {dim}x{dim}, got {m.shape}")
            _check_unitary(m)
            self.matrix = m
        elif permutation is not None:
            p = np.asarray(permutation, dtype=np.int64)
            if p.shape != (dim,) or not np.array_equal(np.sort(p), np.arange(dim)):
                raise ConfigurationError("permutation must be a rearrangement of range(2**n)")
            self.permutation = p
        else:
            indices, block = subspace
            idx = np.asarray(indices, dtype=np.int64)
            b = np.asarray(block, dtype=complex)
            if len(set(idx.tolist())) != idx.size or idx.min(initial=0) < 0 or idx.max(initial=0) >= dim:
                raise ConfigurationError("subspace indices must be distinct basis indices")
            if b.shape != (idx.size, idx.size):
                raise ConfigurationError(f"block must be {idx.size}x{idx.size}, got {b.shape}")
            _check_unitary(b)
            self.subspace = (idx, b)

    @classmethod
    def identity(cls, n: int) -> "AncillaOperator":
        return cls(n, permutation=np.arange(1 << n))

    def apply(self, vecs: np.ndarray) -> np.ndarray:
        """Apply to the last axis of ``vecs`` (ancilla index)."""
        vecs = np.asarray(vecs, dtype=complex)
        if self.matrix is not None:
            return vecs @ self.matrix.T
        out = np.zeros_like(vecs) if self.permutation is not None else vecs.copy()
        if self.permutation is not None:
            out[..., self.permutation] = vecs
        else:
            idx, b = self.subspace
            out[..., idx] = vecs[..., idx] @ b.T
        return out

    def dense(self) -> np.ndarray:
        check_size(self.n)
        return self.apply(np.eye(1 << self.n, dtype=complex)).T

    def adjoint(self) -> "AncillaOperator":
        if self.matrix is not None:
            return AncillaOperator(self.n, matrix=self.matrix.conj().T)
        if self.permutation is not None:
            return AncillaOperator(self.n, permutation=np.argsort(self.permutation))
        idx, b = self.subspace
        return AncillaOperator(self.n, subspace=(idx, b.conj().T))


def _check_unitary(m: np.ndarray):
    err = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) if m.size else 0.0
    if err >= UNITARY_TOL:
        raise ConfigurationError(f"operator is not unitary (max |U^dag U - I| = {err:.3g})")


class AncillaProjector:
    """Orthogonal projector on the ancilla register, rank-1 or general."""

    def __init__(self, n: int, *, vector=None, matrix=None):
        if (vector is None) == (matrix is None):
            raise ValueError("give exactly one of vector, matrix")
        self.n = n
        dim = 1 << n
        self.vector = self.matrix = None
        if vector is not None:
            v = np.asarray(vector, dtype=complex).reshape(-1)
            if v.size != dim:
                raise ConfigurationError(f"projector vector must have {dim} entries, got {v.size}")
            norm = np.linalg.norm(v)
            if abs(norm - 1.0) > PROJECTOR_TOL:
                raise ConfigurationError(f"projector vector is not unit norm (|v| = {norm!r})")
            self.vector = v
        else:
            m = np.asarray(matrix, dtype=complex)
            if m.shape != (dim, dim):
                raise ConfigurationError(f"projector must be {dim}x{dim}, got {m.shape}")
            if np.max(np.abs(m @ m - m)) >= PROJECTOR_TOL or np.max(np.abs(m - m.conj().T)) >= PROJECTOR_TOL:
                raise ConfigurationError("matrix is not an orthogonal projector")
            self.matrix = m

    @classmethod
    def basis(cls, n: int, index: int) -> "AncillaProjector":
        v = np.zeros(1 << n, dtype=complex)
        v[index] = 1.0
        return cls(n, vector=v)

    @classmethod
    def identity(cls, n: int) -> "AncillaProjector":
        return cls(n, matrix=np.eye(1 << n, dtype=complex))

    @property
    def is_rank_one(self) -> bool:
        return self.vector is not None

    def rank(self) -> int:
        if self.vector is not None:
            return 1
        return int(round(np.trace(self.matrix).real))

    def dense(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        return np.outer(self.vector, self.vector.conj())

    def complement(self) -> "AncillaProjector":
        return AncillaProjector(self.n, matrix=np.eye(1 << self.n) - self.dense())

    def project(self, vecs: np.ndarray) -> np.ndarray:
        """Apply to the last axis of ``vecs``."""
        if self.vector is not None:
            coeff = vecs @ self.vector.conj()
            return coeff[..., None] * self.vector
        return vecs @ self.matrix.T


def _cnot_on(psi: np.ndarray, n: int, step: int) -> np.ndarray:
    """Flip ancilla ``step`` (0-based) where the particle bit is 1."""
    out = psi.copy()
    lower = out[1].reshape((2,) * n)
    out[1] = np.flip(lower, axis=step).reshape(-1)
    return out


def run_coupled(cfg: ExperimentConfig, *, eigenstate_fn=None) -> JointState:
    """Evolve particle + ancillas through every analyzer with CNOT couplings.

    Ancillas start in ``|0>``. At analyzer i the particle is re-expanded in
    that analyzer's eigenbasis and then controls a NOT on ancilla i.
    """
    n = cfg.n
    check_size(n)
    kw = {} if eigenstate_fn is None else {"eigenstate_fn": eigenstate_fn}
    psi = np.zeros((2, 1 << n), dtype=complex)
    psi[:, 0] = cfg.initial
    frame = np.eye(2, dtype=complex)
    for step, d in enumerate(cfg.analyzers):
        basis = eigenbasis(d, **kw)
        # particle coefficients: previous frame -> this analyzer's eigenbasis
        psi = (basis.conj().T @ frame) @ psi
        psi = _cnot_on(psi, n, step)
        frame = basis
    return JointState(psi.reshape(-1), n)


def _check_dims(s: JointState, op):
    if op.n != s.n:
        raise ConfigurationError(f"operator acts on {op.n} ancillas, state has {s.n}")


def apply_ancilla_unitary(s: JointState, u: AncillaOperator) -> JointState:
    _check_dims(s, u)
    out = u.apply(s.matrix)
    norm = np.linalg.norm(out)
    if abs(norm - 1.0) > NORM_TOL:
        raise ArithmeticError(f"norm drifted to {norm!r} under ancilla unitary")
    return JointState(out.reshape(-1), s.n)


def outcome_probability(s: JointState, p: AncillaProjector) -> float:
    """``|| (I_s (x) P) |s> ||^2``."""
    _check_dims(s, p)
    if p.vector is not None:
        coeff = s.matrix @ p.vector.conj()
        return float(np.real(np.vdot(coeff, coeff)))
    projected = p.project(s.matrix)
    return float(np.real(np.vdot(projected, projected)))


def collapse(s: JointState, p: AncillaProjector) -> JointState:
    """Normalized post-measurement state for outcome ``p``.

    Raises :class:`PreclusionError` when the outcome has probability below
    1e-14.
    """
    prob = outcome_probability(s, p)
    if prob < ZERO_PROBABILITY:
        raise PreclusionError(f"outcome has probability {prob:.3g}; cannot condition on it")
    out = p.project(s.matrix) / np.sqrt(prob)
    if p.vector is not None:
        # rank-1 outcome leaves a product state: particle (x) vector
        particle = out @ p.vector.conj()
        if np.max(np.abs(np.outer(particle, p.vector) - out)) > 1e-10:
            raise ArithmeticError("rank-1 collapse did not factorize")
    return JointState(out.reshape(-1), s.n)


def particle_factor(s: JointState, vector) -> np.ndarray:
    """Particle state ``(I (x) <v|) |s>``; normalized if nonzero."""
    v = np.asarray(vector, dtype=complex).reshape(-1)
    particle = s.matrix @ v.conj()
    norm = np.linalg.norm(particle)
    return particle / norm if norm > 0 else particle


def reduced_density(s: JointState) -> np.ndarray:
    """2x2 particle density matrix with every ancilla traced out."""
    m = s.matrix
    return m @ m.conj().T


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))
