"""Dense finite-dimensional operator algebra: tensor products, expectations, commutators.

Everything is immutable after construction and safe to share across threads.
Dimensions stay small (at most ~128 in this package), so dense storage is fine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ATOL = 1e-12


class DimensionMismatch(ValueError):
    """Operands live in Hilbert spaces of different dimension."""


@dataclass(frozen=True, eq=False)
class Operator:
    """Square complex matrix. ``hermitian=True`` enforces self-adjointness at construction."""

    entries: np.ndarray
    hermitian: bool = False

    def __post_init__(self) -> None:
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be a square matrix, got shape {m.shape}")
        if self.hermitian:
            deviation = float(np.max(np.abs(m - m.conj().T)))
            if deviation > ATOL:
                raise ValueError(
                    f"operator flagged hermitian deviates from its adjoint by {deviation:.3e}"
                )
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class State:
    """Unit-norm complex vector."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.amplitudes, dtype=complex)
        if v.ndim != 1:
            raise ValueError(f"state must be a vector, got shape {v.shape}")
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > ATOL:
            raise ValueError(f"state norm {norm!r} is not 1 within {ATOL}")
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]


def identity(dim: int) -> Operator:
    if dim < 1:
        raise ValueError("dimension must be positive")
    return Operator(np.eye(dim), hermitian=True)


def tensor(a: Operator, b: Operator) -> Operator:
    """Kronecker product; the result is flagged hermitian when both factors are."""
    return Operator(np.kron(a.entries, b.entries), hermitian=a.hermitian and b.hermitian)


def expectation(s: State, m: Operator) -> complex:
    """Return <s|m|s>. For hermitian m the imaginary part stays below 1e-12."""
    if s.dim != m.dim:
        raise DimensionMismatch(f"state dim {s.dim} != operator dim {m.dim}")
    return complex(np.vdot(s.amplitudes, m.entries @ s.amplitudes))


def commutator_norm(a: Operator, b: Operator) -> float:
    """Spectral norm of ab - ba.

    For hermitian inputs i[a,b] is hermitian, so the norm comes from a hermitian
    eigen-solve; otherwise from the largest singular value. The argument pair is
    canonicalized first so that the result is exactly symmetric in (a, b).
    """
    if a.dim != b.dim:
        raise DimensionMismatch(f"operator dims differ: {a.dim} != {b.dim}")
    if b.entries.tobytes() < a.entries.tobytes():
        a, b = b, a
    k = a.entries @ b.entries - b.entries @ a.entries
    ik = 1j * k
    if float(np.max(np.abs(ik - ik.conj().T))) <= ATOL:
        return float(np.max(np.abs(np.linalg.eigvalsh(ik))))
    return float(np.linalg.norm(k, 2))
