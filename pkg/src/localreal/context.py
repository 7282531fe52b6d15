"""Commuting operator families and translation covariance on finite lattices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .hilbert import ATOL, Operator, commutator_norm

DEFAULT_TOLERANCE = 1e-10


class NonHermitianError(ValueError):
    def __init__(self, index: int, deviation: float):
        self.index = index
        self.deviation = deviation
        super().__init__(f"operator {index} deviates from its adjoint by {deviation:.3e}")


class NonCommutingError(ValueError):
    def __init__(self, pair: tuple[int, int], norm: float, tolerance: float):
        self.pair = pair
        self.norm = norm
        self.tolerance = tolerance
        super().__init__(
            f"operators {pair[0]} and {pair[1]} fail to commute: "
            f"norm {norm:.6e} exceeds tolerance {tolerance:.1e}"
        )


@dataclass(frozen=True, eq=False)
class Context:
    """A family of pairwise-commuting hermitian operators on one space."""

    operators: tuple[Operator, ...]
    tolerance: float


def worst_commutator(ops: Sequence[Operator]) -> tuple[tuple[int, int], float]:
    """Largest pairwise commutator norm in the family and the indices achieving it."""
    worst_pair = (0, 0)
    worst = 0.0
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            norm = commutator_norm(ops[i], ops[j])
            if norm > worst:
                worst = norm
                worst_pair = (i, j)
    return worst_pair, worst


def make_context(ops: Sequence[Operator], tol: float = DEFAULT_TOLERANCE) -> Context:
    """Validate and assemble a commuting family.

    All pairs are checked before judging, so the verdict and the reported
    worst pair do not depend on the order of the list.
    """
    ops = tuple(ops)
    if not ops:
        raise ValueError("a context needs at least one operator")
    dim = ops[0].dim
    for i, op in enumerate(ops):
        if op.dim != dim:
            raise ValueError(f"operator {i} has dim {op.dim}, expected {dim}")
        deviation = float(np.max(np.abs(op.entries - op.entries.conj().T)))
        if deviation > ATOL:
            raise NonHermitianError(i, deviation)
    worst_pair, worst = worst_commutator(ops)
    if worst > tol:
        raise NonCommutingError(worst_pair, worst, tol)
    return Context(ops, tol)


def _cyclic_shift(n: int) -> np.ndarray:
    # maps site j to site j+1 mod n
    return np.roll(np.eye(n), 1, axis=0)


def translation_context(n: int) -> Context:
    """Commuting hermitian generators built from cyclic shifts of an n-site lattice.

    For each power k of the shift this yields the symmetric and antisymmetric
    circulant combinations; all circulants commute.
    """
    if n < 2:
        raise ValueError("need at least 2 lattice sites")
    shift = _cyclic_shift(n)
    ops = []
    power = np.eye(n)
    for _ in range(n // 2):
        power = power @ shift
        ops.append(Operator(0.5 * (power + power.T), hermitian=True))
        ops.append(Operator(0.5j * (power - power.T), hermitian=True))
    return make_context(ops, DEFAULT_TOLERANCE)


def internal_symmetry_context(charges: Sequence[int], dim: int | None = None) -> Context:
    """Diagonal charge operator and its square as a trivially commuting family."""
    q = np.asarray(charges, dtype=float)
    if dim is not None and len(q) != dim:
        raise ValueError(f"got {len(q)} charges for dimension {dim}")
    generator = np.diag(q)
    return make_context(
        [Operator(generator, hermitian=True), Operator(generator @ generator, hermitian=True)],
        DEFAULT_TOLERANCE,
    )


@dataclass(frozen=True, eq=False)
class TranslationSystem:
    """Cyclic-shift unitary and site projectors on a periodic lattice."""

    n_sites: int
    shift: Operator

    def __post_init__(self) -> None:
        u = self.shift.entries
        if u.shape != (self.n_sites, self.n_sites):
            raise ValueError("shift matrix size must match the lattice")
        eye = np.eye(self.n_sites)
        if float(np.max(np.abs(u @ u.conj().T - eye))) > ATOL:
            raise ValueError("shift operator is not unitary")
        if float(np.max(np.abs(np.linalg.matrix_power(u, self.n_sites) - eye))) > ATOL:
            raise ValueError("shift operator does not close after one lattice period")

    def projector(self, sites: Iterable[int]) -> Operator:
        mask = np.zeros(self.n_sites)
        for s in sites:
            if not 0 <= int(s) < self.n_sites:
                raise ValueError(f"site {s} outside the lattice of {self.n_sites} sites")
            mask[int(s)] = 1.0
        return Operator(np.diag(mask), hermitian=True)


def translation_system(n: int) -> TranslationSystem:
    if n < 2:
        raise ValueError("need at least 2 lattice sites")
    return TranslationSystem(n_sites=n, shift=Operator(_cyclic_shift(n)))


def covariance_check(ts: TranslationSystem, sites: Iterable[int], d: int) -> float:
    """Residual of shift-conjugation covariance for one site subset and shift.

    Conjugating the subset projector by the d-fold shift must equal the
    projector of the translated subset; returns the max-abs deviation.
    """
    sites = sorted({int(s) for s in sites})
    if not 0 <= d < ts.n_sites:
        raise ValueError(f"shift {d} outside [0, {ts.n_sites})")
    u_d = np.linalg.matrix_power(ts.shift.entries, d)
    p = ts.projector(sites).entries
    moved = u_d @ p @ u_d.conj().T
    target = ts.projector([(s + d) % ts.n_sites for s in sites]).entries
    return float(np.max(np.abs(moved - target)))
