"""Singlet spin correlations and CHSH evaluation.

The CHSH machinery takes the correlation function as an opaque callable
``corr(a, b) -> float`` on pairs of unit vectors, so the same code serves the
quantum correlation, exact hidden-variable models, and sampled estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .hilbert import Operator, State, expectation, tensor

UNIT_ATOL = 1e-12

Correlation = Callable[[np.ndarray, np.ndarray], float]

_PAULI = np.array(
    [
        [[0.0, 1.0], [1.0, 0.0]],
        [[0.0, -1.0j], [1.0j, 0.0]],
        [[1.0, 0.0], [0.0, -1.0]],
    ],
    dtype=complex,
)


def as_unit_vector(v) -> np.ndarray:
    """Validate and freeze a 3-component unit vector."""
    u = np.array(v, dtype=float)
    if u.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {u.shape}")
    norm = float(np.linalg.norm(u))
    if abs(norm - 1.0) > UNIT_ATOL:
        raise ValueError(f"vector norm {norm!r} is not 1 within {UNIT_ATOL}")
    u.setflags(write=False)
    return u


def normalized(v) -> np.ndarray:
    """Unit vector pointing along ``v``."""
    u = np.array(v, dtype=float)
    norm = float(np.linalg.norm(u))
    if norm == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return as_unit_vector(u / norm)


@dataclass(frozen=True, eq=False)
class ChshSettings:
    """The four measurement directions entering the CHSH combination."""

    a: np.ndarray
    a_prime: np.ndarray
    b: np.ndarray
    b_prime: np.ndarray

    def __post_init__(self) -> None:
        for name in ("a", "a_prime", "b", "b_prime"):
            object.__setattr__(self, name, as_unit_vector(getattr(self, name)))


def plane_vector(theta: float) -> np.ndarray:
    """Direction at angle ``theta`` from z toward x, inside the x-z plane."""
    return as_unit_vector(np.array([math.sin(theta), 0.0, math.cos(theta)]))


def planar_settings(a: float, a_prime: float, b: float, b_prime: float) -> ChshSettings:
    """CHSH settings from four angles (radians) in the x-z plane."""
    return ChshSettings(plane_vector(a), plane_vector(a_prime), plane_vector(b), plane_vector(b_prime))


def pauli_dot(a) -> Operator:
    """The 2x2 spin observable along direction ``a``: traceless, eigenvalues +-1."""
    u = as_unit_vector(a)
    return Operator(np.tensordot(u, _PAULI, axes=1), hermitian=True)


# Grid scans re-evaluate the same directions many times; cache the observables.
_PAULI_CACHE: dict[bytes, Operator] = {}
_PAULI_CACHE_MAX = 1 << 16


def _pauli_cached(a) -> Operator:
    u = as_unit_vector(a)
    key = u.tobytes()
    op = _PAULI_CACHE.get(key)
    if op is None:
        op = pauli_dot(u)
        if len(_PAULI_CACHE) < _PAULI_CACHE_MAX:
            _PAULI_CACHE[key] = op
    return op


_SINGLET = State(np.array([0.0, 1.0, -1.0, 0.0]) / math.sqrt(2.0))


def singlet_state() -> State:
    """Two-qubit antisymmetric state, amplitudes (0, 1, -1, 0)/sqrt(2) in the product basis."""
    return _SINGLET


def spin_correlation(a, b) -> float:
    """<singlet| (sigma.a x sigma.b) |singlet>, computed through the operator algebra.

    Equals -(a.b); that identity is asserted by tests, never assumed here.
    """
    op = tensor(_pauli_cached(a), _pauli_cached(b))
    return float(expectation(singlet_state(), op).real)


def chsh_value(corr: Correlation, s: ChshSettings) -> float:
    """|corr(a,b) - corr(a,b')| + |corr(a',b) + corr(a',b')|."""
    return abs(corr(s.a, s.b) - corr(s.a, s.b_prime)) + abs(
        corr(s.a_prime, s.b) + corr(s.a_prime, s.b_prime)
    )


def _corr_matrix(corr: Correlation, avs: Sequence[np.ndarray], bvs: Sequence[np.ndarray]) -> np.ndarray:
    return np.array([[corr(va, vb) for vb in bvs] for va in avs])


def chsh_optimize(
    corr: Correlation,
    *,
    grid_deg: float = 1.0,
    rounds: int = 3,
    factor: int = 10,
) -> tuple[ChshSettings, float]:
    """Maximize the CHSH combination over coplanar settings in the x-z plane.

    Deterministic: a coarse scan at ``grid_deg`` resolution followed by
    ``rounds`` local refinements, each ``factor`` times finer. The planar
    restriction loses nothing for correlations that depend only on the angle
    between the two directions. Ties resolve to the first maximizer in scan
    order. The returned value is the maximum over every probed tuple.
    """
    step = math.radians(grid_deg)
    n = int(round(2.0 * math.pi / step))
    thetas = [k * step for k in range(n)]
    vecs = [plane_vector(t) for t in thetas]
    c = _corr_matrix(corr, vecs, vecs)

    best_value = -math.inf
    best = (0.0, 0.0, 0.0, 0.0)
    # The maximum over (a, a') separates for each (b, b') pair, which keeps the
    # 4-angle scan quadratic instead of quartic in the grid size.
    for jb in range(n):
        diff = np.abs(c[:, jb, None] - c)
        summ = np.abs(c[:, jb, None] + c)
        t_diff = diff.max(axis=0)
        t_sum = summ.max(axis=0)
        total = t_diff + t_sum
        jb2 = int(np.argmax(total))
        value = float(total[jb2])
        if value > best_value:
            ia = int(np.argmax(diff[:, jb2]))
            ia2 = int(np.argmax(summ[:, jb2]))
            best_value = value
            best = (thetas[ia], thetas[ia2], thetas[jb], thetas[jb2])

    for _ in range(rounds):
        fine = step / factor
        offsets = [(k - factor) * fine for k in range(2 * factor + 1)]
        cand = [[center + off for off in offsets] for center in best]
        cvecs = [[plane_vector(t) for t in angles] for angles in cand]
        c_ab = _corr_matrix(corr, cvecs[0], cvecs[2])
        c_ab2 = _corr_matrix(corr, cvecs[0], cvecs[3])
        c_a2b = _corr_matrix(corr, cvecs[1], cvecs[2])
        c_a2b2 = _corr_matrix(corr, cvecs[1], cvecs[3])
        diff = np.abs(c_ab[:, :, None] - c_ab2[:, None, :])
        summ = np.abs(c_a2b[:, :, None] + c_a2b2[:, None, :])
        total = diff.max(axis=0) + summ.max(axis=0)
        flat = int(np.argmax(total))
        kb, mb = divmod(flat, total.shape[1])
        ia = int(np.argmax(diff[:, kb, mb]))
        ia2 = int(np.argmax(summ[:, kb, mb]))
        # The incumbent tuple sits on the candidate grid, so the round maximum
        # can only improve on it.
        best_value = float(total[kb, mb])
        best = (cand[0][ia], cand[1][ia2], cand[2][kb], cand[3][mb])
        step = fine

    return planar_settings(*best), best_value
