"""Quadrature cross moments and their factorization into separated random processes.

A two-particle state enters only through its four position/momentum cross
moments (hbar = 1, mass = 1). Those moments factor as F G^T over a pair of
orthonormal noise components, which realizes the rotated-quadrature correlation
as a classical expectation of two separated processes. No bound on the process
values is required, which is exactly why the construction always succeeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import sampling
from .lhv import McEstimate

MOMENT_PIVOT_ATOL = 1e-12

NOISE_KINDS = ("rademacher", "gaussian")


class DegenerateMomentError(ValueError):
    """The pivot moment <q1 q2> vanishes; use the total factorization instead."""


@dataclass(frozen=True)
class CrossMoments:
    """The four second moments: qq=<q1 q2>, pq=<p1 q2>, qp=<q1 p2>, pp=<p1 p2>."""

    qq: float
    pq: float
    qp: float
    pp: float

    def matrix(self) -> np.ndarray:
        """Row index = (q1, p1) part, column index = (q2, p2) part."""
        return np.array([[self.qq, self.qp], [self.pq, self.pp]], dtype=float)


@dataclass(frozen=True)
class CanonicalRotation:
    """Quadrature mixing q(alpha) = q cos(alpha) - p sin(alpha); determinant 1."""

    angle: float

    @property
    def matrix(self) -> np.ndarray:
        c, s = math.cos(self.angle), math.sin(self.angle)
        return np.array([[c, -s], [s, c]])

    @property
    def determinant(self) -> float:
        c, s = math.cos(self.angle), math.sin(self.angle)
        return c * c + s * s


def _angle(alpha) -> float:
    return alpha.angle if isinstance(alpha, CanonicalRotation) else float(alpha)


@dataclass(frozen=True, eq=False)
class ProcessPair:
    """Coefficient matrices over an orthonormal noise pair.

    Row 0 of each matrix is the static part (f), row 1 the conjugate part (g):
    particle 1 coefficients in ``f_coeffs``, particle 2 in ``g_coeffs``.
    """

    f_coeffs: np.ndarray
    g_coeffs: np.ndarray

    def __post_init__(self) -> None:
        for name in ("f_coeffs", "g_coeffs"):
            m = np.array(getattr(self, name), dtype=float)
            if m.shape != (2, 2):
                raise ValueError(f"{name} must be 2x2, got shape {m.shape}")
            m.setflags(write=False)
            object.__setattr__(self, name, m)

    def implied_moments(self) -> np.ndarray:
        return self.f_coeffs @ self.g_coeffs.T


def rotated_correlation(m: CrossMoments, alpha1, alpha2) -> float:
    """Four-term expansion of the correlation of rotated quadratures."""
    a1, a2 = _angle(alpha1), _angle(alpha2)
    c1, s1 = math.cos(a1), math.sin(a1)
    c2, s2 = math.cos(a2), math.sin(a2)
    return m.qq * c1 * c2 - m.pq * s1 * c2 - m.qp * c1 * s2 + m.pp * s1 * s2


def process_pair_identity(m: CrossMoments) -> ProcessPair:
    """Total factorization: the moment matrix rides on particle 1, G = I.

    Works for every moment matrix and reproduces it exactly, including qq = 0.
    """
    return ProcessPair(m.matrix(), np.eye(2))


def process_pair_triangular(m: CrossMoments) -> ProcessPair:
    """Factorization with a unit-triangular particle-2 factor; needs qq != 0.

    The pivot ratio qp/qq is computed once and reused so that the implied
    moments match the target to machine precision.
    """
    if abs(m.qq) <= MOMENT_PIVOT_ATOL:
        raise DegenerateMomentError(f"pivot moment qq={m.qq!r} is too close to zero")
    ratio = m.qp / m.qq
    f = np.array([[m.qq, 0.0], [m.pq, m.pp - m.pq * ratio]])
    g = np.array([[1.0, 0.0], [ratio, 1.0]])
    return ProcessPair(f, g)


def verify_moments(p: ProcessPair, m: CrossMoments) -> float:
    """Max-abs deviation of the implied moments from the target."""
    return float(np.max(np.abs(p.implied_moments() - m.matrix())))


def process_correlation(p: ProcessPair, alpha1, alpha2) -> float:
    """Exact expectation of the rotated process product, via coefficient algebra."""
    a1, a2 = _angle(alpha1), _angle(alpha2)
    c1 = p.f_coeffs[0] * math.cos(a1) - p.f_coeffs[1] * math.sin(a1)
    c2 = p.g_coeffs[0] * math.cos(a2) - p.g_coeffs[1] * math.sin(a2)
    return float(np.dot(c1, c2))


def time_correlation(p: ProcessPair, t1: float, t2: float) -> float:
    """Expectation of the freely drifting processes xi(t) = f + g t at (t1, t2).

    Equals qq + pq*t1 + qp*t2 + pp*t1*t2 when ``p`` factors those moments.
    """
    c1 = p.f_coeffs[0] + p.f_coeffs[1] * float(t1)
    c2 = p.g_coeffs[0] + p.g_coeffs[1] * float(t2)
    return float(np.dot(c1, c2))


def _check_noise(dist: str) -> None:
    if dist not in NOISE_KINDS:
        raise ValueError(f"noise kind must be one of {NOISE_KINDS}, got {dist!r}")


def _draw_noise(rng: np.random.Generator, dist: str, count: int, width: int) -> np.ndarray:
    if dist == "rademacher":
        return 2.0 * rng.integers(0, 2, size=(count, width)).astype(float) - 1.0
    return rng.standard_normal((count, width))


def sample_processes(
    p: ProcessPair,
    alpha1,
    alpha2,
    n: int,
    seed: int,
    dist: str = "rademacher",
    threads: int = 1,
) -> McEstimate:
    """Monte Carlo estimate of the rotated process correlation.

    Rademacher noise keeps the processes bounded; gaussian noise shows the
    construction tolerates unbounded variables. Both are exactly orthonormal
    in expectation with zero mean.
    """
    _check_noise(dist)
    if n < 1:
        raise ValueError("need at least one sample")
    a1, a2 = _angle(alpha1), _angle(alpha2)
    c1 = p.f_coeffs[0] * math.cos(a1) - p.f_coeffs[1] * math.sin(a1)
    c2 = p.g_coeffs[0] * math.cos(a2) - p.g_coeffs[1] * math.sin(a2)

    def chunk(rng: np.random.Generator, count: int) -> np.ndarray:
        eta = _draw_noise(rng, dist, count, 2)
        return (eta @ c1) * (eta @ c2)

    mean, std_error = sampling.chunked_mean(chunk, n, seed, threads)
    return McEstimate(mean, std_error, n, seed)


@dataclass(frozen=True, eq=False)
class BivariateFactorization:
    """Separated-process realization of f(s,t) = sum_n g_n(s) h_n(t).

    One orthonormal noise component per term; the analytic correlation is the
    dot product of the two coefficient vectors.
    """

    terms: tuple[tuple[Callable[[float], float], Callable[[float], float]], ...]

    def left_coefficients(self, s: float) -> np.ndarray:
        return np.array([g(s) for g, _ in self.terms], dtype=float)

    def right_coefficients(self, t: float) -> np.ndarray:
        return np.array([h(t) for _, h in self.terms], dtype=float)

    def target(self, s: float, t: float) -> float:
        return math.fsum(g(s) * h(t) for g, h in self.terms)

    def correlation(self, s: float, t: float) -> float:
        return float(np.dot(self.left_coefficients(s), self.right_coefficients(t)))

    def sample(self, s: float, t: float, n: int, seed: int, dist: str = "rademacher", threads: int = 1) -> McEstimate:
        _check_noise(dist)
        if n < 1:
            raise ValueError("need at least one sample")
        cl = self.left_coefficients(s)
        cr = self.right_coefficients(t)

        def chunk(rng: np.random.Generator, count: int) -> np.ndarray:
            if len(self.terms) == 0:
                return np.zeros(count)
            x = _draw_noise(rng, dist, count, len(self.terms))
            return (x @ cl) * (x @ cr)

        mean, std_error = sampling.chunked_mean(chunk, n, seed, threads)
        return McEstimate(mean, std_error, n, seed)


def factorize_bivariate(
    terms: Sequence[tuple[Callable[[float], float], Callable[[float], float]]],
) -> BivariateFactorization:
    """Separated-process object for a finite sum of product terms; empty input gives zero."""
    return BivariateFactorization(tuple((g, h) for g, h in terms))


def tmsv_moments(r: float) -> CrossMoments:
    """Cross moments of the two-mode squeezed vacuum at squeezing ``r``.

    Convention: positions correlate, momenta anti-correlate, and the two mixed
    moments vanish; at r = 0 the modes are uncorrelated. Serves as a
    normalizable entangled source for the factorization machinery.
    """
    r = float(r)
    if abs(r) > 5.0:
        raise ValueError(f"squeezing {r!r} outside the supported range |r| <= 5")
    a = 0.5 * math.sinh(2.0 * r)
    return CrossMoments(qq=a, pq=0.0, qp=0.0, pp=-a)
