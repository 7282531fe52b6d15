"""Gaussian wavepackets, box detectors, localization factors, and bounded models.

Wavefunctions are products of isotropic Gaussians and regions are axis-aligned
boxes, so every localization probability is a product of one-dimensional
error-function integrals and is exact to machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .hilbert import expectation, identity, tensor
from .lhv import LhvModel
from .spin import as_unit_vector, chsh_value, pauli_dot, planar_settings, singlet_state, spin_correlation

_SQRT2 = math.sqrt(2.0)
_THIRD = 1.0 / 3.0

# Settings at which the singlet correlation maximizes the CHSH combination.
CANONICAL_CHSH = planar_settings(0.0, math.pi / 2.0, math.pi / 4.0, 3.0 * math.pi / 4.0)


@dataclass(frozen=True, eq=False)
class Wavepacket:
    """Isotropic Gaussian packet: |psi|^2 is the normal density N(center, sigma^2 I)."""

    center: np.ndarray
    sigma: float

    def __post_init__(self) -> None:
        c = np.array(self.center, dtype=float)
        if c.shape != (3,):
            raise ValueError(f"center must be a 3-vector, got shape {c.shape}")
        if not (self.sigma > 0.0) or not math.isfinite(self.sigma):
            raise ValueError(f"sigma must be a positive finite number, got {self.sigma!r}")
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "sigma", float(self.sigma))


@dataclass(frozen=True, eq=False)
class DetectorRegion:
    """Axis-aligned box, finite or half-infinite per axis."""

    bounds: np.ndarray  # shape (3, 2): lo, hi per axis

    def __post_init__(self) -> None:
        b = np.array(self.bounds, dtype=float)
        if b.shape != (3, 2):
            raise ValueError(f"bounds must have shape (3, 2), got {b.shape}")
        for axis in range(3):
            lo, hi = b[axis]
            if math.isnan(lo) or math.isnan(hi) or not lo < hi:
                raise ValueError(f"axis {axis} bounds ({lo!r}, {hi!r}) leave no interior")
        b.setflags(write=False)
        object.__setattr__(self, "bounds", b)

    @property
    def bounded(self) -> bool:
        return bool(np.all(np.isfinite(self.bounds)))

    def shifted(self, l) -> "DetectorRegion":
        l = np.asarray(l, dtype=float)
        if l.shape != (3,):
            raise ValueError(f"shift must be a 3-vector, got shape {l.shape}")
        return DetectorRegion(self.bounds + l[:, None])

    @classmethod
    def full_space(cls) -> "DetectorRegion":
        return cls(np.array([[-math.inf, math.inf]] * 3))

    @classmethod
    def box(cls, lo, hi) -> "DetectorRegion":
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        return cls(np.stack([lo, hi], axis=1))


def _axis_probability(mu: float, sigma: float, lo: float, hi: float) -> float:
    # erfc on the far side keeps relative precision for boxes deep in a tail.
    a = (lo - mu) / (sigma * _SQRT2)
    b = (hi - mu) / (sigma * _SQRT2)
    if a >= 0.0:
        p = 0.5 * (math.erfc(a) - math.erfc(b))
    elif b <= 0.0:
        p = 0.5 * (math.erfc(-b) - math.erfc(-a))
    else:
        p = 0.5 * (math.erf(b) - math.erf(a))
    return min(max(p, 0.0), 1.0)


def region_probability(packet: Wavepacket, region: DetectorRegion) -> float:
    """Probability of finding the particle inside the box; in [0, 1]."""
    p = 1.0
    for axis in range(3):
        p *= _axis_probability(packet.center[axis], packet.sigma, *region.bounds[axis])
    return p


def localization_factor(
    p1: Wavepacket, p2: Wavepacket, o1: DetectorRegion, o2: DetectorRegion
) -> float:
    """Joint probability of particle 1 in o1 and particle 2 in o2 (product state)."""
    return region_probability(p1, o1) * region_probability(p2, o2)


def localized_correlation(g: float, a, b) -> float:
    """Spin correlation attenuated by the spatial factor: g * <sigma.a x sigma.b>."""
    if not 0.0 <= g <= 1.0:
        raise ValueError(f"localization factor {g!r} outside [0, 1]")
    return g * spin_correlation(a, b)


def quadrature_check(packet: Wavepacket, region: DetectorRegion, resolution: int = 64) -> float:
    """|closed-form box probability - midpoint quadrature| for a bounded region.

    The quadrature grid clips each axis to center +- 6 sigma, where the density
    mass outside is below 1e-8.
    """
    if resolution < 8:
        raise ValueError("need at least 8 quadrature points per axis")
    if not region.bounded:
        raise ValueError("quadrature requires a bounded region")
    sigma = packet.sigma
    densities = []
    widths = []
    for axis in range(3):
        mu = packet.center[axis]
        lo = max(region.bounds[axis, 0], mu - 6.0 * sigma)
        hi = min(region.bounds[axis, 1], mu + 6.0 * sigma)
        if lo >= hi:
            densities.append(np.zeros(resolution))
            widths.append(0.0)
            continue
        h = (hi - lo) / resolution
        x = lo + (np.arange(resolution) + 0.5) * h
        z = (x - mu) / sigma
        densities.append(np.exp(-0.5 * z * z) / (sigma * math.sqrt(2.0 * math.pi)))
        widths.append(h)
    cube = np.multiply.outer(np.multiply.outer(densities[0], densities[1]), densities[2])
    quad = float(cube.sum()) * widths[0] * widths[1] * widths[2]
    return abs(region_probability(packet, region) - quad)


@dataclass(frozen=True)
class ScanPoint:
    """One row of a separation scan."""

    distance: float
    g: float
    omega: float
    residual: float
    chsh: float


def disentanglement_scan(
    p1: Wavepacket,
    p2: Wavepacket,
    o1: DetectorRegion,
    o2: DetectorRegion,
    shifts: Sequence,
    a,
    b,
) -> list[ScanPoint]:
    """Translate o1 through ``shifts`` and track the joint correlation.

    Per shift: the localization factor g, the localized correlation omega, the
    factorization residual |omega - omega1*omega2| (the single-detector
    marginals vanish for the singlet, so the residual collapses to |omega|),
    and the CHSH value of the attenuated correlation at the canonical settings.
    """
    if not o1.bounded:
        raise ValueError("the shifted region must be bounded for the scan to decay")
    a = as_unit_vector(a)
    b = as_unit_vector(b)
    d_spin = spin_correlation(a, b)
    psi = singlet_state()
    marginal_a = float(expectation(psi, tensor(pauli_dot(a), identity(2))).real)
    marginal_b = float(expectation(psi, tensor(identity(2), pauli_dot(b))).real)
    g2 = region_probability(p2, o2)
    rows = []
    for l in shifts:
        l = np.asarray(l, dtype=float)
        g1 = region_probability(p1, o1.shifted(l))
        g = g1 * g2
        omega = g * d_spin
        omega1 = g1 * marginal_a
        omega2 = g2 * marginal_b
        corr = lambda u, v, g=g: localized_correlation(g, u, v)
        rows.append(
            ScanPoint(
                distance=float(np.linalg.norm(l)),
                g=g,
                omega=omega,
                residual=abs(omega - omega1 * omega2),
                chsh=chsh_value(corr, CANONICAL_CHSH),
            )
        )
    return rows


@dataclass(frozen=True)
class BoundCertificate:
    """Boundedness verdict for a localized model.

    ``product_ok`` records whether g1*g2 <= 1/3, the regime in which the
    construction keeps both variable families within [-1, 1].
    """

    g1: float
    g2: float
    product_ok: bool
    sup_norm_xi: float
    sup_norm_eta: float

    def __post_init__(self) -> None:
        if self.product_ok and (self.sup_norm_xi > 1.0 or self.sup_norm_eta > 1.0):
            raise ValueError("certificate inconsistent: product_ok with a sup-norm above 1")


def bounded_localized_model(a, b, g1: float, g2: float) -> tuple[LhvModel, BoundCertificate]:
    """Three-point model reproducing the localized singlet correlation exactly.

    The variables are xi(v) = -3*g1*g2*v and eta(v) = v on three equally
    weighted points, giving expectation -g1*g2*(a.b). Both families stay
    within [-1, 1] precisely when g1*g2 <= 1/3; the certificate reports the
    sup-norms measured directly over the points and the coordinate directions.
    """
    if not 0.0 <= g1 <= 1.0 or not 0.0 <= g2 <= 1.0:
        raise ValueError("marginal probabilities must lie in [0, 1]")
    scale = 3.0 * (g1 * g2)

    def xi_row(v: np.ndarray) -> np.ndarray:
        return -scale * as_unit_vector(v)

    def eta_row(v: np.ndarray) -> np.ndarray:
        return np.array(as_unit_vector(v))

    model = LhvModel(
        points=(1, 2, 3),
        weights=np.full(3, _THIRD),
        xi_row=xi_row,
        eta_row=eta_row,
        sup_norm_xi=scale,
        sup_norm_eta=1.0,
    )
    axes = np.eye(3)
    probes = [as_unit_vector(a), as_unit_vector(b), axes[0], axes[1], axes[2]]
    sup_xi = max(float(np.max(np.abs(xi_row(v)))) for v in probes)
    sup_eta = max(float(np.max(np.abs(eta_row(v)))) for v in probes)
    certificate = BoundCertificate(
        g1=float(g1),
        g2=float(g2),
        product_ok=g1 * g2 <= _THIRD,
        sup_norm_xi=sup_xi,
        sup_norm_eta=sup_eta,
    )
    return model, certificate
