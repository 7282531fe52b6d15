import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from localreal import sampling
from localreal.lhv import model_correlation
from localreal.spatial import (
    DetectorRegion,
    Wavepacket,
    bounded_localized_model,
    disentanglement_scan,
    localization_factor,
    localized_correlation,
    quadrature_check,
    region_probability,
)
from util import unit_pair

X = np.array([1.0, 0.0, 0.0])
Z = np.array([0.0, 0.0, 1.0])

ORIGIN = Wavepacket([0.0, 0.0, 0.0], 1.0)
FULL = DetectorRegion.full_space()
UNIT_BOX = DetectorRegion.box([-1.0, -1.0, -1.0], [1.0, 1.0, 1.0])


def half_space_x() -> DetectorRegion:
    return DetectorRegion(np.array([[0.0, math.inf], [-math.inf, math.inf], [-math.inf, math.inf]]))


def test_full_space_probability_is_one():
    assert localization_factor(ORIGIN, ORIGIN, FULL, FULL) == pytest.approx(1.0, abs=1e-10)


def test_half_space_probability_is_half():
    assert localization_factor(ORIGIN, ORIGIN, half_space_x(), FULL) == pytest.approx(0.5, abs=1e-10)


def test_far_region_probability_is_negligible():
    far = UNIT_BOX.shifted([10.0, 0.0, 0.0])
    assert localization_factor(ORIGIN, ORIGIN, far, FULL) < 1e-6


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31))
def test_probability_in_unit_interval(seed):
    rng = np.random.default_rng(seed)
    packet = Wavepacket(rng.uniform(-3, 3, size=3), float(rng.uniform(0.2, 3.0)))
    lo = rng.uniform(-5, 5, size=3)
    hi = lo + rng.uniform(0.1, 6.0, size=3)
    g = localization_factor(packet, packet, DetectorRegion.box(lo, hi), FULL)
    assert 0.0 <= g <= 1.0


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31))
def test_probability_monotone_under_enlargement(seed):
    rng = np.random.default_rng(seed)
    packet = Wavepacket(rng.uniform(-2, 2, size=3), float(rng.uniform(0.2, 2.0)))
    lo = rng.uniform(-4, 4, size=3)
    hi = lo + rng.uniform(0.1, 3.0, size=3)
    pad = rng.uniform(0.0, 2.0, size=3)
    inner = DetectorRegion.box(lo, hi)
    outer = DetectorRegion.box(lo - pad, hi + pad)
    assert region_probability(packet, outer) >= region_probability(packet, inner) - 1e-15


def test_region_validation():
    with pytest.raises(ValueError):
        DetectorRegion(np.array([[1.0, 1.0], [0.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        Wavepacket([0.0, 0.0, 0.0], 0.0)


def test_localized_correlation_limits():
    assert localized_correlation(1.0, Z, Z) == pytest.approx(-1.0, abs=1e-12)
    assert localized_correlation(0.0, X, Z) == 0.0
    assert localized_correlation(0.5, Z, -Z) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(ValueError):
        localized_correlation(1.5, Z, Z)


def test_quadrature_check_full_window():
    big = DetectorRegion.box([-6.0, -6.0, -6.0], [6.0, 6.0, 6.0])
    assert quadrature_check(ORIGIN, big) <= 1e-4
    assert region_probability(ORIGIN, big) == pytest.approx(1.0, abs=1e-6)


def test_quadrature_check_half_window():
    half = DetectorRegion.box([0.0, -6.0, -6.0], [6.0, 6.0, 6.0])
    assert quadrature_check(ORIGIN, half) <= 1e-4
    # the 6-sigma truncation clips ~3e-9 of mass relative to the true half-space
    assert region_probability(ORIGIN, half) == pytest.approx(0.5, abs=1e-8)


def test_quadrature_check_shrinking_boxes():
    for width in (2.0, 1.0, 0.5, 0.1):
        box = DetectorRegion.box([-width] * 3, [width] * 3)
        assert quadrature_check(ORIGIN, box) <= 1e-4


def test_quadrature_check_random_boxes():
    rng = sampling.generator(83, 0)
    for _ in range(25):
        packet = Wavepacket(rng.uniform(-1, 1, size=3), float(rng.uniform(0.3, 2.0)))
        lo = packet.center + rng.uniform(-2, 1, size=3) * packet.sigma
        hi = lo + rng.uniform(0.2, 4.0, size=3) * packet.sigma
        assert quadrature_check(packet, DetectorRegion.box(lo, hi)) <= 1e-4


def test_quadrature_check_validation():
    with pytest.raises(ValueError):
        quadrature_check(ORIGIN, UNIT_BOX, resolution=4)
    with pytest.raises(ValueError):
        quadrature_check(ORIGIN, FULL)


def test_scan_baseline_and_decay():
    shifts = [np.array([d, 0.0, 0.0]) for d in np.linspace(0.0, 12.0, 25)]
    points = disentanglement_scan(ORIGIN, ORIGIN, UNIT_BOX, UNIT_BOX, shifts, Z, Z)
    assert points[0].distance == 0.0
    assert points[0].g == pytest.approx(localization_factor(ORIGIN, ORIGIN, UNIT_BOX, UNIT_BOX), abs=1e-15)
    assert points[-1].g < 1e-6
    assert points[-1].residual < 1e-6


def test_scan_residual_identity():
    rng = sampling.generator(91, 0)
    a, b = unit_pair(rng)
    shifts = [np.array([d, 0.0, 0.0]) for d in np.linspace(0.0, 8.0, 17)]
    points = disentanglement_scan(ORIGIN, ORIGIN, UNIT_BOX, UNIT_BOX, shifts, a, b)
    inner = abs(float(np.dot(a, b)))
    for pt in points:
        assert abs(pt.residual - pt.g * inner) <= 1e-12


def test_scan_monotone_beyond_overlap():
    shifts = [np.array([d, 0.0, 0.0]) for d in np.linspace(0.0, 10.0, 21)]
    points = disentanglement_scan(ORIGIN, ORIGIN, UNIT_BOX, UNIT_BOX, shifts, Z, Z)
    tail = [pt.g for pt in points if pt.distance >= 2.0]
    assert all(tail[i + 1] <= tail[i] for i in range(len(tail) - 1))


def test_scan_requires_bounded_region():
    with pytest.raises(ValueError):
        disentanglement_scan(ORIGIN, ORIGIN, FULL, UNIT_BOX, [np.zeros(3)], Z, Z)


def test_scan_chsh_column_tracks_attenuation():
    shifts = [np.array([d, 0.0, 0.0]) for d in (0.0, 1.0, 2.0)]
    points = disentanglement_scan(ORIGIN, ORIGIN, UNIT_BOX, UNIT_BOX, shifts, Z, Z)
    for pt in points:
        assert pt.chsh == pytest.approx(pt.g * 2.0 * math.sqrt(2.0), abs=1e-12)


def test_bounded_model_boundary_case():
    model, cert = bounded_localized_model(Z, Z, 0.5, 2.0 / 3.0)
    assert cert.product_ok
    assert cert.sup_norm_xi == 1.0
    assert cert.sup_norm_eta == 1.0
    value = model_correlation(model, Z, Z)
    assert value == pytest.approx(-1.0 / 3.0, abs=1e-15)


def test_bounded_model_zero_probability():
    model, cert = bounded_localized_model(Z, X, 0.0, 0.9)
    assert cert.product_ok
    assert cert.sup_norm_xi == 0.0
    assert model_correlation(model, Z, X) == 0.0


def test_bounded_model_outside_regime_is_reported():
    model, cert = bounded_localized_model(Z, Z, 1.0, 0.5)
    assert not cert.product_ok
    assert cert.sup_norm_xi == pytest.approx(1.5, abs=1e-15)
    # expectation stays exact even though the variables exceed the unit bound
    assert model_correlation(model, Z, Z) == pytest.approx(
        localized_correlation(0.5, Z, Z), abs=1e-14
    )


def test_bounded_model_exactness_sweep():
    rng = sampling.generator(97, 0)
    for _ in range(300):
        a, b = unit_pair(rng)
        g1 = float(rng.uniform(0.0, 1.0))
        g2 = float(rng.uniform(0.0, 1.0))
        model, cert = bounded_localized_model(a, b, g1, g2)
        assert abs(model_correlation(model, a, b) - localized_correlation(g1 * g2, a, b)) <= 1e-14
        if cert.product_ok:
            assert cert.sup_norm_xi <= 1.0
            assert cert.sup_norm_eta <= 1.0


def test_bounded_model_validation():
    with pytest.raises(ValueError):
        bounded_localized_model(Z, Z, -0.1, 0.5)
