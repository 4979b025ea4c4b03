import numpy as np
import pytest

from watermix.colorimetry import (
    Lab,
    SRGB8,
    XYZ,
    delta_e_ab,
    load_observer_tables,
    spectrum_to_lab,
    spectrum_to_srgb8,
    spectrum_to_xyz,
    srgb8_to_lab,
    srgb8_to_xyz,
    xyz_to_lab,
    xyz_to_srgb8,
)
from watermix.spectra import N_SAMPLES

FLAT_1 = np.ones(N_SAMPLES)
FLAT_0 = np.zeros(N_SAMPLES)


def test_white_point_near_reference():
    white = spectrum_to_xyz(FLAT_1)
    assert white.y == pytest.approx(100.0, abs=1e-9)
    assert white.x == pytest.approx(95.047, abs=0.5)
    assert white.z == pytest.approx(108.883, abs=0.5)


def test_zero_spectrum_is_black():
    xyz = spectrum_to_xyz(FLAT_0)
    assert (xyz.x, xyz.y, xyz.z) == (0.0, 0.0, 0.0)
    assert xyz_to_srgb8(xyz).as_tuple() == (0, 0, 0)


def test_integration_is_linear():
    half = spectrum_to_xyz(np.full(N_SAMPLES, 0.5))
    white = spectrum_to_xyz(FLAT_1)
    assert half.x == pytest.approx(white.x / 2, rel=1e-12)
    assert half.y == pytest.approx(white.y / 2, rel=1e-12)
    assert half.z == pytest.approx(white.z / 2, rel=1e-12)


def test_flat_one_maps_to_white():
    assert spectrum_to_srgb8(FLAT_1).as_tuple() == (255, 255, 255)


def test_half_spectrum_is_neutral_gray():
    rgb = spectrum_to_srgb8(np.full(N_SAMPLES, 0.5))
    assert abs(rgb.r - rgb.g) <= 2
    assert abs(rgb.g - rgb.b) <= 2


def test_lab_white_point():
    white = load_observer_tables().white_point
    lab = xyz_to_lab(white, white)
    assert lab.l == pytest.approx(100.0, abs=1e-9)
    assert lab.a == pytest.approx(0.0, abs=1e-9)
    assert lab.b == pytest.approx(0.0, abs=1e-9)


def test_lab_black_point():
    white = load_observer_tables().white_point
    lab = xyz_to_lab(XYZ(0.0, 0.0, 0.0), white)
    assert lab.l == pytest.approx(0.0, abs=1e-12)
    assert lab.a == pytest.approx(0.0, abs=1e-12)
    assert lab.b == pytest.approx(0.0, abs=1e-12)


def test_lab_half_white():
    # closed form: 116 * 0.5**(1/3) - 16 = 76.0693
    white = load_observer_tables().white_point
    half = XYZ(white.x / 2, white.y / 2, white.z / 2)
    lab = xyz_to_lab(half, white)
    expected = 116.0 * 0.5 ** (1.0 / 3.0) - 16.0
    assert lab.l == pytest.approx(expected, abs=0.01)
    assert lab.a == pytest.approx(0.0, abs=1e-9)
    assert lab.b == pytest.approx(0.0, abs=1e-9)


def test_delta_e_basics():
    p = Lab(50.0, 0.0, 0.0)
    q = Lab(50.0, 3.0, 4.0)
    assert delta_e_ab(p, p) == 0.0
    assert delta_e_ab(p, q) == pytest.approx(5.0, abs=1e-12)
    assert delta_e_ab(p, q) == delta_e_ab(q, p)


def test_delta_e_metric_properties(rng):
    labs = [
        Lab(float(l), float(a), float(b))
        for l, a, b in zip(
            rng.uniform(0, 100, 300), rng.uniform(-80, 80, 300), rng.uniform(-80, 80, 300)
        )
    ]
    for i in range(0, 300, 3):
        p, q, r = labs[i], labs[i + 1], labs[i + 2]
        dpq, dqr, dpr = delta_e_ab(p, q), delta_e_ab(q, r), delta_e_ab(p, r)
        assert dpq >= 0.0
        assert dpq == delta_e_ab(q, p)
        assert dpr <= dpq + dqr + 1e-9


def test_monotone_gray_axis():
    previous = -1.0
    for level in (0.05, 0.2, 0.4, 0.6, 0.8, 1.0):
        lab = spectrum_to_lab(np.full(N_SAMPLES, level))
        assert lab.l > previous
        previous = lab.l


def test_srgb8_round_trip_is_close():
    for color in (SRGB8(64, 108, 57), SRGB8(0, 0, 0), SRGB8(255, 255, 255), SRGB8(13, 200, 90)):
        back = xyz_to_srgb8(srgb8_to_xyz(color))
        assert back.as_tuple() == color.as_tuple()


def test_srgb8_to_lab_matches_spectral_white():
    lab = srgb8_to_lab(SRGB8(255, 255, 255))
    # matrix white differs from the table white only by quantization-level amounts
    assert lab.l == pytest.approx(100.0, abs=0.1)
    assert abs(lab.a) < 0.2
    assert abs(lab.b) < 0.2
