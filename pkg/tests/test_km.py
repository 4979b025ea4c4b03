import numpy as np
import pytest

from watermix.errors import DomainError, InversionError
from watermix.km import (
    KMCoefficients,
    composite_km,
    invert_km,
    km_transmittance,
    mix_km,
    opaque_reflectance,
)

WHITE = 0.95
BLACK = 0.001


def random_coeffs(rng, n=41):
    return KMCoefficients(k=rng.uniform(0.01, 5.0, n), s=rng.uniform(0.05, 5.0, n))


def test_round_trip_spectral(rng):
    white = np.full(41, WHITE)
    black = np.full(41, BLACK)
    for _ in range(200):
        c = random_coeffs(rng)
        r_w = composite_km(c, white, 1.0)
        r_b = composite_km(c, black, 1.0)
        rec = invert_km(r_w, r_b, substrate_white=WHITE, substrate_black=BLACK)
        assert np.max(np.abs(rec.k - c.k) / c.k) < 1e-6
        assert np.max(np.abs(rec.s - c.s) / c.s) < 1e-6


def test_round_trip_rgb_mode(rng):
    white = np.full(3, WHITE)
    black = np.full(3, BLACK)
    for _ in range(50):
        c = random_coeffs(rng, n=3)
        rec = invert_km(
            composite_km(c, white, 1.0), composite_km(c, black, 1.0),
            substrate_white=WHITE, substrate_black=BLACK,
        )
        assert np.max(np.abs(rec.k - c.k) / c.k) < 1e-6


def test_ideal_substrate_inversion_matches_closed_form(rng):
    # against the published closed form at backings (1, 0)
    c = random_coeffs(rng)
    r_w = composite_km(c, np.ones(41), 1.0)
    r_b = composite_km(c, np.full(41, 1e-12), 1.0)
    a_closed = 0.5 * (r_w + (r_b - r_w + 1.0) / r_b)
    rec = invert_km(r_w, r_b)
    a_solved = 1.0 + rec.k / rec.s
    assert np.allclose(a_solved, a_closed, rtol=1e-9)


def test_invert_rejects_equal_measurements():
    v = np.full(41, 0.5)
    with pytest.raises(InversionError):
        invert_km(v, v)


def test_invert_rejects_out_of_range_channels():
    good = np.full(41, 0.5)
    with pytest.raises(InversionError):
        invert_km(np.full(41, 1.0), good)
    with pytest.raises(InversionError):
        invert_km(good, np.full(41, 0.0))


def test_invert_error_names_channel():
    r_w = np.array([0.5, 0.5, 0.5])
    r_b = np.array([0.3, 0.6, 0.3])  # channel 1 violates r_w > r_b
    with pytest.raises(InversionError, match="channel 1"):
        invert_km(r_w, r_b)


def test_mix_degenerate_proportions():
    a = KMCoefficients(k=np.array([1.0, 2.0, 3.0]), s=np.array([1.0, 1.0, 1.0]))
    b = KMCoefficients(k=np.array([5.0, 6.0, 7.0]), s=np.array([2.0, 2.0, 2.0]))
    out = mix_km([a, b], [1.0, 0.0])
    assert np.array_equal(out.k, a.k)
    assert np.array_equal(out.s, a.s)


def test_mix_arithmetic_mean_example():
    a = KMCoefficients(k=np.array([1.0, 2.0, 2.0]), s=np.array([1.0, 1.0, 1.0]))
    b = KMCoefficients(k=np.array([3.0, 4.0, 4.0]), s=np.array([3.0, 3.0, 3.0]))
    out = mix_km([a, b], [0.5, 0.5])
    assert np.allclose(out.k, [2.0, 3.0, 3.0])
    assert np.allclose(out.s, [2.0, 2.0, 2.0])


def test_mix_is_exactly_symmetric(rng):
    a, b = random_coeffs(rng), random_coeffs(rng)
    for c in (0.1, 0.25, 0.5, 0.9):
        ab = mix_km([a, b], [c, 1.0 - c])
        ba = mix_km([b, a], [1.0 - c, c])
        assert np.array_equal(ab.k, ba.k)
        assert np.array_equal(ab.s, ba.s)


def test_mix_validates_proportions():
    a = KMCoefficients(k=np.ones(3), s=np.ones(3))
    with pytest.raises(DomainError):
        mix_km([a, a], [0.6, 0.6])
    with pytest.raises(DomainError):
        mix_km([a, a], [0.5])
    with pytest.raises(DomainError):
        mix_km([a, a], [-0.5, 1.5])


def test_composite_zero_thickness_returns_substrate(rng):
    c = random_coeffs(rng)
    substrate = rng.uniform(0.0, 1.0, 41)
    assert np.array_equal(composite_km(c, substrate, 0.0), substrate)


def test_composite_large_thickness_reaches_opaque_limit(rng):
    c = random_coeffs(rng)
    r_inf = opaque_reflectance(c)
    for substrate in (np.zeros(41), np.ones(41), rng.uniform(0, 1, 41)):
        r = composite_km(c, substrate, 1e6)
        assert np.allclose(r, r_inf, atol=1e-9)


def test_composite_continuous_at_zero(rng):
    c = random_coeffs(rng)
    substrate = rng.uniform(0.0, 1.0, 41)
    r = composite_km(c, substrate, 1e-9)
    assert np.max(np.abs(r - substrate)) < 1e-6


def test_composite_output_in_unit_interval(rng):
    for _ in range(50):
        c = random_coeffs(rng)
        substrate = rng.uniform(0.0, 1.0, 41)
        for x in (0.1, 1.0, 4.0, 50.0):
            r = composite_km(c, substrate, x)
            assert np.all(r >= 0.0) and np.all(r <= 1.0)


def test_composite_darkens_with_thickness_for_absorbing_layer():
    # qualitative sweep: an absorbing layer darkens as it thickens
    # (moderate K/S so the opaque limit is not saturated within the sweep)
    c = KMCoefficients(k=np.full(3, 0.3), s=np.full(3, 0.6))
    substrate = np.full(3, 0.95)
    previous = None
    for x in range(1, 11):
        r = composite_km(c, substrate, float(x))
        if previous is not None:
            assert np.all(r < previous)
        previous = r


def test_composite_handles_zero_absorption():
    c = KMCoefficients(k=np.zeros(3), s=np.full(3, 0.5))
    substrate = np.full(3, 0.5)
    r = composite_km(c, substrate, 2.0)
    # zero-absorption closed form: (Rg + SX(1-Rg)) / (1 + SX(1-Rg))
    sx = 0.5 * 2.0
    expected = (0.5 + sx * 0.5) / (1.0 + sx * 0.5)
    assert np.allclose(r, expected, rtol=1e-12)


def test_transmittance_vacuous_layer_limit():
    c = KMCoefficients(k=np.full(3, 1e-12), s=np.full(3, 1e-9))
    t = km_transmittance(c, 1.0)
    assert np.all(t > 0.999999)
    assert np.all(t <= 1.0)


def test_transmittance_decreases_with_thickness(rng):
    c = random_coeffs(rng)
    t1 = km_transmittance(c, 1.0)
    t2 = km_transmittance(c, 2.0)
    assert np.all(t2 < t1)
    assert np.all(t1 > 0.0) and np.all(t1 <= 1.0)


def test_transmittance_requires_positive_thickness(rng):
    with pytest.raises(DomainError):
        km_transmittance(random_coeffs(rng), 0.0)


def test_coefficients_validate_signs():
    with pytest.raises(InversionError):
        KMCoefficients(k=np.ones(3), s=np.array([1.0, 0.0, 1.0]))
    with pytest.raises(InversionError):
        KMCoefficients(k=np.array([1.0, -0.1, 1.0]), s=np.ones(3))
