import numpy as np
import pytest

from watermix.errors import DomainError, ValidationError
from watermix.spectra import (
    CANONICAL_QUANTITIES_UL,
    GRID_QUANTITIES_UL,
    N_SAMPLES,
    PigmentId,
    PigmentRecord,
    QuantityML,
    as_spectrum,
    expand_primaries,
    interpolate_quantity,
    lerp_spectrum,
)


def make_record(index=1, scale=1.0):
    rec = PigmentRecord(pigment=PigmentId(index))
    for q in CANONICAL_QUANTITIES_UL:
        rec.reflectance[q] = np.full(N_SAMPLES, scale * q / 200.0)
        rec.transmittance[q] = np.full(N_SAMPLES, 1.0 - scale * q / 400.0)
    return rec


def test_as_spectrum_rejects_bad_shapes():
    with pytest.raises(ValidationError):
        as_spectrum(np.zeros(40))
    with pytest.raises(ValidationError):
        as_spectrum(np.full(N_SAMPLES, -0.1))
    with pytest.raises(ValidationError):
        as_spectrum(np.full(N_SAMPLES, np.nan))


def test_lerp_endpoints():
    a = np.linspace(0.1, 0.9, N_SAMPLES)
    b = np.linspace(0.9, 0.1, N_SAMPLES)
    assert np.array_equal(lerp_spectrum(a, b, 0.0), a)
    assert np.array_equal(lerp_spectrum(a, b, 1.0), b)


def test_lerp_midpoint():
    a = np.full(N_SAMPLES, 0.2)
    b = np.full(N_SAMPLES, 0.6)
    assert np.allclose(lerp_spectrum(a, b, 0.5), 0.4)


def test_lerp_is_linear_in_t(rng):
    a = rng.uniform(0, 1, N_SAMPLES)
    b = rng.uniform(0, 1, N_SAMPLES)
    ts = rng.uniform(0, 1, 20)
    for t in ts:
        expected = a + t * (b - a)
        assert np.allclose(lerp_spectrum(a, b, float(t)), expected, atol=1e-12)


def test_lerp_rejects_out_of_range_t():
    a = np.zeros(N_SAMPLES)
    with pytest.raises(DomainError):
        lerp_spectrum(a, a, -0.01)
    with pytest.raises(DomainError):
        lerp_spectrum(a, a, 1.01)


def test_quantity_grid_definitions():
    assert len(CANONICAL_QUANTITIES_UL) == 12
    assert len(GRID_QUANTITIES_UL) == 76
    assert QuantityML.from_ml(0.05).is_canonical()
    assert QuantityML.from_ml(0.118).is_on_grid()
    assert not QuantityML.from_ml(0.011).is_on_grid()
    with pytest.raises(DomainError):
        QuantityML(0)


def test_interpolate_at_knot_is_exact():
    rec = make_record()
    refl, trans = interpolate_quantity(rec, QuantityML.from_ml(0.05))
    assert np.array_equal(refl, rec.reflectance[50])
    assert np.array_equal(trans, rec.transmittance[50])


def test_interpolate_midpoint_between_knots():
    rec = make_record()
    refl, _ = interpolate_quantity(rec, QuantityML.from_ml(0.11))
    expected = 0.5 * (rec.reflectance[100] + rec.reflectance[120])
    assert np.allclose(refl, expected, atol=1e-15)


def test_interpolate_quarter_weight():
    # 0.13 sits a quarter of the way from 0.12 to 0.16
    rec = make_record()
    refl, trans = interpolate_quantity(rec, QuantityML.from_ml(0.13))
    expected_r = rec.reflectance[120] + 0.25 * (rec.reflectance[160] - rec.reflectance[120])
    expected_t = rec.transmittance[120] + 0.25 * (rec.transmittance[160] - rec.transmittance[120])
    assert np.allclose(refl, expected_r, atol=1e-15)
    assert np.allclose(trans, expected_t, atol=1e-15)


def test_interpolate_refuses_off_grid_and_out_of_range():
    rec = make_record()
    with pytest.raises(DomainError):
        interpolate_quantity(rec, QuantityML.from_ml(0.008))
    with pytest.raises(DomainError):
        interpolate_quantity(rec, QuantityML.from_ml(0.162))
    with pytest.raises(DomainError):
        interpolate_quantity(rec, QuantityML(11))  # 0.011 mL, off the 0.002 grid


def test_expand_primaries_counts():
    records = [make_record(i) for i in range(1, 14)]
    entries = expand_primaries(records)
    assert len(entries) == 988
    keys = {(e.pigment.index, e.quantity.ul) for e in entries}
    assert len(keys) == 988

    single = expand_primaries([make_record(1)])
    assert len(single) == 76


def test_expand_primaries_rejects_incomplete_record():
    rec = make_record(3)
    del rec.reflectance[120]
    with pytest.raises(ValidationError, match=r"pigment 3.*0\.12.*Rw"):
        expand_primaries([rec])


def test_pigment_id_names():
    assert PigmentId(1).name == "cadmium red"
    assert PigmentId(5).name == "cadmium yellow"
    assert PigmentId(8).name == "cerulean blue"
    assert PigmentId(13).symbol == "ρ13"
    with pytest.raises(ValidationError):
        PigmentId(14)
