"""Synthetic pigment corpus generated from the layer model.

Stands in for spectrometer measurements: each of the 13 pigments gets
parameterized absorption bands (center, width, strength) plus a scattering
level, and every corpus spectrum is derived from those coefficients.  A
quantity q maps to layer thickness X = q / 0.01 mL, so 0.01 mL is one unit
layer.  Everything is deterministic for a given seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import TYPE_M_QUANTITY_PAIRS_UL, Corpus, MixtureKey
from .km import KMCoefficients, composite_km, km_transmittance, mix_km
from .spectra import (
    CANONICAL_QUANTITIES_UL,
    N_PIGMENTS,
    PigmentId,
    PigmentRecord,
    WAVELENGTHS_NM,
    as_spectrum,
)

UL_PER_THICKNESS_UNIT = 10  # 0.01 mL of pigment forms one unit of thickness
BLACK_BACKING_REFLECTANCE = 0.001  # stand-in for black paper; the inversion divides by it


@dataclass(frozen=True)
class AbsorptionBand:
    center_nm: float
    width_nm: float
    strength: float


@dataclass(frozen=True)
class SyntheticPigmentSpec:
    """Per-wavelength (K, S) for one synthetic pigment."""

    pigment: PigmentId
    k: np.ndarray
    s: np.ndarray

    def coefficients(self) -> KMCoefficients:
        return KMCoefficients(k=self.k, s=self.s)


def _band_curve(bands: list[AbsorptionBand]) -> np.ndarray:
    lam = WAVELENGTHS_NM.astype(np.float64)
    k = np.zeros_like(lam)
    for band in bands:
        k += band.strength * np.exp(-(((lam - band.center_nm) / band.width_nm) ** 2))
    return k


# (base_k, bands, scattering): hand-tuned to look like the named pigments.
_PIGMENT_PARAMS = {
    1: (0.05, [AbsorptionBand(500, 80, 3.2), AbsorptionBand(390, 60, 1.8)], 0.80),   # cadmium red
    2: (0.08, [AbsorptionBand(530, 75, 3.8), AbsorptionBand(410, 50, 1.2)], 0.50),   # alizarin crimson
    3: (0.35, [AbsorptionBand(470, 110, 2.4)], 0.45),                                 # burnt sienna
    4: (0.04, [AbsorptionBand(420, 55, 3.6)], 1.20),                                  # lemon yellow
    5: (0.05, [AbsorptionBand(450, 65, 3.8)], 1.25),                                  # cadmium yellow
    6: (0.28, [AbsorptionBand(440, 90, 2.2)], 0.50),                                  # raw sienna
    7: (0.12, [AbsorptionBand(650, 90, 2.4), AbsorptionBand(420, 70, 2.6)], 0.45),    # sap green
    8: (0.08, [AbsorptionBand(620, 110, 3.0)], 0.55),                                 # cerulean blue
    9: (0.10, [AbsorptionBand(590, 95, 3.4)], 0.80),                                  # cobalt blue
    10: (0.09, [AbsorptionBand(575, 85, 3.9)], 0.60),                                 # ultramarine
    11: (0.45, [AbsorptionBand(640, 140, 4.2)], 0.30),                                # prussian blue
    12: (3.20, [AbsorptionBand(520, 300, 0.4)], 0.25),                                # ivory black
    13: (0.04, [], 3.50),                                                             # chinese white
}


def default_pigment_specs(seed: int) -> list[SyntheticPigmentSpec]:
    """The 13 synthetic pigments, band strengths jittered a few percent by seed."""
    rng = np.random.default_rng(seed)
    specs = []
    for index in range(1, N_PIGMENTS + 1):
        base_k, bands, scatter = _PIGMENT_PARAMS[index]
        jittered = [
            AbsorptionBand(
                center_nm=b.center_nm + rng.normal(0.0, 5.0),
                width_nm=b.width_nm * (1.0 + rng.normal(0.0, 0.03)),
                strength=b.strength * (1.0 + rng.normal(0.0, 0.05)),
            )
            for b in bands
        ]
        k = base_k * (1.0 + rng.normal(0.0, 0.05)) + _band_curve(jittered)
        s = np.full(WAVELENGTHS_NM.shape, scatter * (1.0 + rng.normal(0.0, 0.05)))
        specs.append(SyntheticPigmentSpec(pigment=PigmentId(index), k=k, s=s))
    return specs


def make_substrate() -> np.ndarray:
    """White paper stand-in: flat 0.95 with a slight short-wavelength dip."""
    lam = WAVELENGTHS_NM.astype(np.float64)
    return 0.95 - 0.03 * np.exp(-(((lam - 390.0) / 40.0) ** 2))


def _thickness(q_ul: int) -> float:
    return q_ul / UL_PER_THICKNESS_UNIT


def generate_synthetic(
    specs: list[SyntheticPigmentSpec], substrate, seed: int
) -> Corpus:
    """Full corpus: primary records, mixture ground truths, black-backed curves.

    Incrementation targets are exact by construction: the stored reflectance
    at quantity q is the composite at thickness q / 0.01, so a (q_a, q_b) pair
    reproduces the stored spectrum at q_a + q_b.
    """
    if len(specs) != N_PIGMENTS:
        raise ValueError(f"expected {N_PIGMENTS} pigment specs, got {len(specs)}")
    substrate = as_spectrum(substrate)
    black = np.full(substrate.shape, BLACK_BACKING_REFLECTANCE)

    records = []
    black_backed = {}
    by_index = {}
    for spec in sorted(specs, key=lambda s: s.pigment.index):
        coeffs = spec.coefficients()
        rec = PigmentRecord(pigment=spec.pigment)
        for q_ul in CANONICAL_QUANTITIES_UL:
            x = _thickness(q_ul)
            rec.reflectance[q_ul] = composite_km(coeffs, substrate, x)
            rec.transmittance[q_ul] = km_transmittance(coeffs, x)
        records.append(rec)
        black_backed[spec.pigment.index] = composite_km(coeffs, black, _thickness(10))
        by_index[spec.pigment.index] = coeffs

    mixtures: dict[MixtureKey, np.ndarray] = {}
    for ia in range(1, N_PIGMENTS + 1):
        for ib in range(ia + 1, N_PIGMENTS + 1):
            for qa_ul, qb_ul in TYPE_M_QUANTITY_PAIRS_UL:
                total = qa_ul + qb_ul
                mixed = mix_km(
                    [by_index[ia], by_index[ib]],
                    [qa_ul / total, qb_ul / total],
                )
                mixtures[(ia, ib, qa_ul, qb_ul)] = composite_km(
                    mixed, substrate, _thickness(total)
                )

    manifest = {
        "schema_version": 1,
        "generator": "synthetic",
        "seed": seed,
        "black_backing_reflectance": BLACK_BACKING_REFLECTANCE,
        "ul_per_thickness_unit": UL_PER_THICKNESS_UNIT,
        "counts": {"pigments": N_PIGMENTS, "mixtures": len(mixtures)},
    }
    return Corpus(
        records=records,
        substrate=substrate,
        mixtures=mixtures,
        black_backed=black_backed,
        manifest=manifest,
    )


def synthesize_corpus(seed: int) -> Corpus:
    """Default specs + substrate in one call; what the CLI synth command runs."""
    return generate_synthetic(default_pigment_specs(seed), make_substrate(), seed)
