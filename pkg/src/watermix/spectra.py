"""Spectral curves, pigment quantities, and quantity interpolation.

Every reflectance/transmittance curve in the package is a 41-sample spectrum
over 380..780 nm at a 10 nm pitch.  Quantities are handled on an exact
microliter grid so that interpolation knots and file round trips never hit
float equality problems: 0.002 mL == 2 uL.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ValidationError

N_SAMPLES = 41
WAVELENGTHS_NM = np.arange(380, 781, 10)

# The 12 quantities each primary pigment is sampled at, in microliters.
CANONICAL_QUANTITIES_UL = (10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 120, 160)
# Interpolation grid: 0.01..0.16 mL at 0.002 mL steps -> 76 points per pigment.
GRID_STEP_UL = 2
GRID_MIN_UL = 10
GRID_MAX_UL = 160
GRID_QUANTITIES_UL = tuple(range(GRID_MIN_UL, GRID_MAX_UL + 1, GRID_STEP_UL))

PIGMENT_NAMES = (
    "cadmium red",
    "alizarin crimson",
    "burnt sienna",
    "lemon yellow",
    "cadmium yellow",
    "raw sienna",
    "sap green",
    "cerulean blue",
    "cobalt blue",
    "ultramarine",
    "prussian blue",
    "ivory black",
    "chinese white",
)
N_PIGMENTS = len(PIGMENT_NAMES)


def ml_to_ul(value_ml: float) -> int:
    """Convert milliliters to the nearest integer microliter."""
    return int(round(value_ml * 1000.0))


def ul_to_ml(value_ul: int) -> float:
    return value_ul / 1000.0


def as_spectrum(values) -> np.ndarray:
    """Validate and return a 41-sample spectrum as a float64 array.

    Values must be finite and non-negative.  Values above 1 are allowed (they
    occur transiently in raw data before clamping) but never negative ones.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape != (N_SAMPLES,):
        raise ValidationError(f"spectrum must have {N_SAMPLES} samples, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("spectrum contains non-finite values")
    if np.any(arr < 0.0):
        raise ValidationError("spectrum contains negative values")
    return arr


@dataclass(frozen=True)
class QuantityML:
    """A pigment quantity in milliliters, backed by an exact microliter count."""

    ul: int

    def __post_init__(self):
        if self.ul <= 0:
            raise DomainError(f"quantity must be positive, got {self.ul} uL")

    @classmethod
    def from_ml(cls, value_ml: float) -> "QuantityML":
        ul = ml_to_ul(value_ml)
        if abs(value_ml * 1000.0 - ul) > 1e-6:
            raise DomainError(f"quantity {value_ml} mL is not on the 0.001 mL grid")
        return cls(ul)

    @property
    def ml(self) -> float:
        return ul_to_ml(self.ul)

    def is_canonical(self) -> bool:
        return self.ul in CANONICAL_QUANTITIES_UL

    def is_on_grid(self) -> bool:
        return (
            GRID_MIN_UL <= self.ul <= GRID_MAX_UL
            and (self.ul - GRID_MIN_UL) % GRID_STEP_UL == 0
        )


@dataclass(frozen=True)
class PigmentId:
    """One of the 13 primary pigments."""

    index: int

    def __post_init__(self):
        if not 1 <= self.index <= N_PIGMENTS:
            raise ValidationError(f"pigment index must be 1..{N_PIGMENTS}, got {self.index}")

    @property
    def name(self) -> str:
        return PIGMENT_NAMES[self.index - 1]

    @property
    def symbol(self) -> str:
        return f"ρ{self.index}"


@dataclass
class PigmentRecord:
    """A primary pigment's spectra at each of the 12 canonical quantities.

    ``reflectance`` holds the curve measured on white paper, ``transmittance``
    the carrier-corrected transmission curve, both keyed by microliters.
    Per-wavelength monotonicity across quantities is not assumed.
    """

    pigment: PigmentId
    reflectance: dict[int, np.ndarray] = field(default_factory=dict)
    transmittance: dict[int, np.ndarray] = field(default_factory=dict)

    def missing_entries(self):
        missing = []
        for q in CANONICAL_QUANTITIES_UL:
            if q not in self.reflectance:
                missing.append((self.pigment.index, ul_to_ml(q), "Rw"))
            if q not in self.transmittance:
                missing.append((self.pigment.index, ul_to_ml(q), "T"))
        return missing

    def validate(self):
        missing = self.missing_entries()
        if missing:
            listing = ", ".join(f"(pigment {p}, {q} mL, {role})" for p, q, role in missing)
            raise ValidationError(f"incomplete pigment record: missing {listing}")


@dataclass(frozen=True)
class PrimaryEntry:
    """One (pigment, quantity) point on the expanded 0.002 mL grid."""

    pigment: PigmentId
    quantity: QuantityML
    reflectance: np.ndarray
    transmittance: np.ndarray


def lerp_spectrum(a: np.ndarray, b: np.ndarray, t: float) -> np.ndarray:
    """Linear interpolation between two spectra at parameter t in [0, 1]."""
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"interpolation parameter must be in [0, 1], got {t}")
    a = as_spectrum(a)
    b = as_spectrum(b)
    return (1.0 - t) * a + t * b


def _bracket(q_ul: int) -> tuple[int, int, float]:
    """Return the canonical knots around q_ul and the blend weight."""
    qs = CANONICAL_QUANTITIES_UL
    if q_ul in qs:
        return q_ul, q_ul, 0.0
    for lo, hi in zip(qs, qs[1:]):
        if lo < q_ul < hi:
            return lo, hi, (q_ul - lo) / (hi - lo)
    raise DomainError(f"quantity {ul_to_ml(q_ul)} mL outside measured range")


def interpolate_quantity(rec: PigmentRecord, q: QuantityML) -> tuple[np.ndarray, np.ndarray]:
    """Spectra of a pigment at any 0.002 mL grid quantity.

    Piecewise-linear in quantity between the two bracketing canonical
    quantities, applied independently per wavelength to reflectance and
    transmittance.  At canonical quantities the stored spectra are returned
    exactly.
    """
    if not q.is_on_grid():
        raise DomainError(
            f"quantity {q.ml} mL is not a 0.002 mL multiple within [0.01, 0.16]"
        )
    rec.validate()
    lo, hi, t = _bracket(q.ul)
    if t == 0.0:
        return rec.reflectance[lo].copy(), rec.transmittance[lo].copy()
    refl = lerp_spectrum(rec.reflectance[lo], rec.reflectance[hi], t)
    trans = lerp_spectrum(rec.transmittance[lo], rec.transmittance[hi], t)
    return refl, trans


def expand_primaries(records: list[PigmentRecord]) -> list[PrimaryEntry]:
    """Expand pigment records onto the full 0.002 mL grid.

    13 complete records yield 13 x 76 = 988 entries, ordered by
    (pigment index, quantity).
    """
    entries = []
    for rec in records:
        rec.validate()
        for q_ul in GRID_QUANTITIES_UL:
            q = QuantityML(q_ul)
            refl, trans = interpolate_quantity(rec, q)
            entries.append(
                PrimaryEntry(
                    pigment=rec.pigment,
                    quantity=q,
                    reflectance=refl,
                    transmittance=trans,
                )
            )
    return entries
