"""Spectrum -> XYZ -> sRGB / CIELAB conversions under D65, 2-degree observer.

Integration uses the rectangle rule over the package's fixed 41-sample grid;
the observer and illuminant tables ship as a versioned text asset so every
consumer reproduces bit-identical constants.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from .errors import ValidationError
from .spectra import N_SAMPLES, as_spectrum

# Observers start calling two colors "different" around this distance.
DELTA_E_DIFFERENT_COLOR = 5.0

# Linear sRGB from XYZ (D65), IEC 61966-2-1.
XYZ_TO_SRGB = np.array([
    [3.2404542, -1.5371385, -0.4985314],
    [-0.9692660, 1.8760108, 0.0415560],
    [0.0556434, -0.2040259, 1.0572252],
])
SRGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])

_LAB_EPS = (6.0 / 29.0) ** 3
_LAB_KAPPA = (29.0 / 6.0) ** 2 / 3.0  # f slope below the threshold


@dataclass(frozen=True)
class XYZ:
    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class Lab:
    l: float
    a: float
    b: float


@dataclass(frozen=True)
class SRGB8:
    r: int
    g: int
    b: int

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.r, self.g, self.b)


@dataclass(frozen=True)
class ObserverTables:
    cmf_x: np.ndarray
    cmf_y: np.ndarray
    cmf_z: np.ndarray
    illuminant_d65: np.ndarray

    @property
    def white_point(self) -> XYZ:
        return spectrum_to_xyz(np.ones(N_SAMPLES), self)


@lru_cache(maxsize=1)
def load_observer_tables() -> ObserverTables:
    """Load the embedded CMF + D65 table."""
    text = resources.files("watermix").joinpath("data/cie1931_2deg_d65_10nm.csv").read_text()
    rows = [r for r in csv.reader(text.splitlines()) if r and not r[0].startswith("#")]
    if len(rows) != N_SAMPLES:
        raise ValidationError(f"observer table must have {N_SAMPLES} rows, got {len(rows)}")
    data = np.array([[float(v) for v in row] for row in rows])
    return ObserverTables(
        cmf_x=data[:, 1].copy(),
        cmf_y=data[:, 2].copy(),
        cmf_z=data[:, 3].copy(),
        illuminant_d65=data[:, 4].copy(),
    )


def spectrum_to_xyz(r, tables: ObserverTables | None = None) -> XYZ:
    """Integrate a reflectance spectrum to XYZ (illuminant Y normalized to 100)."""
    r = as_spectrum(r)
    t = tables or load_observer_tables()
    k = 100.0 / float(np.dot(t.illuminant_d65, t.cmf_y))
    weighted = t.illuminant_d65 * r
    return XYZ(
        x=k * float(np.dot(weighted, t.cmf_x)),
        y=k * float(np.dot(weighted, t.cmf_y)),
        z=k * float(np.dot(weighted, t.cmf_z)),
    )


def _gamma_encode(c: np.ndarray) -> np.ndarray:
    return np.where(c <= 0.0031308, 12.92 * c, 1.055 * np.power(c, 1.0 / 2.4) - 0.055)


def _gamma_decode(c: np.ndarray) -> np.ndarray:
    return np.where(c <= 0.04045, c / 12.92, np.power((c + 0.055) / 1.055, 2.4))


def xyz_to_srgb8(c: XYZ) -> SRGB8:
    """Encode XYZ to 8-bit sRGB, clamping out-of-gamut values in linear light."""
    linear = XYZ_TO_SRGB @ (c.as_array() / 100.0)
    linear = np.clip(linear, 0.0, 1.0)
    encoded = np.rint(_gamma_encode(linear) * 255.0).astype(int)
    return SRGB8(int(encoded[0]), int(encoded[1]), int(encoded[2]))


def srgb8_to_xyz(c: SRGB8) -> XYZ:
    """Decode 8-bit sRGB back to XYZ (Y scaled to 100)."""
    for ch in c.as_tuple():
        if not 0 <= ch <= 255:
            raise ValidationError(f"sRGB channel out of range: {ch}")
    encoded = np.array(c.as_tuple(), dtype=np.float64) / 255.0
    xyz = SRGB_TO_XYZ @ _gamma_decode(encoded) * 100.0
    return XYZ(float(xyz[0]), float(xyz[1]), float(xyz[2]))


def _lab_f(t: np.ndarray) -> np.ndarray:
    return np.where(t > _LAB_EPS, np.cbrt(t), _LAB_KAPPA * t + 4.0 / 29.0)


def xyz_to_lab(c: XYZ, white: XYZ | None = None) -> Lab:
    """CIE Lab relative to the D65 white point (defaults to the table white)."""
    w = white or load_observer_tables().white_point
    fx, fy, fz = _lab_f(np.array([c.x / w.x, c.y / w.y, c.z / w.z]))
    return Lab(
        l=float(116.0 * fy - 16.0),
        a=float(500.0 * (fx - fy)),
        b=float(200.0 * (fy - fz)),
    )


def delta_e_ab(p: Lab, q: Lab) -> float:
    """Euclidean color difference in CIELAB."""
    return float(np.sqrt((p.l - q.l) ** 2 + (p.a - q.a) ** 2 + (p.b - q.b) ** 2))


def spectrum_to_lab(r, tables: ObserverTables | None = None) -> Lab:
    t = tables or load_observer_tables()
    return xyz_to_lab(spectrum_to_xyz(r, t), t.white_point)


def spectrum_to_srgb8(r, tables: ObserverTables | None = None) -> SRGB8:
    return xyz_to_srgb8(spectrum_to_xyz(r, tables))


def srgb8_to_lab(c: SRGB8, tables: ObserverTables | None = None) -> Lab:
    """Target-color path: 8-bit sRGB -> linear -> XYZ -> Lab.

    Uses the same table-derived white as the spectral path so LUT entries and
    query targets live in one Lab space.
    """
    t = tables or load_observer_tables()
    return xyz_to_lab(srgb8_to_xyz(c), t.white_point)
