"""Two-constant Kubelka-Munk layer model.

Inversion of white/black-backed measurements to absorption and scattering,
proportion-weighted mixing of coefficients, and compositing a layer of given
thickness over a substrate.  All operations are channel-wise and accept either
3-channel (RGB comparison mode) or 41-channel (spectral mode) vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InversionError

CHANNEL_COUNTS = (3, 41)
# coth(z) is 1.0 to double precision long before this; caps sinh/cosh overflow.
_MAX_OPTICAL_DEPTH = 700.0


def as_channels(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] not in CHANNEL_COUNTS:
        raise DomainError(f"channel vector must have 3 or 41 entries, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("channel vector contains non-finite values")
    return arr


@dataclass(frozen=True)
class KMCoefficients:
    """Absorption K and scattering S per channel, per unit thickness."""

    k: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        k = as_channels(self.k)
        s = as_channels(self.s)
        if k.shape != s.shape:
            raise DomainError("K and S must have the same channel count")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "s", s)
        if np.any(s <= 0.0):
            raise InversionError("scattering must be positive", channel=int(np.argmax(s <= 0.0)))
        if np.any(k < 0.0):
            raise InversionError("absorption must be non-negative", channel=int(np.argmax(k < 0.0)))

    @property
    def n_channels(self) -> int:
        return self.k.shape[0]


def _arccoth(z: np.ndarray) -> np.ndarray:
    return 0.5 * np.log((z + 1.0) / (z - 1.0))


def _coth(z: np.ndarray) -> np.ndarray:
    return 1.0 / np.tanh(z)


def invert_km(
    r_white,
    r_black,
    substrate_white: float = 1.0,
    substrate_black: float = 0.0,
) -> KMCoefficients:
    """Recover (K, S) of a unit-thickness layer from two backed measurements.

    ``r_white``/``r_black`` are the layer's composite reflectances over a
    bright and a dark backing.  With the default ideal backings (1 and 0) this
    is algebraically the classic closed-form inversion
        a = (r_w + (r_b - r_w + 1) / r_b) / 2,  b = sqrt(a^2 - 1),
        S = arccoth((b^2 - (a - r_w)(a - 1)) / (b (1 - r_w))) / b,  K = S (a - 1);
    for arbitrary backing reflectances the same two measurements pin down
    (a, b*coth(bS)) through a per-channel 2x2 linear solve, which reduces to
    the closed form at backings (1, 0) and makes the inversion an exact
    inverse of ``composite_km`` over any pair of distinct backings.
    """
    rw = as_channels(r_white)
    rb = as_channels(r_black)
    if rw.shape != rb.shape:
        raise DomainError("white- and black-backed vectors must have equal channel counts")
    for name, arr in (("white-backed", rw), ("black-backed", rb)):
        bad = (arr <= 0.0) | (arr >= 1.0)
        if np.any(bad):
            raise InversionError(
                f"{name} reflectance must lie strictly in (0, 1)", channel=int(np.argmax(bad))
            )
    if np.any(rw <= rb):
        raise InversionError(
            "white-backed reflectance must exceed black-backed reflectance",
            channel=int(np.argmax(rw <= rb)),
        )

    # Each measurement R over backing g satisfies a*(R+g) + c*(R-g) = 1 + R*g
    # with c = b*coth(b*S*X); solve the pair for (a, c) per channel.
    gw, gb = float(substrate_white), float(substrate_black)
    a11, a12, b1 = rw + gw, rw - gw, 1.0 + rw * gw
    a21, a22, b2 = rb + gb, rb - gb, 1.0 + rb * gb
    det = a11 * a22 - a12 * a21
    if np.any(det == 0.0):
        raise InversionError("degenerate measurement pair", channel=int(np.argmax(det == 0.0)))
    a = (b1 * a22 - a12 * b2) / det
    c = (a11 * b2 - b1 * a21) / det

    if np.any(a < 1.0):
        raise InversionError(
            "computed a < 1 (opaque or unphysical layer)", channel=int(np.argmax(a < 1.0))
        )
    b = np.sqrt(a * a - 1.0)
    if np.any(b == 0.0):
        raise InversionError("b = 0, layer has no contrast", channel=int(np.argmax(b == 0.0)))
    z = c / b
    if np.any(np.abs(z) <= 1.0):
        raise InversionError(
            "arccoth argument inside [-1, 1]", channel=int(np.argmax(np.abs(z) <= 1.0))
        )
    s = _arccoth(z) / b
    if np.any(s <= 0.0) or not np.all(np.isfinite(s)):
        bad = ~np.isfinite(s) | (s <= 0.0)
        raise InversionError("non-positive scattering", channel=int(np.argmax(bad)))
    return KMCoefficients(k=s * (a - 1.0), s=s)


def mix_km(coeffs: list[KMCoefficients], proportions) -> KMCoefficients:
    """Proportion-weighted sum of absorption and scattering coefficients."""
    props = np.asarray(proportions, dtype=np.float64)
    if len(coeffs) != props.shape[0]:
        raise DomainError(f"{len(coeffs)} coefficient sets but {props.shape[0]} proportions")
    if np.any(props < 0.0):
        raise DomainError("proportions must be non-negative")
    if abs(float(props.sum()) - 1.0) > 1e-9:
        raise DomainError(f"proportions must sum to 1, got {props.sum()!r}")
    n = coeffs[0].n_channels
    if any(c.n_channels != n for c in coeffs):
        raise DomainError("all coefficient sets must share one channel count")
    k = sum(p * c.k for p, c in zip(props, coeffs))
    s = sum(p * c.s for p, c in zip(props, coeffs))
    return KMCoefficients(k=k, s=s)


def composite_km(c: KMCoefficients, substrate, thickness: float) -> np.ndarray:
    """Reflectance of a (K, S) layer of the given thickness over a substrate.

    At zero thickness the substrate is returned exactly (the analytic limit).
    """
    rg = as_channels(substrate)
    if rg.shape[0] != c.n_channels:
        raise DomainError("substrate channel count does not match coefficients")
    if np.any((rg < 0.0) | (rg > 1.0)):
        raise DomainError("substrate reflectance must lie in [0, 1]")
    if thickness < 0.0:
        raise DomainError(f"thickness must be non-negative, got {thickness}")
    if thickness == 0.0:
        return rg.copy()

    a = 1.0 + c.k / c.s
    b = np.sqrt(a * a - 1.0)
    z = np.minimum(b * c.s * thickness, _MAX_OPTICAL_DEPTH)
    # b -> 0 (zero absorption): b*coth(b*S*X) -> 1/(S*X).
    with np.errstate(divide="ignore", invalid="ignore"):
        bcoth = np.where(z > 0.0, b * _coth(z), 1.0 / (c.s * thickness))
    return (1.0 - rg * (a - bcoth)) / (a + bcoth - rg)


def km_transmittance(c: KMCoefficients, thickness: float) -> np.ndarray:
    """Transmittance of a (K, S) layer: T = b / (a sinh(bSX) + b cosh(bSX))."""
    if thickness <= 0.0:
        raise DomainError(f"thickness must be positive, got {thickness}")
    a = 1.0 + c.k / c.s
    b = np.sqrt(a * a - 1.0)
    z = np.minimum(b * c.s * thickness, _MAX_OPTICAL_DEPTH)
    # b -> 0: T -> 1 / (1 + a*S*X).
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(
            z > 0.0,
            b / (a * np.sinh(z) + b * np.cosh(z)),
            1.0 / (1.0 + a * c.s * thickness),
        )
    return t


def opaque_reflectance(c: KMCoefficients) -> np.ndarray:
    """Reflectance of an infinitely thick layer: a - b."""
    a = 1.0 + c.k / c.s
    return a - np.sqrt(a * a - 1.0)
