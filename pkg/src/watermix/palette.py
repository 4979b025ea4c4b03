"""Recipe lookup table: predicted mixtures over all primary-entry pairs.

Every ordered pair of expanded primary entries (988 x 988 = 976,144 for the
full grid, self-pairs and both orders included since the learned model is not
symmetric) gets a predicted mixture converted to Lab and 8-bit sRGB.  Queries
find the entry nearest a target in Lab, backed by a k-d tree whose answers are
exact against a brute-force scan.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .colorimetry import (
    DELTA_E_DIFFERENT_COLOR,
    Lab,
    SRGB8,
    XYZ_TO_SRGB,
    _gamma_encode,
    _lab_f,
    load_observer_tables,
    spectrum_to_srgb8,
    srgb8_to_lab,
)
from .errors import NotReadyError, ValidationError
from .mixnet import ModelWeights, forward_batch, predict_mixture
from .dataset import NormalizationConfig
from .spectra import (
    PigmentId,
    PigmentRecord,
    PrimaryEntry,
    QuantityML,
    as_spectrum,
    expand_primaries,
    interpolate_quantity,
)

LUT_MAGIC = b"WMLUT"
LUT_VERSION = 1
# pigment_a u8, pigment_b u8, q_a uL u16, q_b uL u16, Lab 3xf32, RGB 3xu8;
# packed little-endian, 21 bytes per record
LUT_RECORD_DTYPE = np.dtype([
    ("pa", "u1"), ("pb", "u1"),
    ("qa", "<u2"), ("qb", "<u2"),
    ("lab", "<f4", (3,)),
    ("rgb", "u1", (3,)),
])
_BUILD_CHUNK = 16384
# Candidates re-ranked with our own distance so index answers match brute force.
_QUERY_CANDIDATES = 64


@dataclass(frozen=True)
class LutEntry:
    pigment_a: PigmentId
    pigment_b: PigmentId
    q_a: QuantityML
    q_b: QuantityML
    lab: Lab
    rgb: SRGB8


@dataclass(frozen=True)
class Recipe:
    entry: LutEntry
    delta_e_to_target: float

    @property
    def ratio_gap(self) -> float:
        qa, qb = self.entry.q_a.ul, self.entry.q_b.ul
        return abs(qa - qb) / (qa + qb)

    @property
    def good_ratio(self) -> bool:
        return self.ratio_gap < 0.5

    @property
    def good_match(self) -> bool:
        return self.delta_e_to_target < DELTA_E_DIFFERENT_COLOR

    def to_dict(self) -> dict:
        e = self.entry
        return {
            "pigment_a": {
                "index": e.pigment_a.index, "name": e.pigment_a.name, "symbol": e.pigment_a.symbol,
            },
            "pigment_b": {
                "index": e.pigment_b.index, "name": e.pigment_b.name, "symbol": e.pigment_b.symbol,
            },
            "q_a_ml": e.q_a.ml,
            "q_b_ml": e.q_b.ml,
            "rgb": [e.rgb.r, e.rgb.g, e.rgb.b],
            "lab": [e.lab.l, e.lab.a, e.lab.b],
            "delta_e": self.delta_e_to_target,
            "ratio_gap": self.ratio_gap,
            "good_ratio": self.good_ratio,
            "good_match": self.good_match,
        }


class Lut:
    """Immutable in-memory lookup table with an exact nearest-neighbor index."""

    def __init__(self, ids: np.ndarray, quantities: np.ndarray, labs: np.ndarray,
                 rgbs: np.ndarray, model_hash: str, build_config: dict):
        n = ids.shape[0]
        if n == 0:
            raise ValidationError("lookup table has no entries")
        self.ids = ids            # [n, 2] u8
        self.quantities = quantities  # [n, 2] u16, microliters
        self.labs = labs          # [n, 3] f32
        self.rgbs = rgbs          # [n, 3] u8
        self.model_hash = model_hash
        self.build_config = build_config
        # f64 for querying so ranking matches the brute-force float64 scan
        self._labs64 = labs.astype(np.float64)
        self._tree = cKDTree(self._labs64)

    def __len__(self) -> int:
        return self.ids.shape[0]

    def entry(self, i: int) -> LutEntry:
        return LutEntry(
            pigment_a=PigmentId(int(self.ids[i, 0])),
            pigment_b=PigmentId(int(self.ids[i, 1])),
            q_a=QuantityML(int(self.quantities[i, 0])),
            q_b=QuantityML(int(self.quantities[i, 1])),
            lab=Lab(float(self.labs[i, 0]), float(self.labs[i, 1]), float(self.labs[i, 2])),
            rgb=SRGB8(int(self.rgbs[i, 0]), int(self.rgbs[i, 1]), int(self.rgbs[i, 2])),
        )

    def _rank_key(self, i: int, de: float):
        qa, qb = int(self.quantities[i, 0]), int(self.quantities[i, 1])
        gap = abs(qa - qb) / (qa + qb)
        return (de, gap, qa + qb, int(self.ids[i, 0]), int(self.ids[i, 1]), qa, qb)

    def _distances(self, target: np.ndarray, idx: np.ndarray) -> np.ndarray:
        diff = self._labs64[idx] - target
        return np.sqrt((diff * diff).sum(axis=1))

    def match(self, target: SRGB8, top_k: int = 1) -> list[Recipe]:
        """Entries nearest the target color in Lab, best first.

        The k-d tree supplies candidates; distances are recomputed in float64
        and ties broken by (ratio gap, total quantity, pigment indices) so the
        result is identical to a brute-force scan.
        """
        if top_k < 1:
            raise ValidationError(f"top_k must be >= 1, got {top_k}")
        lab = srgb8_to_lab(target)
        point = np.array([lab.l, lab.a, lab.b])
        k = min(max(_QUERY_CANDIDATES, 4 * top_k), len(self))
        _, idx = self._tree.query(point, k=k)
        idx = np.atleast_1d(idx)
        des = self._distances(point, idx)
        ranked = sorted(
            (self._rank_key(int(i), float(de)), int(i), float(de))
            for i, de in zip(idx, des)
        )
        return [Recipe(entry=self.entry(i), delta_e_to_target=de) for _, i, de in ranked[:top_k]]

    def match_brute_force(self, target: SRGB8, top_k: int = 1) -> list[Recipe]:
        """Linear-scan oracle for the index; same ranking rules."""
        lab = srgb8_to_lab(target)
        point = np.array([lab.l, lab.a, lab.b])
        des = self._distances(point, np.arange(len(self)))
        order = np.argsort(des, kind="stable")[: max(4 * top_k, _QUERY_CANDIDATES)]
        ranked = sorted(
            (self._rank_key(int(i), float(des[i])), int(i), float(des[i])) for i in order
        )
        return [Recipe(entry=self.entry(i), delta_e_to_target=de) for _, i, de in ranked[:top_k]]


def _pair_features(
    entries_t: np.ndarray,
    entries_r: np.ndarray,
    entries_q: np.ndarray,
    substrate: np.ndarray,
    ia: np.ndarray,
    ib: np.ndarray,
) -> np.ndarray:
    """Feature blocks for the given (ia, ib) entry pairs."""
    feats = np.empty((ia.shape[0], 207))
    feats[:, 0:41] = entries_t[ia]
    feats[:, 41:82] = entries_r[ia]
    feats[:, 82:123] = entries_t[ib]
    feats[:, 123:164] = entries_r[ib]
    feats[:, 164:205] = substrate
    feats[:, 205] = entries_q[ia]
    feats[:, 206] = entries_q[ib]
    return feats


def build_lut(
    w: ModelWeights,
    records: list[PigmentRecord],
    substrate,
    model_hash: str = "",
    entries: list[PrimaryEntry] | None = None,
    out_path=None,
    build_config: dict | None = None,
) -> Lut:
    """Predict every ordered pair of primary entries and index the results.

    With ``out_path`` the table is streamed to disk in deterministic pair
    order; an existing partial file with a matching header is resumed instead
    of recomputed.
    """
    substrate = as_spectrum(substrate)
    if entries is None:
        entries = expand_primaries(records)
    n = len(entries)
    total = n * n
    norm = NormalizationConfig.from_dict(w.config.normalization)
    config = dict(build_config or {})
    config.setdefault("n_entries", n)
    tables = load_observer_tables()
    white = tables.white_point

    ids = np.empty((total, 2), dtype=np.uint8)
    quantities = np.empty((total, 2), dtype=np.uint16)
    labs = np.empty((total, 3), dtype=np.float32)
    rgbs = np.empty((total, 3), dtype=np.uint8)
    entry_ids = np.array([e.pigment.index for e in entries], dtype=np.uint8)
    entry_q = np.array([e.quantity.ul for e in entries], dtype=np.uint16)
    all_ia, all_ib = np.divmod(np.arange(total), n)
    ids[:, 0] = entry_ids[all_ia]
    ids[:, 1] = entry_ids[all_ib]
    quantities[:, 0] = entry_q[all_ia]
    quantities[:, 1] = entry_q[all_ib]

    entries_t = np.stack([e.transmittance for e in entries])
    entries_r = np.stack([e.reflectance for e in entries])
    div = norm.quantity_divisor_ml * 1000.0
    entries_qn = entry_q.astype(np.float64) / div

    writer = _LutWriter(out_path, model_hash, config, total) if out_path else None
    start = writer.resume_count if writer else 0
    if writer and start:
        labs[:start], rgbs[:start] = _read_records(Path(out_path), count=start)

    for lo in range(start, total, _BUILD_CHUNK):
        hi = min(lo + _BUILD_CHUNK, total)
        feats = _pair_features(
            entries_t, entries_r, entries_qn, substrate, all_ia[lo:hi], all_ib[lo:hi]
        )
        pred = forward_batch(w, feats)
        chunk_labs, chunk_rgbs = _spectra_to_lab_rgb(pred, tables, white)
        labs[lo:hi] = chunk_labs
        rgbs[lo:hi] = chunk_rgbs
        if writer:
            writer.append(ids[lo:hi], quantities[lo:hi], chunk_labs, chunk_rgbs)
    if writer:
        writer.close()
    return Lut(ids, quantities, labs, rgbs, model_hash, config)


def _spectra_to_lab_rgb(pred: np.ndarray, tables, white):
    """Vectorized spectrum -> (Lab f32, sRGB8 u8) for a [m, 41] batch."""
    k = 100.0 / float(np.dot(tables.illuminant_d65, tables.cmf_y))
    weighted = pred * tables.illuminant_d65
    xyz = np.stack([
        k * weighted @ tables.cmf_x,
        k * weighted @ tables.cmf_y,
        k * weighted @ tables.cmf_z,
    ], axis=1)
    linear = np.clip(xyz / 100.0 @ XYZ_TO_SRGB.T, 0.0, 1.0)
    rgbs = np.rint(_gamma_encode(linear) * 255.0).astype(np.uint8)
    f = _lab_f(xyz / np.array([white.x, white.y, white.z]))
    labs = np.stack([
        116.0 * f[:, 1] - 16.0,
        500.0 * (f[:, 0] - f[:, 1]),
        200.0 * (f[:, 1] - f[:, 2]),
    ], axis=1).astype(np.float32)
    return labs, rgbs


# ---------------------------------------------------------------------------
# LUT file: header (magic, version, count, model hash, config JSON), then
# fixed 21-byte records in pair-major order.


class _LutWriter:
    def __init__(self, path, model_hash: str, config: dict, total: int):
        self.path = Path(path)
        header = _lut_header(model_hash, config, total)
        self.resume_count = 0
        if self.path.exists():
            existing = self.path.read_bytes()
            if existing[: len(header)] == header:
                body = len(existing) - len(header)
                size = LUT_RECORD_DTYPE.itemsize
                if body % size == 0 and body // size <= total:
                    self.resume_count = body // size
        if self.resume_count == 0:
            self.path.write_bytes(header)
        self._fh = self.path.open("ab")

    def append(self, ids, quantities, labs, rgbs):
        rows = np.empty(ids.shape[0], dtype=LUT_RECORD_DTYPE)
        rows["pa"] = ids[:, 0]
        rows["pb"] = ids[:, 1]
        rows["qa"] = quantities[:, 0]
        rows["qb"] = quantities[:, 1]
        rows["lab"] = labs
        rows["rgb"] = rgbs
        self._fh.write(rows.tobytes())

    def close(self):
        self._fh.close()


def _lut_header(model_hash: str, config: dict, count: int) -> bytes:
    config_bytes = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    hash_bytes = bytes.fromhex(model_hash) if model_hash else b"\x00" * 32
    if len(hash_bytes) != 32:
        raise ValidationError("model hash must be 32 bytes of hex")
    return b"".join([
        LUT_MAGIC,
        struct.pack("<I", LUT_VERSION),
        struct.pack("<Q", count),
        hash_bytes,
        struct.pack("<I", len(config_bytes)),
        config_bytes,
    ])


def _parse_header(data: bytes):
    if data[:5] != LUT_MAGIC:
        raise ValidationError(f"not a LUT file: bad magic {data[:5]!r}")
    version = struct.unpack_from("<I", data, 5)[0]
    if version != LUT_VERSION:
        raise ValidationError(f"unsupported LUT version {version}")
    count = struct.unpack_from("<Q", data, 9)[0]
    model_hash = data[17:49].hex()
    cfg_len = struct.unpack_from("<I", data, 49)[0]
    config = json.loads(data[53 : 53 + cfg_len].decode())
    return count, model_hash, config, 53 + cfg_len


def _read_records(path: Path, count: int):
    data = path.read_bytes()
    _, _, _, offset = _parse_header(data)
    rows = np.frombuffer(data, dtype=LUT_RECORD_DTYPE, count=count, offset=offset)
    return rows["lab"].copy(), rows["rgb"].copy()


def load_lut(path) -> Lut:
    data = Path(path).read_bytes()
    count, model_hash, config, offset = _parse_header(data)
    expected = offset + count * LUT_RECORD_DTYPE.itemsize
    if len(data) != expected:
        raise ValidationError(
            f"LUT file truncated or partial: {len(data)} bytes, expected {expected}"
        )
    rows = np.frombuffer(data, dtype=LUT_RECORD_DTYPE, count=count, offset=offset)
    ids = np.stack([rows["pa"], rows["pb"]], axis=1)
    quantities = np.stack([rows["qa"], rows["qb"]], axis=1)
    return Lut(ids, quantities, rows["lab"].copy(), rows["rgb"].copy(), model_hash, config)


def match_color(lut: Lut | None, target: SRGB8, top_k: int = 1) -> list[Recipe]:
    if lut is None:
        raise NotReadyError("no lookup table loaded")
    return lut.match(target, top_k=top_k)


def mix_preview(
    w: ModelWeights,
    records: list[PigmentRecord],
    substrate,
    pigment_a: int,
    q_a_ml: float,
    pigment_b: int,
    q_b_ml: float,
):
    """Swatches of both ingredients and the predicted mixture.

    Returns ((rgb_a, rgb_b, rgb_mix), predicted spectrum).
    """
    by_index = {r.pigment.index: r for r in records}
    refl_a, _ = interpolate_quantity(by_index[pigment_a], QuantityML.from_ml(q_a_ml))
    refl_b, _ = interpolate_quantity(by_index[pigment_b], QuantityML.from_ml(q_b_ml))
    prediction = predict_mixture(
        w, records, substrate, pigment_a, q_a_ml, pigment_b, q_b_ml
    )
    return (
        spectrum_to_srgb8(refl_a),
        spectrum_to_srgb8(refl_b),
        spectrum_to_srgb8(prediction),
    ), prediction
