"""Corpus files, sample labeling, feature packing, and the train/test split.

A corpus directory holds:
    pigments.csv      one row per (pigment, role, quantity) spectrum + substrate
    mixtures.csv      measured mixture reflectances keyed by pigment/quantity pair
    black_backed.csv  optional: 0.01 mL primaries over black backing (KM comparison)
    manifest.json     provenance, counts, normalization config

Floats in the CSVs are written with repr() so re-ingesting reproduces the
in-memory values bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError
from .spectra import (
    CANONICAL_QUANTITIES_UL,
    N_PIGMENTS,
    N_SAMPLES,
    PigmentId,
    PigmentRecord,
    QuantityML,
    as_spectrum,
    ml_to_ul,
    ul_to_ml,
)

N_FEATURES = 207
TYPE_I = "I"
TYPE_M = "M"

# Type M quantity pairs (uL): ratios 1:1, 1:2 and 2:1 at doubling quantities.
TYPE_M_QUANTITY_PAIRS_UL = (
    (10, 10), (20, 20), (40, 40), (80, 80),
    (10, 20), (20, 40), (40, 80),
    (20, 10), (40, 20), (80, 40),
)

EXPECTED_TYPE_I = 442
EXPECTED_TYPE_M = 780


@dataclass(frozen=True)
class NormalizationConfig:
    """How raw sample components map onto the 207 model features."""

    spectra: str = "identity"
    quantity_divisor_ml: float = 0.16

    def to_dict(self) -> dict:
        return {"spectra": self.spectra, "quantity_divisor_ml": self.quantity_divisor_ml}

    @classmethod
    def from_dict(cls, d: dict) -> "NormalizationConfig":
        return cls(
            spectra=d.get("spectra", "identity"),
            quantity_divisor_ml=float(d.get("quantity_divisor_ml", 0.16)),
        )


def pack_features(
    t_a, rw_a, t_b, rw_b, rw, q_a: QuantityML, q_b: QuantityML, norm: NormalizationConfig
) -> np.ndarray:
    """Lay out [T_A | Rw_A | T_B | Rw_B | Rw | q_a | q_b] as 207 features."""
    parts = [as_spectrum(x) for x in (t_a, rw_a, t_b, rw_b, rw)]
    div = norm.quantity_divisor_ml * 1000.0
    out = np.empty(N_FEATURES)
    out[: 5 * N_SAMPLES] = np.concatenate(parts)
    out[205] = q_a.ul / div
    out[206] = q_b.ul / div
    return out


def unpack_features(features, norm: NormalizationConfig):
    """Inverse of pack_features; quantities come back exact via the uL grid."""
    f = np.asarray(features, dtype=np.float64)
    if f.shape != (N_FEATURES,):
        raise ValidationError(f"feature vector must have {N_FEATURES} entries, got {f.shape}")
    spectra = [f[i * N_SAMPLES : (i + 1) * N_SAMPLES].copy() for i in range(5)]
    div = norm.quantity_divisor_ml * 1000.0
    q_a = QuantityML(int(round(f[205] * div)))
    q_b = QuantityML(int(round(f[206] * div)))
    return (*spectra, q_a, q_b)


@dataclass(frozen=True)
class MixSample:
    """One labeled example: 207 input features and the mixture reflectance."""

    pigment_a: PigmentId
    pigment_b: PigmentId
    q_a: QuantityML
    q_b: QuantityML
    features: np.ndarray
    target: np.ndarray
    label_type: str

    def __post_init__(self):
        if self.label_type not in (TYPE_I, TYPE_M):
            raise ValidationError(f"unknown label type {self.label_type!r}")
        if self.label_type == TYPE_I and self.pigment_a != self.pigment_b:
            raise ValidationError("incrementation samples must use a single pigment")

    @property
    def sample_id(self) -> str:
        return (
            f"{self.label_type}:p{self.pigment_a.index:02d}+p{self.pigment_b.index:02d}"
            f":{self.q_a.ul:03d}+{self.q_b.ul:03d}"
        )

    def swapped(self) -> "MixSample":
        """The same mixture with the two pigment roles exchanged."""
        f = self.features
        swapped = np.concatenate([
            f[2 * N_SAMPLES : 3 * N_SAMPLES],  # T_B -> slot A
            f[3 * N_SAMPLES : 4 * N_SAMPLES],  # Rw_B
            f[0 * N_SAMPLES : 1 * N_SAMPLES],  # T_A -> slot B
            f[1 * N_SAMPLES : 2 * N_SAMPLES],  # Rw_A
            f[4 * N_SAMPLES : 5 * N_SAMPLES],  # substrate
            [f[206], f[205]],
        ])
        return MixSample(
            pigment_a=self.pigment_b,
            pigment_b=self.pigment_a,
            q_a=self.q_b,
            q_b=self.q_a,
            features=swapped,
            target=self.target,
            label_type=self.label_type,
        )


@dataclass
class DatasetSplit:
    train: list[MixSample]
    test: list[MixSample]
    seed: int
    pre_double_counts: dict = field(default_factory=dict)

    def manifest(self, norm: NormalizationConfig) -> dict:
        return {
            "schema_version": 1,
            "seed": self.seed,
            "pre_double_counts": self.pre_double_counts,
            "counts": {"train": len(self.train), "test": len(self.test)},
            "normalization": norm.to_dict(),
            "train_ids": [s.sample_id for s in self.train],
            "test_ids": [s.sample_id for s in self.test],
        }


def type_i_quantity_pairs_ul() -> list[tuple[int, int]]:
    """Unordered canonical-quantity pairs whose sum is itself canonical (34)."""
    qs = CANONICAL_QUANTITIES_UL
    return [
        (a, b)
        for i, a in enumerate(qs)
        for b in qs[i:]
        if (a + b) in qs
    ]


def label_type_i(
    records: list[PigmentRecord], substrate, norm: NormalizationConfig | None = None
) -> list[MixSample]:
    """Incrementation samples: a pigment added to itself.

    The target is the pigment's stored reflectance at the summed quantity, so
    only quantity pairs whose sum is again a canonical quantity qualify.
    """
    norm = norm or NormalizationConfig()
    substrate = as_spectrum(substrate)
    samples = []
    for rec in sorted(records, key=lambda r: r.pigment.index):
        rec.validate()
        for qa_ul, qb_ul in type_i_quantity_pairs_ul():
            qa, qb = QuantityML(qa_ul), QuantityML(qb_ul)
            features = pack_features(
                rec.transmittance[qa_ul], rec.reflectance[qa_ul],
                rec.transmittance[qb_ul], rec.reflectance[qb_ul],
                substrate, qa, qb, norm,
            )
            samples.append(MixSample(
                pigment_a=rec.pigment, pigment_b=rec.pigment,
                q_a=qa, q_b=qb,
                features=features,
                target=rec.reflectance[qa_ul + qb_ul].copy(),
                label_type=TYPE_I,
            ))
    return samples


MixtureKey = tuple[int, int, int, int]  # (pigment_a, pigment_b, q_a_uL, q_b_uL)


def label_type_m(
    records: list[PigmentRecord],
    substrate,
    mixtures: dict[MixtureKey, np.ndarray],
    norm: NormalizationConfig | None = None,
) -> list[MixSample]:
    """Two-pigment samples at the measured 1:1 / 1:2 / 2:1 quantity pairs."""
    norm = norm or NormalizationConfig()
    substrate = as_spectrum(substrate)
    by_index = {r.pigment.index: r for r in records}
    samples = []
    for ia in range(1, N_PIGMENTS + 1):
        for ib in range(ia + 1, N_PIGMENTS + 1):
            rec_a, rec_b = by_index[ia], by_index[ib]
            rec_a.validate()
            rec_b.validate()
            for qa_ul, qb_ul in TYPE_M_QUANTITY_PAIRS_UL:
                key = (ia, ib, qa_ul, qb_ul)
                if key not in mixtures:
                    raise ValidationError(
                        f"missing mixture ground truth for pigments ({ia}, {ib}) at "
                        f"({ul_to_ml(qa_ul)}, {ul_to_ml(qb_ul)}) mL"
                    )
                qa, qb = QuantityML(qa_ul), QuantityML(qb_ul)
                features = pack_features(
                    rec_a.transmittance[qa_ul], rec_a.reflectance[qa_ul],
                    rec_b.transmittance[qb_ul], rec_b.reflectance[qb_ul],
                    substrate, qa, qb, norm,
                )
                samples.append(MixSample(
                    pigment_a=rec_a.pigment, pigment_b=rec_b.pigment,
                    q_a=qa, q_b=qb,
                    features=features,
                    target=as_spectrum(mixtures[key]).copy(),
                    label_type=TYPE_M,
                ))
    return samples


def split(samples: list[MixSample], seed: int) -> DatasetSplit:
    """80/20 split per label type, then double every sample with its swap.

    Splitting happens before doubling so a sample and its role-swapped twin
    always land in the same partition.
    """
    rng = np.random.default_rng(seed)
    train: list[MixSample] = []
    test: list[MixSample] = []
    pre_double = {}
    for label_type in (TYPE_I, TYPE_M):
        of_type = sorted(
            (s for s in samples if s.label_type == label_type), key=lambda s: s.sample_id
        )
        order = rng.permutation(len(of_type))
        n_train = round(0.8 * len(of_type))
        train_part = [of_type[i] for i in order[:n_train]]
        test_part = [of_type[i] for i in order[n_train:]]
        pre_double[label_type] = {"train": len(train_part), "test": len(test_part)}
        train.extend(train_part)
        test.extend(test_part)
    train = [s2 for s in train for s2 in (s, s.swapped())]
    test = [s2 for s in test for s2 in (s, s.swapped())]
    return DatasetSplit(train=train, test=test, seed=seed, pre_double_counts=pre_double)


# ---------------------------------------------------------------------------
# Corpus files


@dataclass
class Corpus:
    records: list[PigmentRecord]
    substrate: np.ndarray
    mixtures: dict[MixtureKey, np.ndarray]
    black_backed: dict[int, np.ndarray] = field(default_factory=dict)
    manifest: dict = field(default_factory=dict)

    def labeled_samples(self, norm: NormalizationConfig | None = None) -> list[MixSample]:
        norm = norm or NormalizationConfig()
        return label_type_i(self.records, self.substrate, norm) + label_type_m(
            self.records, self.substrate, self.mixtures, norm
        )


def _fmt(values: np.ndarray) -> str:
    return ",".join(repr(float(v)) for v in values)


def _parse_spectrum(fields: list[str], line: int) -> np.ndarray:
    if len(fields) != N_SAMPLES:
        raise ParseError(f"expected {N_SAMPLES} spectral values, got {len(fields)}", line)
    try:
        values = [float(v) for v in fields]
    except ValueError as exc:
        raise ParseError(str(exc), line) from None
    try:
        return as_spectrum(values)
    except ValidationError as exc:
        raise ParseError(str(exc), line) from None


def write_pigments_csv(path, records: list[PigmentRecord], substrate) -> None:
    lines = [f"SUBSTRATE,Rw,-,{_fmt(as_spectrum(substrate))}"]
    for rec in sorted(records, key=lambda r: r.pigment.index):
        for q_ul in CANONICAL_QUANTITIES_UL:
            q_ml = ul_to_ml(q_ul)
            if q_ul in rec.reflectance:
                lines.append(f"{rec.pigment.index},Rw,{q_ml!r},{_fmt(rec.reflectance[q_ul])}")
            if q_ul in rec.transmittance:
                lines.append(f"{rec.pigment.index},T,{q_ml!r},{_fmt(rec.transmittance[q_ul])}")
    Path(path).write_text("\n".join(lines) + "\n")


def ingest(path) -> tuple[list[PigmentRecord], np.ndarray]:
    """Parse a pigment CSV into 13 complete records plus the substrate curve."""
    records = {i: PigmentRecord(pigment=PigmentId(i)) for i in range(1, N_PIGMENTS + 1)}
    substrate = None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        if not raw.strip() or raw.startswith("#"):
            continue
        fields = raw.split(",")
        if len(fields) < 3:
            raise ParseError("expected at least 3 columns", lineno)
        head, role, qty = fields[0].strip(), fields[1].strip(), fields[2].strip()
        spectrum = _parse_spectrum(fields[3:], lineno)
        if head == "SUBSTRATE":
            if substrate is not None:
                raise ParseError("duplicate SUBSTRATE row", lineno)
            substrate = spectrum
            continue
        try:
            index = int(head)
        except ValueError:
            raise ParseError(f"bad pigment index {head!r}", lineno) from None
        if not 1 <= index <= N_PIGMENTS:
            raise ParseError(f"pigment index {index} out of range", lineno)
        q_ul = ml_to_ul(float(qty))
        if q_ul not in CANONICAL_QUANTITIES_UL:
            raise ParseError(f"quantity {qty} mL is not a canonical quantity", lineno)
        rec = records[index]
        store = rec.reflectance if role == "Rw" else rec.transmittance if role == "T" else None
        if store is None:
            raise ParseError(f"unknown role {role!r} (expected Rw or T)", lineno)
        if q_ul in store:
            raise ParseError(f"duplicate row for pigment {index} {role} at {qty} mL", lineno)
        store[q_ul] = spectrum
    if substrate is None:
        raise ValidationError("pigment file has no SUBSTRATE row")
    missing = [m for rec in records.values() for m in rec.missing_entries()]
    if missing:
        listing = ", ".join(f"(pigment {p}, {q} mL, {role})" for p, q, role in missing)
        raise ValidationError(f"missing entries: {listing}")
    return [records[i] for i in range(1, N_PIGMENTS + 1)], substrate


def write_mixtures_csv(path, mixtures: dict[MixtureKey, np.ndarray]) -> None:
    lines = []
    for (ia, ib, qa_ul, qb_ul) in sorted(mixtures):
        spectrum = _fmt(as_spectrum(mixtures[(ia, ib, qa_ul, qb_ul)]))
        lines.append(f"{ia},{ib},{ul_to_ml(qa_ul)!r},{ul_to_ml(qb_ul)!r},{spectrum}")
    Path(path).write_text("\n".join(lines) + "\n")


def ingest_mixtures(path) -> dict[MixtureKey, np.ndarray]:
    mixtures: dict[MixtureKey, np.ndarray] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        if not raw.strip() or raw.startswith("#"):
            continue
        fields = raw.split(",")
        if len(fields) < 4:
            raise ParseError("expected at least 4 columns", lineno)
        try:
            ia, ib = int(fields[0]), int(fields[1])
            qa_ul, qb_ul = ml_to_ul(float(fields[2])), ml_to_ul(float(fields[3]))
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        key = (ia, ib, qa_ul, qb_ul)
        if key in mixtures:
            raise ParseError(f"duplicate mixture row {key}", lineno)
        mixtures[key] = _parse_spectrum(fields[4:], lineno)
    return mixtures


def write_black_backed_csv(path, black_backed: dict[int, np.ndarray], q_ml: float = 0.01) -> None:
    lines = [
        f"{index},Rb,{q_ml!r},{_fmt(as_spectrum(black_backed[index]))}"
        for index in sorted(black_backed)
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def ingest_black_backed(path) -> dict[int, np.ndarray]:
    out: dict[int, np.ndarray] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        if not raw.strip() or raw.startswith("#"):
            continue
        fields = raw.split(",")
        try:
            index = int(fields[0])
        except ValueError:
            raise ParseError(f"bad pigment index {fields[0]!r}", lineno) from None
        if fields[1].strip() != "Rb":
            raise ParseError(f"expected role Rb, got {fields[1]!r}", lineno)
        if index in out:
            raise ParseError(f"duplicate black-backed row for pigment {index}", lineno)
        out[index] = _parse_spectrum(fields[3:], lineno)
    return out


def write_corpus(directory, corpus: Corpus) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_pigments_csv(directory / "pigments.csv", corpus.records, corpus.substrate)
    write_mixtures_csv(directory / "mixtures.csv", corpus.mixtures)
    if corpus.black_backed:
        write_black_backed_csv(directory / "black_backed.csv", corpus.black_backed)
    manifest = dict(corpus.manifest)
    manifest.setdefault("schema_version", 1)
    (directory / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n"
    )


def load_corpus(directory) -> Corpus:
    directory = Path(directory)
    records, substrate = ingest(directory / "pigments.csv")
    mixtures = ingest_mixtures(directory / "mixtures.csv")
    black_path = directory / "black_backed.csv"
    black_backed = ingest_black_backed(black_path) if black_path.exists() else {}
    manifest_path = directory / "manifest.json"
    manifest = json.loads(manifest_path.read_text()) if manifest_path.exists() else {}
    return Corpus(
        records=records,
        substrate=substrate,
        mixtures=mixtures,
        black_backed=black_backed,
        manifest=manifest,
    )
