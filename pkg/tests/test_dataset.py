import numpy as np
import pytest

from watermix.dataset import (
    EXPECTED_TYPE_I,
    EXPECTED_TYPE_M,
    NormalizationConfig,
    TYPE_I,
    TYPE_M,
    TYPE_M_QUANTITY_PAIRS_UL,
    ingest,
    label_type_i,
    label_type_m,
    load_corpus,
    pack_features,
    split,
    type_i_quantity_pairs_ul,
    unpack_features,
    write_corpus,
)
from watermix.errors import ParseError, ValidationError
from watermix.km import composite_km, km_transmittance
from watermix.spectra import CANONICAL_QUANTITIES_UL, N_SAMPLES, QuantityML
from watermix.synth import default_pigment_specs, generate_synthetic, make_substrate


def brute_force_type_i_pairs():
    qs = set(CANONICAL_QUANTITIES_UL)
    return {
        (a, b)
        for a in qs
        for b in qs
        if a <= b and (a + b) in qs
    }


def test_type_i_pair_rule_matches_enumeration_oracle():
    assert set(type_i_quantity_pairs_ul()) == brute_force_type_i_pairs()
    assert len(type_i_quantity_pairs_ul()) == 34


def test_type_i_membership_examples():
    pairs = set(type_i_quantity_pairs_ul())
    assert (10, 10) in pairs      # 0.01+0.01 -> 0.02 is canonical
    assert (50, 80) not in pairs  # 0.05+0.08 -> 0.13 is not


def test_type_i_counts_and_targets(corpus):
    samples = label_type_i(corpus.records, corpus.substrate)
    assert len(samples) == EXPECTED_TYPE_I
    per_pigment = {}
    for s in samples:
        per_pigment.setdefault(s.pigment_a.index, 0)
        per_pigment[s.pigment_a.index] += 1
        assert s.pigment_a == s.pigment_b
    assert all(count == 34 for count in per_pigment.values())

    sample = next(s for s in samples if s.q_a.ul == 10 and s.q_b.ul == 10)
    rec = next(r for r in corpus.records if r.pigment == sample.pigment_a)
    assert np.array_equal(sample.target, rec.reflectance[20])


def test_type_m_counts_and_ratio_set(corpus):
    samples = label_type_m(corpus.records, corpus.substrate, corpus.mixtures)
    assert len(samples) == EXPECTED_TYPE_M
    pairs = {(s.pigment_a.index, s.pigment_b.index) for s in samples}
    assert len(pairs) == 78
    ratios = {s.q_a.ul / s.q_b.ul for s in samples}
    assert ratios == {1.0, 0.5, 2.0}
    assert len(TYPE_M_QUANTITY_PAIRS_UL) == 10


def test_type_m_missing_ground_truth_names_pair(corpus):
    broken = dict(corpus.mixtures)
    del broken[(2, 7, 40, 80)]
    with pytest.raises(ValidationError, match=r"\(2, 7\)"):
        label_type_m(corpus.records, corpus.substrate, broken)


def test_feature_layout_round_trip(corpus, rng):
    norm = NormalizationConfig()
    spectra = [rng.uniform(0, 1, N_SAMPLES) for _ in range(5)]
    qa, qb = QuantityML.from_ml(0.012), QuantityML.from_ml(0.16)
    packed = pack_features(*spectra, qa, qb, norm)
    assert packed.shape == (207,)
    t_a, rw_a, t_b, rw_b, rw, qa2, qb2 = unpack_features(packed, norm)
    for original, recovered in zip(spectra, (t_a, rw_a, t_b, rw_b, rw)):
        assert np.array_equal(original, recovered)
    assert qa2 == qa
    assert qb2 == qb


def test_quantities_normalized_into_unit_interval(labeled_samples):
    for s in labeled_samples[:50]:
        assert 0.0 < s.features[205] <= 1.0
        assert 0.0 < s.features[206] <= 1.0


def test_split_counts(dataset_split):
    assert len(dataset_split.train) == 1956
    assert len(dataset_split.test) == 488
    assert dataset_split.pre_double_counts[TYPE_I] == {"train": 354, "test": 88}
    assert dataset_split.pre_double_counts[TYPE_M] == {"train": 624, "test": 156}


def test_split_doubling_keeps_twins_together(dataset_split):
    for part in (dataset_split.train, dataset_split.test):
        ids = {s.sample_id for s in part}
        by_id = {}
        for s in part:
            by_id.setdefault(s.sample_id, []).append(s)
        for s in part:
            twin = s.swapped()
            assert twin.sample_id in ids
            match = by_id[twin.sample_id]
            assert any(np.array_equal(t.target, s.target) for t in match)


def test_split_is_deterministic(labeled_samples):
    a = split(labeled_samples, seed=7)
    b = split(labeled_samples, seed=7)
    assert [s.sample_id for s in a.train] == [s.sample_id for s in b.train]
    assert [s.sample_id for s in a.test] == [s.sample_id for s in b.test]
    c = split(labeled_samples, seed=8)
    assert [s.sample_id for s in a.test] != [s.sample_id for s in c.test]


def test_swapped_sample_swaps_feature_blocks(labeled_samples):
    s = next(x for x in labeled_samples if x.label_type == TYPE_M)
    t = s.swapped()
    f, g = s.features, t.features
    assert np.array_equal(f[0:41], g[82:123])
    assert np.array_equal(f[41:82], g[123:164])
    assert np.array_equal(f[82:123], g[0:41])
    assert np.array_equal(f[164:205], g[164:205])
    assert f[205] == g[206] and f[206] == g[205]
    assert np.array_equal(s.target, t.target)


def test_corpus_round_trip_is_bitwise(tmp_path, corpus):
    write_corpus(tmp_path / "corpus", corpus)
    again = load_corpus(tmp_path / "corpus")
    for rec_a, rec_b in zip(corpus.records, again.records):
        for q in CANONICAL_QUANTITIES_UL:
            assert np.array_equal(rec_a.reflectance[q], rec_b.reflectance[q])
            assert np.array_equal(rec_a.transmittance[q], rec_b.transmittance[q])
    assert np.array_equal(corpus.substrate, again.substrate)
    assert set(corpus.mixtures) == set(again.mixtures)
    for key in corpus.mixtures:
        assert np.array_equal(corpus.mixtures[key], again.mixtures[key])
    for index in corpus.black_backed:
        assert np.array_equal(corpus.black_backed[index], again.black_backed[index])


def test_ingest_reports_missing_entry(tmp_path, corpus):
    write_corpus(tmp_path / "corpus", corpus)
    path = tmp_path / "corpus" / "pigments.csv"
    lines = [
        line for line in path.read_text().splitlines()
        if not line.startswith("3,Rw,0.12,")
    ]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValidationError, match=r"pigment 3, 0\.12 mL, Rw"):
        ingest(path)


def test_ingest_rejects_wrong_sample_count(tmp_path):
    row = "1,Rw,0.01," + ",".join(["0.5"] * 40)
    path = tmp_path / "bad.csv"
    path.write_text(row + "\n")
    with pytest.raises(ParseError, match="line 1"):
        ingest(path)


def test_ingest_rejects_duplicate_rows(tmp_path, corpus):
    write_corpus(tmp_path / "corpus", corpus)
    path = tmp_path / "corpus" / "pigments.csv"
    lines = path.read_text().splitlines()
    dup = next(line for line in lines if line.startswith("1,Rw,0.01,"))
    path.write_text("\n".join(lines + [dup]) + "\n")
    with pytest.raises(ParseError, match="duplicate"):
        ingest(path)


def test_synthetic_corpus_determinism(tmp_path):
    spec_a = generate_synthetic(default_pigment_specs(3), make_substrate(), 3)
    spec_b = generate_synthetic(default_pigment_specs(3), make_substrate(), 3)
    write_corpus(tmp_path / "a", spec_a)
    write_corpus(tmp_path / "b", spec_b)
    for name in ("pigments.csv", "mixtures.csv", "black_backed.csv", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_synthetic_seeds_differ():
    a = generate_synthetic(default_pigment_specs(1), make_substrate(), 1)
    b = generate_synthetic(default_pigment_specs(2), make_substrate(), 2)
    assert not np.array_equal(a.records[0].reflectance[10], b.records[0].reflectance[10])


def test_synthetic_type_i_labels_exact_by_construction(corpus):
    specs = default_pigment_specs(0)
    coeffs = specs[4].coefficients()
    rec = corpus.records[4]
    expected = composite_km(coeffs, corpus.substrate, 2.0)
    assert np.allclose(rec.reflectance[20], expected, atol=1e-12)
    assert np.allclose(rec.transmittance[20], km_transmittance(coeffs, 2.0), atol=1e-12)


def test_self_mixture_equals_double_quantity():
    # mixing a pigment with itself at (q, q) must equal the pigment at 2q
    specs = default_pigment_specs(0)
    substrate = make_substrate()
    from watermix.km import mix_km

    for spec in specs[:3]:
        c = spec.coefficients()
        mixed = mix_km([c, c], [0.5, 0.5])
        direct = composite_km(c, substrate, 4.0)
        via_mix = composite_km(mixed, substrate, 4.0)
        assert np.max(np.abs(direct - via_mix)) < 1e-9
