"""Evaluation reports: color-difference distribution, symmetry audit, and the
three-way comparison against the physics baseline.

Reports are emitted as JSON + CSV plus small hand-rolled SVG charts so the
core keeps zero plotting dependencies.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .colorimetry import (
    DELTA_E_DIFFERENT_COLOR,
    delta_e_ab,
    spectrum_to_lab,
    spectrum_to_srgb8,
)
from .dataset import Corpus, DatasetSplit, MixSample, TYPE_M
from .errors import ValidationError
from .km import composite_km, invert_km, mix_km
from .mixnet import ModelWeights, forward_batch, samples_to_arrays

HISTOGRAM_MAX = 20  # unit-width bins 0..20, then one overflow bucket
KM_THICKNESS_SWEEP = tuple(0.25 * i for i in range(1, 17))  # 0.25 .. 4.0


@dataclass
class EvalReport:
    delta_e: list[float]
    sample_ids: list[str]
    label_types: list[str]
    histogram: dict
    cdf: dict
    fraction_below_5: float
    symmetry: dict
    km_comparison: dict | None = None

    def to_dict(self) -> dict:
        d = {
            "schema_version": 1,
            "n": len(self.delta_e),
            "delta_e": self.delta_e,
            "sample_ids": self.sample_ids,
            "label_types": self.label_types,
            "histogram": self.histogram,
            "cdf": self.cdf,
            "fraction_below_5": self.fraction_below_5,
            "symmetry": self.symmetry,
        }
        if self.km_comparison is not None:
            d["km_comparison"] = self.km_comparison
        return d


def _histogram(values: np.ndarray, types: list[str]) -> dict:
    edges = list(range(HISTOGRAM_MAX + 1))
    counts = {}
    for label in ("I", "M", "all"):
        if label == "all":
            vals = values
        else:
            vals = values[np.array([t == label for t in types], dtype=bool)]
        bins = [
            int(np.count_nonzero((vals >= lo) & (vals < lo + 1))) for lo in edges
        ]
        bins.append(int(np.count_nonzero(vals >= HISTOGRAM_MAX + 1)))
        counts[label] = bins
    return {"bin_width": 1.0, "edges": edges, "counts": counts}


def _cdf(values: np.ndarray) -> dict:
    n = values.shape[0]
    at = list(range(HISTOGRAM_MAX + 1))
    vals = [float(np.count_nonzero(values <= b)) / n for b in at]
    # final entry covers the overflow bucket, so the curve always ends at 1
    return {"at": at + ["overflow"], "value": vals + [1.0]}


def evaluate_split(
    w: ModelWeights, split: DatasetSplit, corpus: Corpus | None = None, km_cases: int = 0,
    seed: int = 0,
) -> EvalReport:
    """Predict the test set and compile the color-difference report."""
    samples = split.test
    if not samples:
        raise ValidationError("empty test set")
    x, y = samples_to_arrays(samples)
    pred = forward_batch(w, x)
    des = np.array([
        delta_e_ab(spectrum_to_lab(p), spectrum_to_lab(t)) for p, t in zip(pred, y)
    ])
    types = [s.label_type for s in samples]
    cdf = _cdf(des)
    fraction = cdf["value"][5]

    report = EvalReport(
        delta_e=[float(v) for v in des],
        sample_ids=[s.sample_id for s in samples],
        label_types=types,
        histogram=_histogram(des, types),
        cdf=cdf,
        fraction_below_5=float(fraction),
        symmetry=symmetry_audit(w, samples),
    )
    if km_cases > 0:
        if corpus is None:
            raise ValidationError("KM comparison needs the corpus")
        report.km_comparison = km_comparison(w, split, corpus, n_cases=km_cases, seed=seed)
    return report


def symmetry_audit(w: ModelWeights, samples: list[MixSample]) -> dict:
    """Color difference between predictions with the pigment roles swapped.

    The physics baseline is exactly symmetric; the learned network is not, so
    the gap is worth reporting per pair.
    """
    originals = []
    seen = set()
    for s in samples:
        oriented = (s.pigment_a.index, s.q_a.ul) <= (s.pigment_b.index, s.q_b.ul)
        if oriented and s.sample_id not in seen:
            seen.add(s.sample_id)
            originals.append(s)
    if not originals:
        originals = samples
    x_fwd, _ = samples_to_arrays(originals)
    x_swp, _ = samples_to_arrays([s.swapped() for s in originals])
    pred_fwd = forward_batch(w, x_fwd)
    pred_swp = forward_batch(w, x_swp)
    gaps = np.array([
        delta_e_ab(spectrum_to_lab(a), spectrum_to_lab(b))
        for a, b in zip(pred_fwd, pred_swp)
    ])
    order = np.argsort(-gaps)
    table = [
        {"sample_id": originals[i].sample_id, "delta_e_gap": float(gaps[i])}
        for i in order
    ]
    return {
        "n": len(originals),
        "max": float(gaps.max()),
        "mean": float(gaps.mean()),
        "per_pair": table,
    }


# ---------------------------------------------------------------------------
# Three-way comparison with the two-constant layer model (3-channel mode).
#
# The channel triple is mean reflectance over three wavelength bands rather
# than display sRGB: the sRGB matrix has negative lobes, so a layer over a
# darker backing can come out *brighter* on an sRGB channel, which breaks the
# inversion's r_white > r_black precondition.  Band means are nonnegative
# projections, so the physical ordering survives and the values are already
# normalized to [0, 1].

_BAND_SLICES = (slice(22, 41), slice(12, 22), slice(0, 12))  # R: 600-780, G: 500-590, B: 380-490


def _band_rgb(spectrum) -> np.ndarray:
    s = np.asarray(spectrum, dtype=np.float64)
    rgb = np.array([s[b].mean() for b in _BAND_SLICES])
    return np.clip(rgb, 1e-6, 1.0 - 1e-6)


def _bands_to_spectrum(rgb: np.ndarray) -> np.ndarray:
    """Lift a band triple back to a piecewise-constant spectrum for colorimetry."""
    out = np.empty(41)
    for value, band in zip(rgb, _BAND_SLICES):
        out[band] = value
    return np.clip(out, 0.0, 1.0)


def km_predict_mixture_rgb(corpus: Corpus, pigment_a: int, pigment_b: int):
    """(K, S) of both pigments from white/black-backed 0.01 mL samples.

    Classic three-channel recipe: project the backed reflectances to RGB-like
    band values in [0, 1], invert per channel assuming ideal backings, then
    mix the coefficients at equal proportions.
    """
    if not corpus.black_backed:
        raise ValidationError(
            "corpus has no black_backed.csv; the comparison needs black-backed samples"
        )
    by_index = {r.pigment.index: r for r in corpus.records}
    coeffs = []
    for index in (pigment_a, pigment_b):
        r_white = _band_rgb(by_index[index].reflectance[10])
        r_black = _band_rgb(corpus.black_backed[index])
        coeffs.append(invert_km(r_white, r_black))
    return mix_km(coeffs, [0.5, 0.5])


def km_comparison(
    w: ModelWeights, split: DatasetSplit, corpus: Corpus, n_cases: int = 15, seed: int = 0
) -> dict:
    """Model vs physics baseline on held-out two-pigment cases.

    The layer thickness for the baseline is not pinned down by the match
    protocol, so each case sweeps X over 0.25..4 and reports the best; the
    chosen X is included and flagged as a sweep stand-in.
    """
    candidates = sorted(
        (
            s for s in split.test
            if s.label_type == TYPE_M and s.pigment_a.index < s.pigment_b.index
        ),
        key=lambda s: s.sample_id,
    )
    if len(candidates) < n_cases:
        raise ValidationError(f"only {len(candidates)} held-out mixture cases available")
    rng = np.random.default_rng(seed)
    chosen = [candidates[i] for i in sorted(rng.choice(len(candidates), n_cases, replace=False))]

    white_rgb = _band_rgb(corpus.substrate)
    x_feats, y = samples_to_arrays(chosen)
    model_pred = forward_batch(w, x_feats)

    cases = []
    wins = 0
    for i, sample in enumerate(chosen):
        truth_lab = spectrum_to_lab(y[i])
        model_lab = spectrum_to_lab(model_pred[i])
        de_model = delta_e_ab(model_lab, truth_lab)

        mixed = km_predict_mixture_rgb(corpus, sample.pigment_a.index, sample.pigment_b.index)
        best = None
        for thickness in KM_THICKNESS_SWEEP:
            bands = composite_km(mixed, white_rgb, thickness)
            step = _bands_to_spectrum(bands)
            km_srgb = spectrum_to_srgb8(step)
            de = delta_e_ab(spectrum_to_lab(step), truth_lab)
            if best is None or de < best[0]:
                best = (de, thickness, km_srgb)
        de_km, thickness, km_srgb = best
        model_wins = bool(de_model < de_km)
        wins += model_wins
        truth_rgb = spectrum_to_srgb8(y[i])
        model_rgb = spectrum_to_srgb8(model_pred[i])
        cases.append({
            "sample_id": sample.sample_id,
            "model_rgb": list(model_rgb.as_tuple()),
            "truth_rgb": list(truth_rgb.as_tuple()),
            "km_rgb": list(km_srgb.as_tuple()),
            "delta_e_model": float(de_model),
            "delta_e_km": float(de_km),
            "km_thickness": thickness,
            "km_thickness_is_sweep_best": True,
            "model_wins": model_wins,
        })
    return {"n_cases": n_cases, "model_wins": wins, "cases": cases}


# ---------------------------------------------------------------------------
# Output files


def write_eval_outputs(report: EvalReport, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "eval_report.json").write_text(
        json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"
    )
    rows = ["sample_id,label_type,delta_e"]
    rows += [
        f"{sid},{lt},{de!r}"
        for sid, lt, de in zip(report.sample_ids, report.label_types, report.delta_e)
    ]
    (out / "delta_e.csv").write_text("\n".join(rows) + "\n")
    (out / "delta_e_hist.svg").write_text(histogram_svg(report))


def write_km_comparison_outputs(comparison: dict, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "km_comparison.json").write_text(
        json.dumps(comparison, sort_keys=True, indent=2) + "\n"
    )
    rows = ["sample_id,model_rgb,truth_rgb,km_rgb,delta_e_model,delta_e_km,km_thickness,model_wins"]
    for c in comparison["cases"]:
        rows.append(
            "{},{},{},{},{!r},{!r},{!r},{}".format(
                c["sample_id"],
                " ".join(map(str, c["model_rgb"])),
                " ".join(map(str, c["truth_rgb"])),
                " ".join(map(str, c["km_rgb"])),
                c["delta_e_model"],
                c["delta_e_km"],
                c["km_thickness"],
                c["model_wins"],
            )
        )
    (out / "km_comparison.csv").write_text("\n".join(rows) + "\n")


def histogram_svg(report: EvalReport, width: int = 640, height: int = 360) -> str:
    """Static stacked histogram + CDF curve, no plotting dependency."""
    hist = report.histogram
    counts_i = hist["counts"]["I"]
    counts_m = hist["counts"]["M"]
    n_bins = len(counts_i)
    peak = max(1, max(i + m for i, m in zip(counts_i, counts_m)))
    margin, plot_w, plot_h = 40, width - 80, height - 80
    bar_w = plot_w / n_bins

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for b in range(n_bins):
        x = margin + b * bar_w
        h_i = counts_i[b] / peak * plot_h
        h_m = counts_m[b] / peak * plot_h
        y_i = margin + plot_h - h_i
        y_m = y_i - h_m
        parts.append(
            f'<rect x="{x:.1f}" y="{y_i:.1f}" width="{bar_w - 2:.1f}" height="{h_i:.1f}" '
            f'fill="#4dc3c3" stroke="none"><title>[{b},{b + 1}) incrementation: '
            f"{counts_i[b]}</title></rect>"
        )
        parts.append(
            f'<rect x="{x:.1f}" y="{y_m:.1f}" width="{bar_w - 2:.1f}" height="{h_m:.1f}" '
            f'fill="#e8c54a" stroke="none"><title>[{b},{b + 1}) mixtures: '
            f"{counts_m[b]}</title></rect>"
        )
    points = []
    cdf_vals = report.cdf["value"][: n_bins]
    for b, v in enumerate(cdf_vals):
        x = margin + (b + 1) * bar_w
        yy = margin + plot_h * (1.0 - v)
        points.append(f"{x:.1f},{yy:.1f}")
    parts.append(
        f'<polyline points="{" ".join(points)}" fill="none" stroke="#d04040" stroke-width="2"/>'
    )
    threshold_x = margin + DELTA_E_DIFFERENT_COLOR * bar_w
    parts.append(
        f'<line x1="{threshold_x:.1f}" y1="{margin}" x2="{threshold_x:.1f}" '
        f'y2="{margin + plot_h}" stroke="#808080" stroke-dasharray="4 3"/>'
    )
    parts.append(
        f'<text x="{margin}" y="{margin - 10}" font-family="sans-serif" font-size="13">'
        f"color difference distribution (n={len(report.delta_e)}, "
        f"below 5: {report.fraction_below_5:.1%})</text>"
    )
    parts.append(
        f'<text x="{margin}" y="{height - 12}" font-family="sans-serif" font-size="11">'
        "unit bins 0..20 plus overflow; teal = incrementation, yellow = mixtures, "
        "red = cumulative fraction</text>"
    )
    parts.append("</svg>")
    return "\n".join(parts)
