"""Command-line front end: thin argument parsing over the engine modules.

Failures print a machine-readable error JSON to stderr and exit nonzero:
exit 2 for domain/validation/parse errors, 3 when an artifact is not ready,
1 for anything unexpected.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .colorimetry import SRGB8
from .dataset import NormalizationConfig, load_corpus, write_corpus
from .errors import NotReadyError, TrainingDivergedError, WatermixError
from .mixnet import (
    NetworkConfig,
    load_model,
    model_file_hash,
    save_model,
    train,
)
from .palette import build_lut, load_lut, match_color, mix_preview
from .service import (
    ServiceConfig,
    canonical_json,
    create_app_from_config,
    match_payload,
    mix_payload,
)
from .spectra import GRID_QUANTITIES_UL, expand_primaries
from .synth import synthesize_corpus
from . import dataset as ds
from . import reports


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(canonical_json({"error": {"type": kind, "message": message}}).decode())
    return code


def _load_network_config(path: str | None, seed: int | None) -> NetworkConfig:
    raw = {}
    if path:
        raw = json.loads(Path(path).read_text())
    preset = raw.pop("preset", "desk")
    if seed is not None:
        raw["seed"] = seed
    if preset == "full":
        return NetworkConfig.full(**raw)
    if preset == "desk":
        return NetworkConfig.desk(**raw)
    raise WatermixError(f"unknown config preset {preset!r}")


def cmd_synth(args) -> int:
    corpus = synthesize_corpus(args.seed)
    write_corpus(args.out, corpus)
    print(json.dumps({"out": str(args.out), "seed": args.seed,
                      "mixtures": len(corpus.mixtures)}))
    return 0


def cmd_ingest(args) -> int:
    records, substrate = ds.ingest(args.pigments)
    mixtures = ds.ingest_mixtures(args.mixtures)
    black = ds.ingest_black_backed(args.black_backed) if args.black_backed else {}
    corpus = ds.Corpus(
        records=records, substrate=substrate, mixtures=mixtures, black_backed=black,
        manifest={"schema_version": 1, "generator": "ingested",
                  "counts": {"pigments": len(records), "mixtures": len(mixtures)}},
    )
    # materializing the labeled corpus validates counts and ground-truth coverage
    samples = corpus.labeled_samples()
    write_corpus(args.out, corpus)
    print(json.dumps({"out": str(args.out), "samples": len(samples)}))
    return 0


def cmd_train(args) -> int:
    corpus = load_corpus(args.corpus)
    cfg = _load_network_config(args.config, args.seed)
    norm = NormalizationConfig.from_dict(cfg.normalization)
    split = ds.split(corpus.labeled_samples(norm), seed=cfg.seed)
    out = Path(args.out)
    try:
        weights, report = train(split, cfg, checkpoint_path=out)
    except TrainingDivergedError as exc:
        if exc.last_good is not None:
            save_model(out, exc.last_good)
        return _fail("training_diverged", str(exc), 2)
    save_model(out, weights)
    out.with_suffix(out.suffix + ".report.json").write_text(
        json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"
    )
    out.with_suffix(out.suffix + ".split.json").write_text(
        json.dumps(split.manifest(norm), sort_keys=True, indent=2) + "\n"
    )
    print(json.dumps({
        "out": str(out),
        "model_hash": model_file_hash(out),
        "final_loss": report.final_loss,
        "wall_time_s": report.wall_time_s,
    }))
    return 0


def _split_for_model(corpus, weights):
    norm = NormalizationConfig.from_dict(weights.config.normalization)
    return ds.split(corpus.labeled_samples(norm), seed=weights.config.seed)


def cmd_eval(args) -> int:
    corpus = load_corpus(args.corpus)
    weights = load_model(args.model)
    split = _split_for_model(corpus, weights)
    report = reports.evaluate_split(
        weights, split, corpus=corpus, km_cases=args.km_cases, seed=weights.config.seed
    )
    reports.write_eval_outputs(report, args.out)
    print(json.dumps({
        "out": str(args.out),
        "n": len(report.delta_e),
        "fraction_below_5": report.fraction_below_5,
        "symmetry_max": report.symmetry["max"],
    }))
    return 0


def cmd_compare_km(args) -> int:
    corpus = load_corpus(args.corpus)
    weights = load_model(args.model)
    split = _split_for_model(corpus, weights)
    comparison = reports.km_comparison(
        weights, split, corpus, n_cases=args.cases, seed=weights.config.seed
    )
    reports.write_km_comparison_outputs(comparison, args.out)
    print(json.dumps({
        "out": str(args.out),
        "n_cases": comparison["n_cases"],
        "model_wins": comparison["model_wins"],
    }))
    return 0


def cmd_build_lut(args) -> int:
    corpus = load_corpus(args.corpus)
    weights = load_model(args.model)
    model_hash = model_file_hash(args.model)
    entries = expand_primaries(corpus.records)
    subset = None
    if args.pigments_subset:
        subset = {int(v) for v in args.pigments_subset.split(",")}
        entries = [e for e in entries if e.pigment.index in subset]
    if args.quantity_stride > 1:
        kept = set(GRID_QUANTITIES_UL[:: args.quantity_stride])
        entries = [e for e in entries if e.quantity.ul in kept]
    build_config = {
        "pigments_subset": sorted(subset) if subset else None,
        "quantity_stride": args.quantity_stride,
    }
    lut = build_lut(
        weights, corpus.records, corpus.substrate,
        model_hash=model_hash, entries=entries,
        out_path=args.out, build_config=build_config,
    )
    print(json.dumps({"out": str(args.out), "entries": len(lut), "model_hash": model_hash}))
    return 0


def _parse_rgb(text: str) -> SRGB8:
    parts = [int(v) for v in text.split(",")]
    if len(parts) != 3 or any(not 0 <= v <= 255 for v in parts):
        raise WatermixError(f"--rgb must be three 0..255 integers, got {text!r}")
    return SRGB8(*parts)


def cmd_match(args) -> int:
    if not Path(args.lut).exists():
        raise NotReadyError(f"lookup table not found: {args.lut}")
    lut = load_lut(args.lut)
    recipes = match_color(lut, _parse_rgb(args.rgb), top_k=args.top)
    sys.stdout.write(canonical_json(match_payload(recipes, lut.model_hash)).decode())
    return 0


def cmd_mix(args) -> int:
    corpus = load_corpus(args.corpus)
    weights = load_model(args.model)
    swatches, spectrum = mix_preview(
        weights, corpus.records, corpus.substrate, args.pa, args.qa, args.pb, args.qb
    )
    sys.stdout.write(
        canonical_json(mix_payload(swatches, spectrum, args.pa, args.qa, args.pb, args.qb)).decode()
    )
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    cfg = ServiceConfig.from_file(args.config)
    app = create_app_from_config(cfg)
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="watermix")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="validate measured data files into a corpus")
    p.add_argument("--pigments", required=True)
    p.add_argument("--mixtures", required=True)
    p.add_argument("--black-backed", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="train the mixture model")
    p.add_argument("--corpus", required=True)
    p.add_argument("--config", default=None, help="network config JSON (preset desk/full)")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="test-set color-difference report")
    p.add_argument("--corpus", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--km-cases", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare-km", help="three-way comparison with the physics baseline")
    p.add_argument("--corpus", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--cases", type=int, default=15)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare_km)

    p = sub.add_parser("build-lut", help="predict all primary pairs into a lookup table")
    p.add_argument("--corpus", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--pigments-subset", default=None, help="comma-separated pigment indices")
    p.add_argument("--quantity-stride", type=int, default=1)
    p.set_defaults(func=cmd_build_lut)

    p = sub.add_parser("match", help="nearest-recipe lookup for an RGB target")
    p.add_argument("--lut", required=True)
    p.add_argument("--rgb", required=True)
    p.add_argument("--top", type=int, default=1)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("mix", help="predicted mixture swatches for two pigments")
    p.add_argument("--corpus", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--pa", type=int, required=True)
    p.add_argument("--qa", type=float, required=True)
    p.add_argument("--pb", type=int, required=True)
    p.add_argument("--qb", type=float, required=True)
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NotReadyError as exc:
        return _fail("not_ready", str(exc), 3)
    except WatermixError as exc:
        return _fail(type(exc).__name__, str(exc), 2)
    except FileNotFoundError as exc:
        return _fail("file_not_found", str(exc), 2)
    except Exception as exc:  # pragma: no cover - unexpected faults
        return _fail("internal", f"{type(exc).__name__}: {exc}", 1)


if __name__ == "__main__":
    sys.exit(main())
