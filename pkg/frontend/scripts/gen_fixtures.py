#!/usr/bin/env python3
"""Capture real service and CLI bytes as frontend test fixtures.

Builds deterministic artifacts (synthetic corpus, small model, reduced
lookup table), then records:
  - POST /api/match responses for the four e2e quadrant colors
  - POST /api/mix response for (pigment 1, 0.02 mL) + (pigment 8, 0.01 mL)
  - `watermix mix` stdout for the same arguments
  - GET /api/health and /api/pigments

Run from frontend/: python3 scripts/gen_fixtures.py
"""

import contextlib
import io
import json
import os
import sys
import tempfile
from pathlib import Path

# single-threaded BLAS so regenerated fixture bytes are reproducible
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")

from fastapi.testclient import TestClient

from watermix.cli import main
from watermix.service import ServiceConfig, create_app_from_config

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "test" / "fixtures"
QUADRANT_COLORS = [(200, 60, 60), (60, 160, 70), (70, 90, 180), (230, 220, 120)]
MIX_ARGS = {"pa": 1, "qa": 0.02, "pb": 8, "qb": 0.01}


def run_cli(*argv) -> str:
    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        code = main(list(argv))
    if code != 0:
        raise SystemExit(f"CLI failed: {argv}")
    return out.getvalue()


def build_artifacts(root: Path):
    run_cli("synth", "--seed", "0", "--out", str(root / "corpus"))
    cfg = root / "tiny.json"
    cfg.write_text(json.dumps({"preset": "desk", "epochs": 300, "seed": 0}))
    run_cli(
        "train", "--corpus", str(root / "corpus"),
        "--config", str(cfg), "--out", str(root / "model.bin"),
    )
    run_cli(
        "build-lut", "--corpus", str(root / "corpus"), "--model", str(root / "model.bin"),
        "--out", str(root / "palette.lut"), "--quantity-stride", "8",
    )


def capture(root: Path):
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    service = ServiceConfig(
        corpus_dir=str(root / "corpus"),
        model_path=str(root / "model.bin"),
        lut_path=str(root / "palette.lut"),
    )
    client = TestClient(create_app_from_config(service))

    for i, rgb in enumerate(QUADRANT_COLORS, start=1):
        response = client.post("/api/match", json={"rgb": list(rgb), "top_k": 3})
        response.raise_for_status()
        (FIXTURE_DIR / f"match_q{i}.json").write_bytes(response.content)

    response = client.post("/api/mix", json=MIX_ARGS)
    response.raise_for_status()
    (FIXTURE_DIR / "mix_service.json").write_bytes(response.content)

    cli_out = run_cli(
        "mix", "--corpus", str(root / "corpus"), "--model", str(root / "model.bin"),
        "--pa", "1", "--qa", "0.02", "--pb", "8", "--qb", "0.01",
    )
    (FIXTURE_DIR / "mix_cli.json").write_text(cli_out)

    (FIXTURE_DIR / "health.json").write_bytes(client.get("/api/health").content)
    (FIXTURE_DIR / "pigments.json").write_bytes(client.get("/api/pigments").content)
    (FIXTURE_DIR / "meta.json").write_text(json.dumps({
        "quadrant_colors": QUADRANT_COLORS,
        "mix_args": MIX_ARGS,
        "note": "bytes captured from the real service/CLI on deterministic artifacts",
    }, indent=2) + "\n")


if __name__ == "__main__":
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        build_artifacts(root)
        capture(root)
    print(f"fixtures written to {FIXTURE_DIR}", file=sys.stderr)
