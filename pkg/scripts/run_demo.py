#!/usr/bin/env python3
"""End-to-end demo on a seeded synthetic corpus.

Generates records plus classification tables, runs the full pipeline
(report = ingest -> flows -> metrics -> viz), and points at the outputs.

Usage:
    python3 scripts/run_demo.py [--out demo_out] [--seed 42] [--authors 400]
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from topicflow.cli import main as topicflow  # noqa: E402


def run(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo_out")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--authors", type=int, default=400)
    parser.add_argument("--snapshots", type=int, default=6)
    args = parser.parse_args(argv)

    out = Path(args.out)
    corpus_dir = out / "corpus"
    rc = topicflow([
        "synth", "--out", str(corpus_dir), "--seed", str(args.seed),
        "--authors", str(args.authors), "--topics", "24", "--areas", "6",
        "--snapshots", str(args.snapshots), "--mobility", "0.4",
    ])
    if rc != 0:
        return rc

    manifest = json.loads((corpus_dir / "synth_manifest.json").read_text())
    grid = manifest["grid"]
    rc = topicflow([
        "report",
        "--records", str(corpus_dir / "records.tsv"),
        "--journal-topics", str(corpus_dir / "journal_topics.tsv"),
        "--topic-areas", str(corpus_dir / "topic_areas.tsv"),
        "--out", str(out / "pipeline"),
        "--start-year", str(grid["start_year"]),
        "--end-year", str(grid["end_year"]),
        "--width", str(grid["width_years"]),
    ])
    if rc != 0:
        return rc

    print()
    print(f"corpus:   {corpus_dir}")
    print(f"pipeline: {out / 'pipeline'}")
    print(f"diagrams: {sorted(p.name for p in (out / 'pipeline').glob('*.svg'))}")
    return 0


if __name__ == "__main__":
    sys.exit(run())
