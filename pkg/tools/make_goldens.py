#!/usr/bin/env python3
"""Freeze golden inferred documents for the bundled scenes.

Run from the repo root after intentional pipeline changes:
    python3 tools/make_goldens.py
Tests compare against these bytes exactly; regenerate only on purpose.
"""

from pathlib import Path

from vibroscene import CorpusManifest, MockBackend, serialize_inferred
from vibroscene.pipeline import load_and_derive, run_inference

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "tests" / "fixtures"

SCENES = ["study2_smartphone", "study2_speaker", "study2_washing_machine"]


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    corpus = CorpusManifest.load(ROOT / "corpus" / "manifest.json")
    for name in SCENES:
        scene, derived = load_and_derive((ROOT / "scenes" / f"{name}.json").read_bytes())
        inferred, _ = run_inference(scene, derived, MockBackend(), corpus)
        path = OUT / f"{name}.inferred.json"
        path.write_bytes(serialize_inferred(inferred))
        print(f"wrote {path.relative_to(ROOT)}")


if __name__ == "__main__":
    main()
