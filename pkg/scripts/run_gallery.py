#!/usr/bin/env python3
"""Classify every gallery entry and write one JSON report per entry.

Usage: python scripts/run_gallery.py [outdir]
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from sldl.bridge import classify_detailed, gallery
from sldl.cli import canonical_json, make_envelope


def main() -> None:
    outdir = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "gallery_reports")
    outdir.mkdir(parents=True, exist_ok=True)
    width = max(len(e.name) for e in gallery())
    for entry in gallery():
        verdict, reports = classify_detailed(entry.problem, entry.config)
        envelope = make_envelope(
            "classify", {"problem": f"gallery:{entry.name}"},
            {"verdict": verdict.to_json(),
             "reports": [r.to_json() for r in reports]})
        path = outdir / f"{entry.name}.json"
        path.write_text(canonical_json(envelope) + "\n", encoding="utf-8")
        mark = "ok" if verdict.classification == entry.expected else "MISMATCH"
        print(f"{entry.name:{width}s}  expected={entry.expected:15s} "
              f"got={verdict.classification:15s} [{mark}]  -> {path}")


if __name__ == "__main__":
    main()
