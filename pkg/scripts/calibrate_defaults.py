"""Regenerate the packaged default thresholds from the hand-built corpus.

    python3 scripts/calibrate_defaults.py [--check]

With ``--check`` the packaged file is compared with a fresh calibration
instead of being rewritten (exit 1 on mismatch).
"""
from __future__ import annotations

import argparse
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from corpus_tools import materialize  # noqa: E402

from refdetect.cli import load_manifest  # noqa: E402
from refdetect.evaluation import calibrate_all  # noqa: E402

TARGET = ROOT / "src" / "refdetect" / "data" / "default_thresholds.txt"
HEADER = "# F1-calibrated on tests/corpus (grid 0.1-0.9); regenerate with scripts/calibrate_defaults.py\n"


def calibrated_text() -> str:
    with tempfile.TemporaryDirectory() as tmp:
        pairs, oracle = load_manifest(materialize(Path(tmp)))
        config = calibrate_all(pairs, oracle)
    return HEADER + config.dumps()


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--check", action="store_true")
    args = ap.parse_args()
    text = calibrated_text()
    if args.check:
        same = TARGET.read_text(encoding="utf-8") == text
        print("defaults up to date" if same else "defaults differ from a fresh calibration")
        return 0 if same else 1
    TARGET.write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
